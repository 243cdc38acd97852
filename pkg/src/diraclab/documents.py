"""JSON documents for tuples and Dirac operators; complex entries are [re, im] pairs."""
from __future__ import annotations

import json

import numpy as np

from .dirac import DEFAULT_COMM_TOL, CommutingTuple, DiracPair, max_norm


class DocumentError(ValueError):
    """Malformed or inconsistent input document."""


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(rows, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DocumentError(f"expected an array of [re, im] pairs, got shape {arr.shape}")
    M = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and M.shape != shape:
        raise DocumentError(f"expected a {shape[0]}x{shape[1]} matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DocumentError("matrix entries must be finite")
    return M


def decode_vector(items) -> np.ndarray:
    """A vector given as numbers or [re, im] pairs."""
    out = []
    for z in items:
        if isinstance(z, (list, tuple)):
            if len(z) != 2:
                raise DocumentError(f"bad complex entry {z!r}")
            out.append(complex(z[0], z[1]))
        else:
            out.append(complex(z))
    return np.array(out, dtype=complex)


def tuple_to_dict(t: CommutingTuple) -> dict:
    return {
        "d": t.d,
        "n": t.n,
        "matrices": [encode_matrix(T) for T in t.matrices],
        "comm_tol": t.comm_tol,
    }


def dirac_to_dict(pair: DiracPair) -> dict:
    return {"d": pair.d, "n": pair.n, "D": encode_matrix(pair.D), "sa_tol": pair.sa_tol}


def _int_field(obj, key):
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise DocumentError(f"field {key!r} must be a positive integer")
    return v


def tuple_from_dict(obj: dict) -> CommutingTuple:
    """Parse a tuple document; commutativity is validated here."""
    d, n = _int_field(obj, "d"), _int_field(obj, "n")
    mats = obj.get("matrices")
    if not isinstance(mats, list) or len(mats) != d:
        raise DocumentError(f"'matrices' must list {d} matrices")
    decoded = tuple(decode_matrix(M, (n, n)) for M in mats)
    return CommutingTuple(decoded, float(obj.get("comm_tol", DEFAULT_COMM_TOL)))


def dirac_from_dict(obj: dict) -> DiracPair:
    d, n = _int_field(obj, "d"), _int_field(obj, "n")
    size = n << d
    D = decode_matrix(obj.get("D"), (size, size))
    sa_tol = float(obj.get("sa_tol", 1e-10 * (1.0 + max_norm(D))))
    if max_norm(D - D.conj().T) > sa_tol:
        raise DocumentError(f"D is not self-adjoint within {sa_tol:.3e}")
    return DiracPair.from_matrix(D, d, sa_tol)


def load_document(path):
    """Read a tuple or Dirac document, dispatching on the 'D' key."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise DocumentError("document must be a JSON object")
    return dirac_from_dict(obj) if "D" in obj else tuple_from_dict(obj)


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"
