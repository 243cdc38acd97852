"""Random commuting tuples for tests and experiments.

Every generator takes a numpy Generator so results are reproducible.
"""
from __future__ import annotations

import numpy as np
import scipy.stats

from .dirac import CommutingTuple

KINDS = ("poly", "nilpotent", "diagonal", "triangular")


def _cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, n: int) -> np.ndarray:
    return scipy.stats.unitary_group.rvs(n, random_state=rng) if n > 1 else np.eye(1, dtype=complex)


def _poly_family(rng, A, d, constant=True, degree=2):
    n = A.shape[0]
    powers = [np.eye(n, dtype=complex)]
    for _ in range(degree):
        powers.append(powers[-1] @ A)
    start = 0 if constant else 1
    mats = []
    for _ in range(d):
        coeffs = _cgauss(rng, degree + 1) / 2
        mats.append(sum(coeffs[m] * powers[m] for m in range(start, degree + 1)))
    return mats


def random_commuting_tuple(rng, n: int, d: int, kind: str = "poly") -> CommutingTuple:
    """A commuting d-tuple of n×n matrices built as polynomials in one matrix.

    ``poly``: a random dense matrix; ``nilpotent``: no constant terms in a
    strictly upper-triangular matrix, so 0 is in the joint spectrum;
    ``diagonal``: unitarily diagonal with repeated eigenvalues;
    ``triangular``: a well-conditioned similarity of an upper-triangular matrix.
    """
    if kind == "poly":
        A = _cgauss(rng, n, n) / (2 * np.sqrt(n))
        return CommutingTuple(tuple(_poly_family(rng, A, d)))
    if kind == "nilpotent":
        A = np.triu(_cgauss(rng, n, n), 1) / 2
        return CommutingTuple(tuple(_poly_family(rng, A, d, constant=False)))
    if kind == "diagonal":
        Q = random_unitary(rng, n)
        values = rng.integers(-2, 3, size=(d, max(1, n // 2))).astype(complex)
        pick = rng.integers(0, values.shape[1], size=n)
        return CommutingTuple(tuple(Q @ np.diag(v[pick]) @ Q.conj().T for v in values))
    if kind == "triangular":
        t, _ = triangularizable_tuple(rng, n, d)
        return t
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def triangularizable_tuple(rng, n: int, d: int):
    """Tuple Q p_k(U) Q^* with U upper-triangular, plus its joint diagonal set.

    U has well-separated diagonal entries, so the joint eigenvalues are the
    vectors (p_1(u_i), ..., p_d(u_i)).
    """
    angles = 2 * np.pi * (np.arange(n) + rng.uniform(0, 0.5)) / n
    u = (0.5 + 0.5 * rng.uniform(size=n)) * np.exp(1j * angles)
    U = np.diag(u) + np.triu(_cgauss(rng, n, n), 1) / 4
    coeffs = _cgauss(rng, d, 3) / 2
    mats, joint = [], []
    Q = random_unitary(rng, n)
    for c in coeffs:
        P = c[0] * np.eye(n) + c[1] * U + c[2] * U @ U
        mats.append(Q @ P @ Q.conj().T)
        joint.append(c[0] + c[1] * u + c[2] * u * u)
    return CommutingTuple(tuple(mats)), [np.array(v) for v in zip(*joint)]
