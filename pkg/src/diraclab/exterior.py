"""Standard irreducible CAR representation on the exterior algebra of C^d.

Basis vectors e_S of the exterior algebra are labelled by bitmasks: mode k
(1-based) is bit ``k - 1``, and basis index equals the integer value of the
mask.  So e_∅ has index 0 and e_{1..d} has index ``2**d - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MAX_DIM = 16


def _check_dim(d: int) -> None:
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension d must satisfy 1 <= d <= {MAX_DIM}, got {d}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MultiIndex:
    """Subset S of {1..d} stored as a bitmask."""

    bits: int
    d: int

    def __post_init__(self):
        _check_dim(self.d)
        if not 0 <= self.bits < (1 << self.d):
            raise ValueError(f"bits={self.bits} out of range for d={self.d}")

    @classmethod
    def from_modes(cls, modes, d: int) -> "MultiIndex":
        bits = 0
        for k in modes:
            if not 1 <= k <= d:
                raise ValueError(f"mode {k} out of range 1..{d}")
            bits |= 1 << (k - 1)
        return cls(bits, d)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(k for k in range(1, self.d + 1) if self.bits >> (k - 1) & 1)

    @property
    def degree(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, k: int) -> bool:
        return bool(self.bits >> (k - 1) & 1)


def creation_sign(k: int, S, d: int | None = None) -> int:
    """Sign picked up when e_k is wedged in front of e_S and sorted.

    ``S`` is a MultiIndex or a raw bitmask (then ``d`` bounds ``k``).
    """
    if isinstance(S, MultiIndex):
        bits, d = S.bits, S.d
    else:
        bits = int(S)
    if k < 1 or (d is not None and k > d):
        raise ValueError(f"mode index k={k} out of range")
    below = bits & ((1 << (k - 1)) - 1)
    return -1 if below.bit_count() % 2 else 1


def degree_indices(d: int, k: int) -> np.ndarray:
    """Basis indices of Λ^k C^d in ascending order."""
    return np.array([s for s in range(1 << d) if s.bit_count() == k], dtype=np.intp)


@dataclass(frozen=True, eq=False)
class CliffordFrame:
    """Creation operators on Λ C^d together with their gauge structure.

    ``number_op`` and ``parity`` are stored as full (diagonal) matrices.
    Frames other than the standard one arise from the homology/cohomology
    duality, where the annihilators play the role of creators.
    """

    d: int
    creation: tuple[np.ndarray, ...]
    number_op: np.ndarray
    parity: np.ndarray
    even_proj: np.ndarray
    odd_proj: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.d

    @property
    def number_levels(self) -> np.ndarray:
        """Integer eigenvalue of N at each basis index (N is diagonal)."""
        return np.rint(np.diag(self.number_op).real).astype(int)

    def annihilation(self, k: int) -> np.ndarray:
        return self.creation[k - 1].conj().T


def _frame_from_creation(d: int, creation: Sequence[np.ndarray]) -> CliffordFrame:
    dim = 1 << d
    N = sum(c @ c.conj().T for c in creation) if creation else np.zeros((dim, dim), complex)
    levels = np.rint(np.diag(N).real).astype(int)
    parity = np.diag((-1.0) ** levels).astype(complex)
    even = np.diag((levels % 2 == 0).astype(float)).astype(complex)
    return CliffordFrame(
        d=d,
        creation=tuple(_freeze(np.asarray(c, dtype=complex)) for c in creation),
        number_op=_freeze(N.astype(complex)),
        parity=_freeze(parity),
        even_proj=_freeze(even),
        odd_proj=_freeze(np.eye(dim, dtype=complex) - even),
    )


def build_frame(d: int) -> CliffordFrame:
    """Standard frame: c_k e_S = ±e_{S∪{k}} for k ∉ S, and 0 otherwise."""
    _check_dim(d)
    dim = 1 << d
    creation = []
    for k in range(1, d + 1):
        bit = 1 << (k - 1)
        c = np.zeros((dim, dim), dtype=complex)
        for s in range(dim):
            if not s & bit:
                c[s | bit, s] = creation_sign(k, s)
        creation.append(c)
    return _frame_from_creation(d, creation)


def dual_frame(frame: CliffordFrame) -> CliffordFrame:
    """Frame whose creators are the annihilators c_k^* of ``frame``.

    Its number operator is d·1 - N, so its gauge group is λ^d Γ(λ^{-1}).
    """
    return _frame_from_creation(frame.d, [c.conj().T for c in frame.creation])


def _as_vector(frame: CliffordFrame, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (frame.d,):
        raise ValueError(f"expected a complex {frame.d}-vector, got shape {z.shape}")
    return z


def creation_map(frame: CliffordFrame, z) -> np.ndarray:
    """C(z) = Σ z_k c_k (complex-linear in z)."""
    z = _as_vector(frame, z)
    return sum(zk * c for zk, c in zip(z, frame.creation))


def clifford_R(frame: CliffordFrame, z) -> np.ndarray:
    """Real-linear Clifford map R(z) = C(z) + C(z)^*, with R(z)^2 = |z|^2."""
    C = creation_map(frame, z)
    return C + C.conj().T


def complexify(frame: CliffordFrame, R: Callable | None = None) -> Callable:
    """Recover the complex-linear C from a real-linear Clifford map R.

    Returns ``z -> (R(z) - i R(iz)) / 2``.  ``R`` defaults to the frame's own
    Clifford map.
    """
    if R is None:
        def R(z):
            return clifford_R(frame, z)

    def C(z):
        z = _as_vector(frame, z)
        return 0.5 * (R(z) - 1j * R(1j * z))

    return C


def gauge_unitary(frame: CliffordFrame, lam: complex) -> np.ndarray:
    """Γ(λ) = λ^N, diagonal."""
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError(f"gauge parameter must have unit modulus, got |λ|={abs(lam)}")
    return np.diag(lam ** frame.number_levels.astype(float))


def car_residuals(frame: CliffordFrame) -> float:
    """Largest entrywise defect in the canonical anticommutation relations."""
    cs = frame.creation
    eye = np.eye(frame.dim)
    worst = 0.0
    for j, cj in enumerate(cs):
        for k, ck in enumerate(cs):
            anti = ck @ cj + cj @ ck
            mixed = ck.conj().T @ cj + cj @ ck.conj().T - (eye if j == k else 0)
            worst = max(worst, np.abs(anti).max(), np.abs(mixed).max())
    return float(worst)


def hodge_intertwiner(frame: CliffordFrame) -> np.ndarray:
    """Unitary U with U c_k U^* = c_k^*, normalised so that U e_∅ = e_{1..d}.

    Column S is c_{i1}^* ... c_{im}^* e_{1..d} for S = {i1 < ... < im},
    mirroring e_S = c_{i1} ... c_{im} e_∅.
    """
    dim = frame.dim
    full = np.zeros(dim, dtype=complex)
    full[dim - 1] = 1.0
    U = np.zeros((dim, dim), dtype=complex)
    for s in range(dim):
        v = full
        for k in reversed(MultiIndex(s, frame.d).modes):
            v = frame.annihilation(k) @ v
        U[:, s] = v
    return U
