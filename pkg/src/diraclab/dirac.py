"""Koszul/Dirac assembly for commuting tuples and its inverse.

Tensor convention throughout: H ⊗ Λ C^d is ordered H-index major, exterior
index minor, i.e. ``np.kron(T, c)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exterior import (
    CliffordFrame,
    build_frame,
    clifford_R,
    dual_frame,
    gauge_unitary,
    hodge_intertwiner,
)

DEFAULT_COMM_TOL = 1e-10
D2_PROBES = (1j, np.exp(1j * np.pi / 3), np.exp(1j))


class NonCommutingError(ValueError):
    def __init__(self, message, commutator_norm):
        super().__init__(message)
        self.commutator_norm = commutator_norm


class DiracAxiomError(ValueError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
        self.residual = report.worst


class NotStandardPositionError(ValueError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def max_norm(A) -> float:
    A = np.asarray(A)
    return float(np.abs(A).max()) if A.size else 0.0


def commutator_defect(matrices) -> float:
    worst = 0.0
    for i in range(len(matrices)):
        for j in range(i + 1, len(matrices)):
            Ti, Tj = matrices[i], matrices[j]
            worst = max(worst, max_norm(Ti @ Tj - Tj @ Ti))
    return worst


@dataclass(frozen=True, eq=False)
class CommutingTuple:
    """d pairwise commuting n×n complex matrices, validated on construction."""

    matrices: tuple[np.ndarray, ...]
    comm_tol: float = DEFAULT_COMM_TOL
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        mats = tuple(np.array(T, dtype=complex) for T in self.matrices)
        if not mats:
            raise ValueError("a tuple needs at least one operator")
        n = mats[0].shape[0]
        for T in mats:
            if T.shape != (n, n):
                raise ValueError(f"all operators must be {n}x{n}, got {T.shape}")
            if not np.all(np.isfinite(T)):
                raise ValueError("matrix entries must be finite")
            T.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        if self.check:
            defect = commutator_defect(mats)
            bound = self.comm_tol * (1.0 + self.scale) ** 2
            if defect > bound:
                raise NonCommutingError(
                    f"operators do not commute: max commutator entry {defect:.3e} > {bound:.3e}",
                    defect,
                )

    @property
    def d(self) -> int:
        return len(self.matrices)

    @property
    def n(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def scale(self) -> float:
        return max(max_norm(T) for T in self.matrices)

    def translate(self, lam) -> "CommutingTuple":
        lam = np.asarray(lam, dtype=complex).reshape(-1)
        if lam.shape != (self.d,):
            raise ValueError(f"expected a {self.d}-vector, got shape {lam.shape}")
        eye = np.eye(self.n)
        return CommutingTuple(
            tuple(T - l * eye for T, l in zip(self.matrices, lam)), self.comm_tol, self.check
        )

    def adjoint(self) -> "CommutingTuple":
        return CommutingTuple(tuple(T.conj().T for T in self.matrices), self.comm_tol, self.check)


def as_tuple(t, check: bool = True) -> CommutingTuple:
    if isinstance(t, CommutingTuple):
        return t
    return CommutingTuple(tuple(t), check=check)


@dataclass(frozen=True, eq=False)
class DiracPair:
    """Self-adjoint D on H ⊗ Λ C^d with the Clifford frame acting as 1 ⊗ c_k."""

    D: np.ndarray
    frame: CliffordFrame
    sa_tol: float = 1e-10

    def __post_init__(self):
        D = np.array(self.D, dtype=complex)
        dim = self.frame.dim
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] % dim:
            raise ValueError(f"D must be square with size a multiple of 2^d = {dim}, got {D.shape}")
        D.setflags(write=False)
        object.__setattr__(self, "D", D)

    @classmethod
    def from_matrix(cls, D, d: int, sa_tol: float = 1e-10) -> "DiracPair":
        return cls(D, build_frame(d), sa_tol)

    @property
    def d(self) -> int:
        return self.frame.d

    @property
    def n(self) -> int:
        return self.D.shape[0] // self.frame.dim

    def lift(self, A) -> np.ndarray:
        """1_H ⊗ A for an operator A on the exterior algebra."""
        return np.kron(np.eye(self.n), A)

    def C(self, k: int) -> np.ndarray:
        return self.lift(self.frame.creation[k - 1])

    def R(self, z) -> np.ndarray:
        return self.lift(clifford_R(self.frame, z))

    def gamma(self, lam) -> np.ndarray:
        return self.lift(gauge_unitary(self.frame, lam))

    @property
    def parity(self) -> np.ndarray:
        return self.lift(self.frame.parity)

    @cached_property
    def levels(self) -> np.ndarray:
        """Gauge level (form degree for the standard frame) of each basis vector."""
        return np.tile(self.frame.number_levels, self.n)

    @cached_property
    def gauge_projections(self) -> tuple[np.ndarray, ...]:
        """E_0..E_d, spectral projections of the gauge group."""
        return tuple(np.diag((self.levels == m).astype(complex)) for m in range(self.d + 1))

    def self_adjoint_residual(self) -> float:
        return max_norm(self.D - self.D.conj().T)


def _mats(t, check):
    return as_tuple(t, check).matrices


def coboundary(t, *, check: bool = True) -> np.ndarray:
    """B = Σ T_k ⊗ c_k on H ⊗ Λ C^d; raises form degree by one."""
    mats = _mats(t, check)
    frame = build_frame(len(mats))
    return sum(np.kron(T, c) for T, c in zip(mats, frame.creation))


def homology_boundary(t, *, check: bool = True) -> np.ndarray:
    """B̃ = Σ T_k ⊗ c_k^*; lowers form degree by one."""
    mats = _mats(t, check)
    frame = build_frame(len(mats))
    return sum(np.kron(T, c.conj().T) for T, c in zip(mats, frame.creation))


def assemble_dirac(t, *, check: bool = True, sa_tol: float = 1e-10) -> DiracPair:
    """Dirac operator D = B + B^* of a commuting tuple."""
    B = coboundary(t, check=check)
    return DiracPair(B + B.conj().T, build_frame(len(_mats(t, check))), sa_tol)


def translated_dirac(pair: DiracPair, lam) -> np.ndarray:
    """D - R(λ), the Dirac operator of the translated tuple (T_k - λ_k)."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if lam.shape != (pair.d,):
        raise ValueError(f"expected a {pair.d}-vector, got shape {lam.shape}")
    return pair.D - pair.R(lam)


@dataclass(frozen=True)
class AxiomReport:
    d1: float
    d2: float
    d3: float
    self_adjoint: float
    tol: float

    @property
    def worst(self) -> float:
        return max(self.d1, self.d2, self.d3, self.self_adjoint)

    @property
    def passed(self) -> bool:
        return self.worst < self.tol


def default_axiom_tol(pair: DiracPair) -> float:
    return 1e-9 * (1.0 + max_norm(pair.D))


def axiom_check(pair: DiracPair, axiom_tol: float | None = None) -> AxiomReport:
    """Residuals of the three Dirac axioms plus self-adjointness.

    (D3) is tested against the generators 1⊗c_j, 1⊗c_j^* of the Clifford
    algebra, for R evaluated at every real basis direction e_k and i·e_k.
    """
    D = pair.D
    tol = default_axiom_tol(pair) if axiom_tol is None else axiom_tol
    P = pair.parity
    d1 = max_norm(P @ D @ P.conj().T + D)

    D2 = D @ D
    d2 = 0.0
    for lam in D2_PROBES:
        G = pair.gamma(lam)
        d2 = max(d2, max_norm(G @ D2 @ G.conj().T - D2))

    gens = [pair.C(j) for j in range(1, pair.d + 1)]
    gens += [g.conj().T for g in gens]
    d3 = 0.0
    eye = np.eye(pair.d)
    for k in range(pair.d):
        for direction in (eye[k], 1j * eye[k]):
            R = pair.R(direction)
            A = R @ D + D @ R
            for g in gens:
                d3 = max(d3, max_norm(A @ g - g @ A))
    return AxiomReport(d1, d2, d3, pair.self_adjoint_residual(), tol)


def gauge_fourier_component(pair: DiracPair, X, m: int) -> np.ndarray:
    """m-th Fourier coefficient of λ ↦ Γ(λ) X Γ(λ)^*.

    Averages λ^{-m} Γ(λ) X Γ(λ)^* over the (2d+1)-th roots of unity, which
    resolves every mode in -d..d without aliasing.
    """
    N = 2 * pair.d + 1
    acc = np.zeros_like(np.asarray(X, dtype=complex))
    for lam in np.exp(2j * np.pi * np.arange(N) / N):
        G = pair.gamma(lam)
        acc += lam ** (-m) * (G @ X @ G.conj().T)
    return acc / N


def _tensor_factor(A, n: int, dim: int):
    """Best X with A ≈ X ⊗ 1, by averaging diagonal blocks; plus off-pattern residual."""
    blocks = A.reshape(n, dim, n, dim)
    X = np.einsum("iaja->ij", blocks) / dim
    return X, max_norm(A - np.kron(X, np.eye(dim)))


def reconstruct_tuple(pair: DiracPair, axiom_tol: float | None = None,
                      comm_tol: float = DEFAULT_COMM_TOL) -> CommutingTuple:
    """Recover the commuting tuple from a Dirac pair in standard position.

    T_k is read off from C_k^* D + D C_k^* = T_k ⊗ 1.
    """
    report = axiom_check(pair, axiom_tol)
    if not report.passed:
        raise DiracAxiomError(
            f"Dirac axioms fail: worst residual {report.worst:.3e} >= {report.tol:.3e}", report
        )
    mats = []
    for k in range(1, pair.d + 1):
        Ck_star = pair.C(k).conj().T
        X, resid = _tensor_factor(Ck_star @ pair.D + pair.D @ Ck_star, pair.n, pair.frame.dim)
        if resid > report.tol:
            raise NotStandardPositionError(
                f"not a Dirac operator in standard position: mode {k} off-pattern residual {resid:.3e}",
                resid,
            )
        mats.append(X)
    t = CommutingTuple(tuple(mats), comm_tol)
    B = sum(np.kron(T, c) for T, c in zip(t.matrices, pair.frame.creation))
    rebuilt = B + B.conj().T
    if max_norm(rebuilt - pair.D) > 1e-10 * (1.0 + max_norm(pair.D)):
        raise NotStandardPositionError(
            "reconstructed tuple does not reproduce D", max_norm(rebuilt - pair.D)
        )
    return t


def extract_coboundary(pair: DiracPair, axiom_tol: float | None = None) -> np.ndarray:
    """B = Σ_n E_{n+1} D E_n, computed from the gauge levels alone."""
    report = axiom_check(pair, axiom_tol)
    if not report.passed:
        raise DiracAxiomError(
            f"Dirac axioms fail: worst residual {report.worst:.3e} >= {report.tol:.3e}", report
        )
    lv = pair.levels
    mask = lv[:, None] == lv[None, :] + 1
    return np.where(mask, pair.D, 0)


@dataclass(frozen=True, eq=False)
class DualityResult:
    pair_tilde: DiracPair
    W: np.ndarray


def duality_transport(pair: DiracPair) -> DualityResult:
    """Move a pair to its homological picture via W = 1 ⊗ U.

    The transported pair carries the dual frame (creators c_k^*), so its
    gauge projections satisfy Ẽ_n = E_{d-n}.
    """
    W = pair.lift(hodge_intertwiner(pair.frame))
    D_tilde = W @ pair.D @ W.conj().T
    return DualityResult(DiracPair(D_tilde, dual_frame(pair.frame), pair.sa_tol), W)
