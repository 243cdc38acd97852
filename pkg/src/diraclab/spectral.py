"""Taylor invertibility, joint spectrum, Koszul Betti numbers and Fredholm data."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dirac import (
    CommutingTuple,
    DiracPair,
    as_tuple,
    assemble_dirac,
    homology_boundary,
    coboundary,
    max_norm,
    translated_dirac,
)
from .exterior import degree_indices

DEFAULT_RANK_TOL = 1e-9
DEFAULT_SEED = 20000611
MAX_SCAN_POINTS = 10**7


class TriangularizationError(RuntimeError):
    """The tuple could not be simultaneously triangularized to tolerance."""


@dataclass(frozen=True, eq=False)
class KernelResult:
    dimension: int
    basis: np.ndarray
    singular_values: np.ndarray
    threshold: float

    @property
    def rank(self) -> int:
        return self.basis.shape[0] - self.dimension

    @property
    def unstable(self) -> bool:
        """Some singular value sits within a factor 10 of the cut."""
        s = self.singular_values
        if self.threshold == 0 or not s.size:
            return False
        near = (s > self.threshold / 10) & (s < self.threshold * 10)
        return bool(near.any())


def numerical_kernel(M, rank_tol: float = DEFAULT_RANK_TOL, ref_scale: float = 0.0) -> KernelResult:
    """Kernel by SVD; singular values at or below rank_tol·σ_max·max(shape) count as zero.

    ``ref_scale`` puts a floor under σ_max, so that a block which is zero up to
    rounding, inside a larger problem of known scale, is seen as zero.
    """
    M = np.asarray(M, dtype=complex)
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return KernelResult(cols, np.eye(cols, dtype=complex), np.zeros(0), 0.0)
    _, s, Vh = np.linalg.svd(M)
    smax = max(s[0] if s.size else 0.0, ref_scale)
    if smax == 0.0:
        return KernelResult(cols, np.eye(cols, dtype=complex), s, 0.0)
    threshold = rank_tol * smax * max(rows, cols)
    rank = int(np.count_nonzero(s > threshold))
    return KernelResult(cols - rank, Vh[rank:].conj().T, s, threshold)


def numerical_rank(M, rank_tol: float = DEFAULT_RANK_TOL, ref_scale: float = 0.0) -> int:
    M = np.asarray(M)
    if 0 in M.shape:
        return 0
    return numerical_kernel(M, rank_tol, ref_scale).rank


def smallest_singular_value(M) -> float:
    M = np.asarray(M, dtype=complex)
    if 0 in M.shape:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def _dirac_scale(D) -> float:
    return 1.0 + max_norm(D)


def is_taylor_invertible(t, rank_tol: float = DEFAULT_RANK_TOL) -> tuple[bool, float]:
    """Whether D is invertible, with the smallest eigenvalue of D².

    The eigenvalue is taken as σ_min(D)²; the comparison is done on σ_min
    itself, which is accurate to machine precision where λ_min(D²) is not.
    """
    D = assemble_dirac(t).D
    smin = smallest_singular_value(D)
    return bool(smin > rank_tol * _dirac_scale(D)), smin**2


def default_cluster_tol(t: CommutingTuple) -> float:
    return 1e-7 * (1.0 + t.scale)


def _cluster(points: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage clustering under the max-norm; returns cluster means."""
    remaining = list(range(len(points)))
    out = []
    while remaining:
        group = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for i in list(remaining):
                if any(np.abs(points[i] - points[g]).max() <= tol for g in group):
                    group.append(i)
                    remaining.remove(i)
                    grew = True
        out.append(points[group].mean(axis=0))
    return out


def joint_eigenvalue_candidates(t, seed: int = DEFAULT_SEED, cluster_tol: float | None = None,
                                attempts: int = 3) -> list[np.ndarray]:
    """Joint diagonal entries after a simultaneous Schur triangularization.

    A unitary Q triangularizing a random combination Σ γ_k T_k triangularizes
    the whole tuple when the combination separates the joint eigenvalues.
    """
    t = as_tuple(t)
    tol = default_cluster_tol(t) if cluster_tol is None else cluster_tol
    rng = np.random.default_rng(seed)
    bound = 10 * t.comm_tol * (1.0 + t.scale)
    defect = np.inf
    for _ in range(attempts):
        gamma = rng.standard_normal(t.d) + 1j * rng.standard_normal(t.d)
        M = sum(g * T for g, T in zip(gamma, t.matrices))
        _, Q = scipy.linalg.schur(M, output="complex")
        conj = [Q.conj().T @ T @ Q for T in t.matrices]
        defect = max(max_norm(np.tril(A, -1)) for A in conj)
        if defect <= bound:
            diag = np.stack([np.diag(A) for A in conj], axis=1)
            return _cluster(diag, tol)
    raise TriangularizationError(
        f"tuple not numerically commuting: triangularization defect {defect:.3e} > {bound:.3e}"
    )


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    candidates: list
    verified: list
    min_singular: list
    tol: float
    grid_min: float | None = None

    def contains(self, lam, tol: float) -> bool:
        lam = np.asarray(lam, dtype=complex)
        return any(np.abs(v - lam).max() <= tol for v in self.verified)


def _grid_minimum(pair: DiracPair, candidates, steps: int) -> float | None:
    """Coarse bounding-box grid minimum of σ_min(D - R(λ)), as a diagnostic."""
    if steps <= 0 or not candidates:
        return None
    pts = np.array(candidates)
    lo = np.concatenate([pts.real.min(0), pts.imag.min(0)]) - 1.0
    hi = np.concatenate([pts.real.max(0), pts.imag.max(0)]) + 1.0
    axes = [np.linspace(a, b, steps) for a, b in zip(lo, hi)]
    d = pair.d
    best = np.inf
    for x in itertools.product(*axes):
        lam = np.array(x[:d]) + 1j * np.array(x[d:])
        best = min(best, smallest_singular_value(translated_dirac(pair, lam)))
    return float(best)


def taylor_spectrum(t, rank_tol: float = DEFAULT_RANK_TOL, seed: int = DEFAULT_SEED,
                    cluster_tol: float | None = None, grid_steps: int = 3) -> SpectrumReport:
    """Candidate-then-verify Taylor spectrum.

    Candidates come from simultaneous triangularization; a candidate λ is kept
    when D - R(λ) is numerically singular.
    """
    t = as_tuple(t)
    pair = assemble_dirac(t)
    cands = joint_eigenvalue_candidates(t, seed=seed, cluster_tol=cluster_tol)
    tol = rank_tol * _dirac_scale(pair.D)
    sig = [smallest_singular_value(translated_dirac(pair, lam)) for lam in cands]
    verified = [lam for lam, s in zip(cands, sig) if s <= tol]
    return SpectrumReport(cands, verified, sig, tol, _grid_minimum(pair, cands, grid_steps))


@dataclass(frozen=True, eq=False)
class ScanResult:
    points: np.ndarray
    sigma_min: np.ndarray
    dirac_eigenvalues: np.ndarray

    def to_tsv(self) -> str:
        d = self.points.shape[1] if self.points.ndim == 2 else 0
        cols = [f"{p}(l{k + 1})" for k in range(d) for p in ("re", "im")]
        lines = ["# " + "\t".join(cols + ["sigma_min"])]
        for lam, s in zip(self.points, self.sigma_min):
            vals = []
            for z in lam:
                vals += [z.real, z.imag]
            lines.append("\t".join(f"{v:.15g}" for v in vals + [s]))
        return "\n".join(lines) + "\n"


def grid_points(d: int, grid) -> np.ndarray:
    """Points of a real 2d-box grid; axes ordered re(λ1), im(λ1), ..., last fastest."""
    if len(grid) != 2 * d:
        raise ValueError(f"need {2 * d} axis specs for d={d}, got {len(grid)}")
    total = 1
    for _, _, steps in grid:
        total *= int(steps)
    if total > MAX_SCAN_POINTS:
        raise ValueError(f"grid too large: {total} points > {MAX_SCAN_POINTS}")
    axes = [np.linspace(lo, hi, int(steps)) for lo, hi, steps in grid]
    if total == 0:
        return np.zeros((0, d), dtype=complex)
    mesh = np.array(list(itertools.product(*axes)))
    re = mesh[:, 0::2]
    im = mesh[:, 1::2]
    return re + 1j * im


def clifford_scan(pair: DiracPair, grid=None, points=None, workers: int | None = None) -> ScanResult:
    """σ_min(D - R(λ)) over a grid (d ≤ 2) or over an explicit point list."""
    if (grid is None) == (points is None):
        raise ValueError("give exactly one of grid or points")
    if grid is not None:
        if pair.d > 2:
            raise ValueError("full grids are limited to d <= 2; supply explicit points")
        pts = grid_points(pair.d, grid)
    else:
        pts = np.asarray(points, dtype=complex).reshape(-1, pair.d)
        if len(pts) > MAX_SCAN_POINTS:
            raise ValueError(f"too many points: {len(pts)} > {MAX_SCAN_POINTS}")

    def one(lam):
        return smallest_singular_value(translated_dirac(pair, lam))

    if workers and workers > 1 and len(pts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            sig = list(ex.map(one, pts))
    else:
        sig = [one(lam) for lam in pts]
    return ScanResult(pts, np.array(sig, dtype=float), np.linalg.eigvalsh(pair.D))


@dataclass(frozen=True)
class BettiVector:
    betti: tuple[int, ...]
    harmonic: tuple[int, ...]
    unstable: bool = False

    @property
    def euler(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti))


def _degree_blocks(t: CommutingTuple):
    idx = [np.add.outer(np.arange(t.n) * (1 << t.d), degree_indices(t.d, k)).ravel()
           for k in range(t.d + 1)]
    return idx


def betti_numbers(t, rank_tol: float = DEFAULT_RANK_TOL) -> BettiVector:
    """Koszul cohomology dimensions β_k and harmonic dimensions per form degree."""
    t = as_tuple(t)
    B = coboundary(t)
    D = B + B.conj().T
    idx = _degree_blocks(t)
    unstable = False
    ker, rank = [], []
    for k in range(t.d + 1):
        if k < t.d:
            res = numerical_kernel(B[np.ix_(idx[k + 1], idx[k])], rank_tol)
            unstable |= res.unstable
            ker.append(res.dimension)
            rank.append(res.rank)
        else:
            ker.append(len(idx[k]))
            rank.append(0)
    betti = tuple(ker[k] - (rank[k - 1] if k else 0) for k in range(t.d + 1))
    harmonic = []
    for k in range(t.d + 1):
        res = numerical_kernel(D[:, idx[k]], rank_tol)
        unstable |= res.unstable
        harmonic.append(res.dimension)
    return BettiVector(betti, tuple(harmonic), unstable)


def euler_number(t, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    return betti_numbers(t, rank_tol).euler


@dataclass(frozen=True)
class FredholmReport:
    dim_ker_plus: int
    dim_ker_minus: int

    @property
    def index(self) -> int:
        return self.dim_ker_plus - self.dim_ker_minus


def fredholm_report(t, rank_tol: float = DEFAULT_RANK_TOL) -> FredholmReport:
    """Kernel dimensions of D_+ (even → odd) and of its adjoint."""
    pair = assemble_dirac(t)
    even = np.flatnonzero(pair.levels % 2 == 0)
    odd = np.flatnonzero(pair.levels % 2 == 1)
    D_plus = pair.D[np.ix_(odd, even)]
    D_minus = pair.D[np.ix_(even, odd)]
    return FredholmReport(
        numerical_kernel(D_plus, rank_tol).dimension,
        numerical_kernel(D_minus, rank_tol).dimension,
    )


@dataclass(frozen=True, eq=False)
class SolveResult:
    solvable: bool
    x: np.ndarray
    residual: float
    perturbation_dim: int
    kernel_dim: int
    exact_at_omega1: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "exact_at_omega1", self.kernel_dim == self.perturbation_dim)


def solve_linear(t, y, rank_tol: float = DEFAULT_RANK_TOL) -> SolveResult:
    """Minimal-norm solution of T_1 x_1 + ... + T_d x_d = y.

    ``x`` has shape (d, n).  ``perturbation_dim`` is the dimension of the
    tautological perturbations, the image of 2-forms under the homological
    boundary; ``kernel_dim`` is the dimension of all homogeneous solutions.
    """
    t = as_tuple(t)
    y = np.asarray(y, dtype=complex).reshape(-1)
    if y.shape != (t.n,):
        raise ValueError(f"right-hand side must have length {t.n}, got {y.shape[0]}")
    A = np.hstack(t.matrices)
    res = numerical_kernel(A, rank_tol)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    r = res.rank
    x = Vh[:r].conj().T @ ((U[:, :r].conj().T @ y) / s[:r])
    residual = float(np.linalg.norm(A @ x - y))
    scale = 1.0 + max_norm(A)
    solvable = residual <= rank_tol * scale * np.linalg.norm(y)

    if t.d >= 2:
        Bt = homology_boundary(t)
        idx = _degree_blocks(t)
        pdim = numerical_rank(Bt[np.ix_(idx[1], idx[2])], rank_tol)
    else:
        pdim = 0
    return SolveResult(bool(solvable), x.reshape(t.d, t.n), residual, pdim, res.dimension)
