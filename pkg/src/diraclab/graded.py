"""Graded modules over C[z_1..z_d] as degreewise finite-dimensional data.

A module is stored degree by degree: component j is a vector space of
dimension m_j, and z_k acts by a block component_j -> component_{j+1}.  The
Koszul differential preserves the grading, so every cohomology group splits
into small per-degree linear algebra problems.  Degree N (the truncation
degree) has no outgoing blocks and is never trusted.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.linalg

from .exterior import build_frame, degree_indices
from .spectral import DEFAULT_RANK_TOL, numerical_kernel, numerical_rank

MAX_COMPONENT_DIM = 20000
STABILIZATION_WINDOW = 3


class NotCoveredError(ValueError):
    """Input outside the graded cases the engine handles."""


# ---------------------------------------------------------------- monomials

@lru_cache(maxsize=None)
def monomials(d: int, j: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of total degree j, descending lexicographic order."""
    if j < 0:
        return ()
    if d == 1:
        return ((j,),)
    out = []
    for a in range(j, -1, -1):
        out.extend((a,) + rest for rest in monomials(d - 1, j - a))
    return tuple(out)


@lru_cache(maxsize=None)
def _monomial_index(d: int, j: int) -> dict:
    return {m: i for i, m in enumerate(monomials(d, j))}


def n_monomials(d: int, j: int) -> int:
    return math.comb(j + d - 1, d - 1) if j >= 0 else 0


def fock_gram(d: int, j: int) -> np.ndarray:
    """Diagonal Gram matrix ⟨z^α, z^α⟩ = α!/|α|! on degree-j monomials."""
    w = [math.prod(math.factorial(a) for a in alpha) / math.factorial(j)
         for alpha in monomials(d, j)]
    return np.diag(np.array(w, dtype=float))


def _shift_matrix(d: int, j: int, k: int) -> np.ndarray:
    """Multiplication by z_k from degree-j to degree-(j+1) monomials."""
    src = monomials(d, j)
    tgt = _monomial_index(d, j + 1)
    M = np.zeros((len(tgt), len(src)))
    for col, alpha in enumerate(src):
        beta = list(alpha)
        beta[k - 1] += 1
        M[tgt[tuple(beta)], col] = 1.0
    return M


# -------------------------------------------------------------- polynomials

_TERM = re.compile(r"^\s*([^:]+?)\s*:\s*\(([^)]*)\)\s*$")


def parse_polynomial(text: str, d: int) -> dict:
    """Parse ``"coeff:(e1,..,ed)+coeff:(...)"`` into {exponents: coeff}."""
    poly: dict = {}
    for term in filter(None, (t.strip() for t in text.split("+"))):
        m = _TERM.match(term)
        if not m:
            raise ValueError(f"bad monomial term {term!r}; expected coeff:(e1,...,ed)")
        coeff = complex(m.group(1).replace(" ", "").replace("i", "j"))
        exps = tuple(int(e) for e in m.group(2).split(","))
        if len(exps) != d or min(exps) < 0:
            raise ValueError(f"exponent vector {exps} does not fit d={d}")
        poly[exps] = poly.get(exps, 0) + coeff
    return {e: c for e, c in poly.items() if c != 0}


def homogeneous_degree(poly: dict) -> int | None:
    """Degree of a nonzero homogeneous polynomial, None if not homogeneous."""
    degs = {sum(e) for e in poly}
    return degs.pop() if len(degs) == 1 else None


# --------------------------------------------------------------------- spec

@dataclass(frozen=True, eq=False)
class GradedTupleSpec:
    """Graded module truncated at ``max_degree``.

    ``blocks[k-1][j]`` is the action of z_k from component j to j+1;
    ``gram[j]`` is the inner product on component j.
    """

    d: int
    max_degree: int
    component_dims: tuple[int, ...]
    blocks: tuple[tuple[np.ndarray, ...], ...]
    gram: tuple[np.ndarray, ...] | None = None
    degree_shifts: tuple[int, ...] | None = None
    comm_tol: float = 1e-10

    def __post_init__(self):
        N, dims = self.max_degree, tuple(int(m) for m in self.component_dims)
        object.__setattr__(self, "component_dims", dims)
        if len(dims) != N + 1:
            raise ValueError(f"need {N + 1} component dims, got {len(dims)}")
        if len(self.blocks) != self.d:
            raise ValueError(f"need blocks for {self.d} variables")
        blocks = []
        for k, row in enumerate(self.blocks, 1):
            if len(row) != N:
                raise ValueError(f"z_{k}: need {N} degree blocks, got {len(row)}")
            fixed = []
            for j, T in enumerate(row):
                T = np.asarray(T, dtype=complex).reshape(dims[j + 1], dims[j])
                fixed.append(T)
            blocks.append(tuple(fixed))
        object.__setattr__(self, "blocks", tuple(blocks))
        if self.gram is None:
            object.__setattr__(self, "gram", tuple(np.eye(m) for m in dims))
        else:
            grams = tuple(np.asarray(G, dtype=complex) for G in self.gram)
            for j, G in enumerate(grams):
                if G.shape != (dims[j], dims[j]):
                    raise ValueError(f"gram[{j}] has shape {G.shape}, expected {dims[j]}x{dims[j]}")
                if dims[j] and not np.allclose(G, G.conj().T, atol=1e-12):
                    raise ValueError(f"gram[{j}] is not Hermitian")
            object.__setattr__(self, "gram", grams)
        self._check_commuting()

    def _check_commuting(self):
        for j in range(self.max_degree - 1):
            for k in range(self.d):
                for l in range(k + 1, self.d):
                    a = self.blocks[k][j + 1] @ self.blocks[l][j]
                    b = self.blocks[l][j + 1] @ self.blocks[k][j]
                    if a.size and np.abs(a - b).max() > self.comm_tol * (1 + self.scale) ** 2:
                        raise ValueError(
                            f"blocks z_{k + 1}, z_{l + 1} do not commute at degree {j}"
                        )

    @property
    def scale(self) -> float:
        vals = [np.abs(T).max() for row in self.blocks for T in row if T.size]
        return max(vals, default=0.0)

    @property
    def trusted_max_degree(self) -> int:
        return self.max_degree - 1

    def with_identity_gram(self) -> "GradedTupleSpec":
        return replace(self, gram=None)

    @lru_cache(maxsize=None)
    def _chol(self, j: int) -> np.ndarray:
        if not self.component_dims[j]:
            return np.zeros((0, 0))
        try:
            return np.linalg.cholesky(self.gram[j])
        except np.linalg.LinAlgError:
            raise ValueError(f"gram[{j}] is not positive definite") from None

    def orthonormal_block(self, k: int, j: int) -> np.ndarray:
        """z_k from degree j to j+1 in Gram-orthonormal coordinates."""
        T = self.blocks[k - 1][j]
        if not T.size:
            return T
        Lt, Ls = self._chol(j + 1), self._chol(j)
        return Lt.conj().T @ scipy.linalg.solve_triangular(Ls, T.conj().T, lower=True).conj().T

    __hash__ = object.__hash__


def _component_dims(d: int, shifts, N: int) -> tuple[int, ...]:
    dims = tuple(sum(n_monomials(d, j - s) for s in shifts) for j in range(N + 1))
    if max(dims, default=0) > MAX_COMPONENT_DIM:
        raise ValueError(f"component dimension {max(dims)} exceeds {MAX_COMPONENT_DIM}")
    return dims


def _summand_offsets(d: int, shifts, j: int) -> list[int]:
    offs, acc = [], 0
    for s in shifts:
        offs.append(acc)
        acc += n_monomials(d, j - s)
    return offs


def free_module_spec(d: int, rank: int, max_degree: int, shifts=None,
                     gram: str = "fock") -> GradedTupleSpec:
    """Free module of the given rank; summand i starts in degree ``shifts[i]``."""
    if rank < 1:
        raise ValueError("rank must be at least 1")
    shifts = tuple(shifts) if shifts is not None else (0,) * rank
    if len(shifts) != rank or min(shifts) < 0:
        raise ValueError("need one non-negative shift per summand")
    N = max_degree
    dims = _component_dims(d, shifts, N)
    blocks = []
    for k in range(1, d + 1):
        row = []
        for j in range(N):
            parts = [_shift_matrix(d, j - s, k) if j - s >= 0
                     else np.zeros((n_monomials(d, j + 1 - s), 0)) for s in shifts]
            row.append(scipy.linalg.block_diag(*parts) if parts else np.zeros((0, 0)))
        blocks.append(tuple(row))
    grams = None
    if gram == "fock":
        grams = tuple(
            scipy.linalg.block_diag(*[fock_gram(d, j - s) if j - s >= 0 else np.zeros((0, 0))
                                      for s in shifts])
            for j in range(N + 1)
        )
    elif gram != "identity":
        raise ValueError(f"unknown gram kind {gram!r}")
    return GradedTupleSpec(d, N, dims, tuple(blocks), grams, shifts)


def cyclic_inclusions(d: int, shifts, max_degree: int, generator, degree: int) -> list[np.ndarray]:
    """Inclusion matrices of the submodule generated by one homogeneous vector.

    ``generator[i]`` is a polynomial dict for summand i; ``degree`` is its
    twisted degree.  Column f of the degree-j matrix is (f·g) for monomial f of
    degree j - ``degree``.
    """
    out = []
    for j in range(max_degree + 1):
        offs = _summand_offsets(d, shifts, j)
        total = sum(n_monomials(d, j - s) for s in shifts)
        fs = monomials(d, j - degree)
        M = np.zeros((total, len(fs)), dtype=complex)
        for col, f in enumerate(fs):
            for i, (s, poly) in enumerate(zip(shifts, generator)):
                idx = _monomial_index(d, j - s) if j - s >= 0 else {}
                for e, c in poly.items():
                    prod = tuple(a + b for a, b in zip(f, e))
                    if prod not in idx:
                        raise ValueError("generator is not homogeneous in the twisted grading")
                    M[offs[i] + idx[prod], col] += c
        out.append(M)
    return out


def submodule_spec(ambient: GradedTupleSpec, inclusions, tol: float = 1e-9) -> GradedTupleSpec:
    """Restriction of the ambient action to an invariant graded subspace."""
    N = ambient.max_degree
    dims = tuple(M.shape[1] for M in inclusions)
    blocks = []
    for k in range(ambient.d):
        row = []
        for j in range(N):
            I_src, I_tgt = inclusions[j], inclusions[j + 1]
            image = ambient.blocks[k][j] @ I_src
            if not I_src.shape[1]:
                row.append(np.zeros((I_tgt.shape[1], 0)))
                continue
            if not I_tgt.shape[1]:
                X = np.zeros((0, I_src.shape[1]))
            else:
                X = np.linalg.lstsq(I_tgt, image, rcond=None)[0]
            if np.abs(I_tgt @ X - image).max(initial=0.0) > tol * (1 + np.abs(image).max(initial=0.0)):
                raise ValueError(f"subspace is not invariant under z_{k + 1} at degree {j}")
            row.append(X)
        blocks.append(tuple(row))
    grams = tuple(I.conj().T @ G @ I for I, G in zip(inclusions, ambient.gram))
    return GradedTupleSpec(ambient.d, N, dims, tuple(blocks), grams, None, ambient.comm_tol)


def quotient_spec(ambient: GradedTupleSpec, inclusions) -> GradedTupleSpec:
    """Ambient / submodule, with the Hilbert structure of the orthocomplement.

    Component j is coordinatised by ambient basis vectors complementary to the
    submodule (chosen by pivoted QR); its Gram matrix is that of their
    orthogonal projections onto the complement.
    """
    N = ambient.max_degree
    selectors, inverses, grams, dims = [], [], [], []
    for j in range(N + 1):
        Mb = np.asarray(inclusions[j], dtype=complex)
        amb, m = Mb.shape
        if m:
            _, _, piv = scipy.linalg.qr(Mb.T, pivoting=True, mode="economic")
            pivots = set(piv[:m].tolist())
        else:
            pivots = set()
        keep = [i for i in range(amb) if i not in pivots]
        E = np.eye(amb, dtype=complex)[:, keep]
        K = np.hstack([Mb, E])
        inverses.append(np.linalg.inv(K) if amb else K)
        selectors.append(E)
        G = ambient.gram[j]
        if m:
            P = np.eye(amb) - Mb @ np.linalg.solve(Mb.conj().T @ G @ Mb, Mb.conj().T @ G)
            PE = P @ E
        else:
            PE = E
        grams.append(PE.conj().T @ G @ PE)
        dims.append(len(keep))
    blocks = []
    for k in range(ambient.d):
        row = []
        for j in range(N):
            m_next = inclusions[j + 1].shape[1]
            image = ambient.blocks[k][j] @ selectors[j]
            row.append((inverses[j + 1] @ image)[m_next:, :])
        blocks.append(tuple(row))
    return GradedTupleSpec(ambient.d, N, tuple(dims), tuple(blocks), tuple(grams), None,
                           ambient.comm_tol)


def _dshift_parts(d: int, phis, max_degree: int):
    polys = [parse_polynomial(p, d) if isinstance(p, str) else dict(p) for p in phis]
    degrees = []
    for p in polys:
        if not p:
            degrees.append(None)
            continue
        n = homogeneous_degree(p)
        if n is None:
            raise NotCoveredError(
                "non-homogeneous multiplier: only the graded (homogeneous) case is covered; "
                "the Euler characteristic of non-homogeneous quotients is not classified"
            )
        if n < 1:
            raise ValueError("multipliers must have degree >= 1")
        degrees.append(n)
    # linear independence of {1, φ_1, ..., φ_r}
    support = sorted({e for p in polys for e in p} | {(0,) * d})
    coeffs = np.array([[1.0 if e == (0,) * d else 0.0 for e in support]]
                      + [[p.get(e, 0) for e in support] for p in polys], dtype=complex)
    if np.linalg.matrix_rank(coeffs) < len(polys) + 1:
        raise ValueError("{1, φ_1, ..., φ_r} is linearly dependent; defect rank would drop below r+1")
    n_max = max(degrees)
    if max_degree < n_max + 3:
        raise ValueError(f"max_degree must be at least {n_max + 3}")
    shifts = (n_max,) + tuple(n_max - n for n in degrees)
    ambient = free_module_spec(d, len(polys) + 1, max_degree, shifts)
    generator = [{(0,) * d: 1.0}] + polys
    inclusions = cyclic_inclusions(d, shifts, max_degree, generator, n_max)
    return ambient, inclusions


def dshift_quotient_spec(d: int, r: int, phis, max_degree: int) -> GradedTupleSpec:
    """(r+1)·H² modulo the graph {(f, φ_1 f, ..., φ_r f)}, with the d-shift compressed.

    Summand 0 is shifted up by max n_k and summand k by max n_k - n_k, which
    makes the graph a graded submodule generated in degree max n_k.
    """
    if len(phis) != r:
        raise ValueError(f"expected {r} multipliers, got {len(phis)}")
    if r < 1:
        raise ValueError("r must be at least 1")
    ambient, inclusions = _dshift_parts(d, phis, max_degree)
    q = quotient_spec(ambient, inclusions)
    return replace(q, degree_shifts=ambient.degree_shifts)


# -------------------------------------------------------------- cohomology

@dataclass(frozen=True)
class BettiTable:
    d: int
    max_degree: int
    beta: dict
    harmonic: dict
    window: int = STABILIZATION_WINDOW
    unstable: bool = False

    @property
    def trusted_max_degree(self) -> int:
        return self.max_degree - 1

    def trusted(self):
        return {kj: v for kj, v in self.beta.items() if kj[1] <= self.trusted_max_degree}

    def get(self, k: int, j: int) -> int:
        return self.beta.get((k, j), 0)

    def totals(self) -> tuple[int, ...]:
        """Σ_j β_{k,j} over trusted degrees, per form degree k."""
        tot = [0] * (self.d + 1)
        for (k, _), v in self.trusted().items():
            tot[k] += v
        return tuple(tot)

    @property
    def euler(self) -> int:
        return sum((-1) ** k * v for k, v in enumerate(self.totals()))

    @property
    def stabilized(self) -> bool:
        top = self.trusted_max_degree
        lo = top - self.window + 1
        if lo < 0:
            return False
        return all(v == 0 for (k, j), v in self.beta.items() if lo <= j <= top)

    def to_json(self) -> str:
        return json.dumps({
            "d": self.d,
            "trusted_max_degree": self.trusted_max_degree,
            "beta": [[k, j, v] for (k, j), v in sorted(self.beta.items())],
            "stabilized": self.stabilized,
        })

    @classmethod
    def from_json(cls, text: str, window: int = STABILIZATION_WINDOW) -> "BettiTable":
        obj = json.loads(text)
        beta = {(k, j): v for k, j, v in obj["beta"]}
        return cls(obj["d"], obj["trusted_max_degree"] + 1, beta, {}, window)


def _form_block(spec: GradedTupleSpec, j: int, k: int, orthonormal: bool) -> np.ndarray:
    """Koszul block component_j ⊗ Λ^k -> component_{j+1} ⊗ Λ^{k+1}."""
    d = spec.d
    frame = build_frame(d)
    src, tgt = degree_indices(d, k), degree_indices(d, k + 1)
    m_src = spec.component_dims[j]
    m_tgt = spec.component_dims[j + 1] if j < spec.max_degree else 0
    out = np.zeros((m_tgt * len(tgt), m_src * len(src)), dtype=complex)
    if j >= spec.max_degree or k >= d or not out.size:
        return out
    for l in range(1, d + 1):
        T = spec.orthonormal_block(l, j) if orthonormal else spec.blocks[l - 1][j]
        out += np.kron(T, frame.creation[l - 1][np.ix_(tgt, src)])
    return out


def graded_koszul_betti(spec: GradedTupleSpec, rank_tol: float = DEFAULT_RANK_TOL,
                        window: int = STABILIZATION_WINDOW) -> BettiTable:
    """β_{k,j} = dim ker(out of (k,j)) - rank(into (k,j)), plus harmonic dimensions.

    Blocks are taken in Gram-orthonormal coordinates; the harmonic space at
    (k,j) is ker B ∩ ker B^* there.
    """
    d, N = spec.d, spec.max_degree
    ref = 1.0 + spec.scale
    blocks = {}
    for j in range(N + 1):
        for k in range(d + 1):
            blocks[j, k] = _form_block(spec, j, k, orthonormal=True)
    beta, harmonic, unstable = {}, {}, False
    for j in range(N + 1):
        if not spec.component_dims[j]:
            continue
        for k in range(d + 1):
            out = blocks[j, k]
            ker = numerical_kernel(out, rank_tol, ref)
            unstable |= ker.unstable
            inc = blocks.get((j - 1, k - 1)) if j >= 1 and k >= 1 else None
            rank_in = numerical_rank(inc, rank_tol, ref) if inc is not None else 0
            beta[k, j] = ker.dimension - rank_in
            stacked = out if inc is None else np.vstack([out, inc.conj().T])
            harmonic[k, j] = numerical_kernel(stacked, rank_tol, ref).dimension
    return BettiTable(d, N, beta, harmonic, window, unstable)


@dataclass(frozen=True)
class IndexReport:
    index: int
    stabilized: bool
    window_report: dict
    table: BettiTable

    @property
    def trusted(self) -> bool:
        return self.stabilized

    @property
    def curvature(self) -> int:
        """K = (-1)^d · index, valid for graded pure finite-rank tuples."""
        return (-1) ** self.table.d * self.index


def stabilized_index(spec: GradedTupleSpec, window: int = STABILIZATION_WINDOW,
                     rank_tol: float = DEFAULT_RANK_TOL) -> IndexReport:
    """Even minus odd trusted cohomology, with the trailing-window check."""
    table = graded_koszul_betti(spec, rank_tol, window)
    top = table.trusted_max_degree
    window_report = {j: [table.get(k, j) for k in range(spec.d + 1)]
                     for j in range(max(0, top - window + 1), top + 1)}
    return IndexReport(table.euler, table.stabilized, window_report, table)


def defect_rank(spec: GradedTupleSpec, degrees=None, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank of 1 - Σ T_k T_k^* summed over the chosen degrees."""
    N = spec.max_degree
    degrees = range(N - 1) if degrees is None else degrees
    total = 0
    for j in degrees:
        if j > N - 2 or j < 0:
            raise ValueError(f"degree {j} is at the truncation boundary (max usable {N - 2})")
        m = spec.component_dims[j]
        if not m:
            continue
        delta = np.eye(m, dtype=complex)
        if j >= 1:
            for k in range(1, spec.d + 1):
                T = spec.orthonormal_block(k, j - 1)
                delta -= T @ T.conj().T
        total += numerical_rank(delta, rank_tol, ref_scale=1.0)
    return total


def default_multipliers(d: int, r: int) -> list[dict]:
    """r linearly independent homogeneous monomials of degree 1, then 2."""
    pool = list(monomials(d, 1)) + list(monomials(d, 2))
    if r > len(pool):
        raise ValueError(f"no default multipliers for r={r}, d={d}")
    return [{e: 1.0} for e in pool[:r]]


def euler_characteristic_example(d: int, r: int, phi_kind: str, phis=None,
                                 max_degree: int = 10) -> int:
    """χ of the multiplier-quotient family.

    Homogeneous multipliers give r, cross-checked against the graded index via
    e(M) = (-1)^d χ(M); multipliers with no polynomial graph elements give r+1.
    """
    if phi_kind == "no-polynomial-element":
        return r + 1
    if phi_kind != "homogeneous":
        raise NotCoveredError(f"φ kind {phi_kind!r} is not covered; only homogeneous and "
                              "no-polynomial-element quotients are classified")
    if r == 0:
        spec = free_module_spec(d, 1, max_degree)
        chi = 1
    else:
        phis = default_multipliers(d, r) if phis is None else phis
        spec = dshift_quotient_spec(d, r, phis, max_degree)
        chi = r
    rep = stabilized_index(spec)
    if not rep.stabilized or (-1) ** d * rep.index != chi:
        raise RuntimeError(
            f"index cross-check failed: (-1)^d·index = {(-1) ** d * rep.index}, expected {chi}"
        )
    return chi


@dataclass(frozen=True)
class AdditivityReport:
    e_ambient: int
    e_sub: int
    e_quotient: int
    conclusive: bool

    @property
    def passed(self) -> bool:
        return self.conclusive and self.e_ambient == self.e_sub + self.e_quotient


def euler_additivity_check(ambient: GradedTupleSpec, inclusions,
                           rank_tol: float = DEFAULT_RANK_TOL) -> AdditivityReport:
    """Compare e(ambient) with e(sub) + e(quotient) for a graded inclusion."""
    tables = [graded_koszul_betti(s, rank_tol) for s in
              (ambient, submodule_spec(ambient, inclusions), quotient_spec(ambient, inclusions))]
    return AdditivityReport(*(t.euler for t in tables),
                            conclusive=all(t.stabilized for t in tables))
