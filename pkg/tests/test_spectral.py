import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diraclab.dirac import CommutingTuple, assemble_dirac, max_norm
from diraclab.samples import KINDS, random_commuting_tuple, triangularizable_tuple
from diraclab.spectral import (
    betti_numbers,
    clifford_scan,
    euler_number,
    fredholm_report,
    grid_points,
    is_taylor_invertible,
    joint_eigenvalue_candidates,
    numerical_kernel,
    numerical_rank,
    solve_linear,
    taylor_spectrum,
)


def ct(*mats):
    return CommutingTuple(tuple(np.asarray(m, dtype=complex) for m in mats))


def jordan(n, lam=0.0):
    return lam * np.eye(n) + np.eye(n, k=1)


def as_set(points):
    return sorted(tuple(np.round(p, 6)) for p in points)


def test_numerical_kernel_examples():
    assert numerical_kernel(np.zeros((3, 3))).dimension == 3
    assert numerical_kernel(np.eye(3)).dimension == 0
    res = numerical_kernel(np.diag([1.0, 1e-14]))
    assert res.dimension == 1
    assert abs(abs(res.basis[1, 0]) - 1) < 1e-14
    assert numerical_kernel(np.diag([1.0, 1e-6])).dimension == 0
    assert numerical_rank(np.ones((2, 3))) == 1
    assert numerical_kernel(np.ones((2, 3))).dimension == 2


def test_kernel_ref_scale_floor():
    noise = 1e-17 * np.ones((3, 3))
    assert numerical_rank(noise) == 1
    assert numerical_rank(noise, ref_scale=1.0) == 0


def test_kernel_flags_borderline_values():
    assert numerical_kernel(np.diag([1.0, 5e-9])).unstable
    assert not numerical_kernel(np.diag([1.0, 1e-3])).unstable


def test_invertibility_examples():
    ok, lam = is_taylor_invertible(ct([[1.0]]))
    assert ok and abs(lam - 1) < 1e-14
    ok, lam = is_taylor_invertible(ct([[0.0]]))
    assert not ok and lam == 0
    assert not is_taylor_invertible(ct(jordan(2)))[0]
    assert is_taylor_invertible(ct(np.diag([1.0, 2.0]), np.diag([0.0, 3.0])))[0]
    assert not is_taylor_invertible(ct(np.diag([1.0, 0.0]), np.diag([2.0, 0.0])))[0]


def test_candidates_examples():
    got = joint_eigenvalue_candidates(ct(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])))
    assert as_set(got) == [(1, 3), (2, 4)]
    got = joint_eigenvalue_candidates(ct(jordan(3)))
    assert len(got) == 1 and abs(got[0][0]) < 1e-12
    A = np.array([[1.0, 1.0], [0.0, 2.0]])
    got = joint_eigenvalue_candidates(ct(A, A @ A))
    assert as_set(got) == [(1, 1), (2, 4)]


def test_spectrum_examples():
    rep = taylor_spectrum(ct(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])))
    assert as_set(rep.verified) == [(1, 3), (2, 4)]
    assert rep.contains([1, 3], 1e-9) and not rep.contains([1, 4], 1e-9)
    rep = taylor_spectrum(ct(jordan(2, 5.0)))
    assert as_set(rep.verified) == [(5,)]
    rep = taylor_spectrum(ct(2 * np.eye(3), -1j * np.eye(3)))
    assert as_set(rep.verified) == [(2, -1j)]
    assert rep.grid_min is not None and rep.grid_min >= 0


def test_spectrum_matches_joint_diagonal(rng):
    for _ in range(10):
        t, joint = triangularizable_tuple(rng, int(rng.integers(1, 6)), int(rng.integers(1, 4)))
        rep = taylor_spectrum(t)
        assert len(rep.verified) == len(joint)
        for v in joint:
            assert rep.contains(v, rep.tol + 1e-7 * (1 + t.scale))


def test_translation_covariance(rng):
    t, joint = triangularizable_tuple(rng, 4, 2)
    base = taylor_spectrum(t)
    for _ in range(5):
        lam = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        shifted = taylor_spectrum(t.translate(lam))
        assert len(shifted.verified) == len(base.verified)
        for v in base.verified:
            assert shifted.contains(v - lam, 1e-6)


def test_scan_examples():
    pair = assemble_dirac(ct([[1.0]]))
    res = clifford_scan(pair, points=[[1.0], [0.0]])
    assert res.sigma_min[0] < 1e-12
    assert abs(res.sigma_min[1] - 1) < 1e-12
    grid = [(0.0, 2.0, 3), (-1.0, 1.0, 3)]
    res = clifford_scan(pair, grid=grid)
    rows = {(p[0].real, p[0].imag): s for p, s in zip(res.points, res.sigma_min)}
    assert rows[(1.0, 0.0)] < 1e-12
    assert len(rows) == 9


def test_scan_parallel_matches_serial(rng):
    pair = assemble_dirac(random_commuting_tuple(rng, 2, 2))
    grid = [(-1, 1, 3)] * 4
    a = clifford_scan(pair, grid=grid)
    b = clifford_scan(pair, grid=grid, workers=4)
    assert np.array_equal(a.sigma_min, b.sigma_min)


def test_scan_tsv():
    pair = assemble_dirac(ct([[1.0]]))
    text = clifford_scan(pair, points=[[1 + 0.5j]]).to_tsv()
    lines = text.splitlines()
    assert lines[0] == "# re(l1)\tim(l1)\tsigma_min"
    assert lines[1].split("\t")[:2] == ["1", "0.5"]
    empty = clifford_scan(pair, grid=[(0, 1, 0), (0, 1, 2)]).to_tsv()
    assert empty.splitlines() == ["# re(l1)\tim(l1)\tsigma_min"]


def test_scan_argument_errors(rng):
    pair3 = assemble_dirac(random_commuting_tuple(rng, 1, 3))
    with pytest.raises(ValueError):
        clifford_scan(pair3, grid=[(0, 1, 2)] * 6)
    with pytest.raises(ValueError):
        clifford_scan(pair3)
    with pytest.raises(ValueError):
        grid_points(2, [(0, 1, 2)] * 3)
    with pytest.raises(ValueError):
        grid_points(2, [(0, 1, 1000)] * 4)


def test_betti_examples():
    b = betti_numbers(ct(jordan(2)))
    assert b.betti == (1, 1) and b.harmonic == (1, 1)
    b = betti_numbers(ct(np.zeros((1, 1)), np.zeros((1, 1))))
    assert b.betti == (1, 2, 1)
    assert euler_number(ct(np.zeros((1, 1)), np.zeros((1, 1)))) == 0
    assert betti_numbers(ct([[3.0]])).betti == (0, 0)


def test_fredholm_examples():
    f = fredholm_report(ct(jordan(2)))
    assert (f.dim_ker_plus, f.dim_ker_minus) == (1, 1)
    f = fredholm_report(ct(np.zeros((1, 1)), np.zeros((1, 1))))
    assert (f.dim_ker_plus, f.dim_ker_minus) == (2, 2) and f.index == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 4), st.sampled_from(KINDS))
def test_finite_dimensional_laws(seed, n, d, kind):
    t = random_commuting_tuple(np.random.default_rng(seed), n, d, kind)
    b = betti_numbers(t)
    assert b.euler == 0
    assert b.betti == b.harmonic
    assert fredholm_report(t).index == 0


def test_solve_identity_pair():
    t = ct([[1.0]], [[1.0]])
    res = solve_linear(t, [2.0])
    assert res.solvable
    assert max_norm(res.x.ravel() - [1, 1]) < 1e-12
    assert res.perturbation_dim == 1
    assert res.exact_at_omega1 == (betti_numbers(t).betti[1] == 0)


def test_solve_unsolvable_and_d1():
    res = solve_linear(ct([[1.0, 0.0], [0.0, 0.0]]), [0.0, 1.0])
    assert not res.solvable
    assert res.residual == pytest.approx(1.0)
    res = solve_linear(ct([[2.0]]), [4.0])
    assert res.solvable and abs(res.x[0, 0] - 2) < 1e-14 and res.perturbation_dim == 0
    with pytest.raises(ValueError):
        solve_linear(ct([[1.0]]), [1.0, 2.0])


def test_solve_minimal_norm(rng):
    for _ in range(10):
        t = random_commuting_tuple(rng, 3, 2)
        y = rng.standard_normal(3)
        res = solve_linear(t, y)
        A = np.hstack(t.matrices)
        assert res.solvable
        x = res.x.ravel()
        assert np.linalg.norm(A @ x - y) < 1e-10
        assert max_norm(x - np.linalg.pinv(A) @ y) < 1e-10
