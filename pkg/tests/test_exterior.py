import itertools
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diraclab.exterior import (
    MultiIndex,
    build_frame,
    car_residuals,
    clifford_R,
    complexify,
    creation_sign,
    dual_frame,
    gauge_unitary,
    hodge_intertwiner,
)


def wedge_sign(k, modes):
    """Sign of the permutation sorting [k, *modes] (inversion count)."""
    seq = [k, *sorted(modes)]
    inv = sum(1 for a, b in itertools.combinations(range(len(seq)), 2) if seq[a] > seq[b])
    return -1 if inv % 2 else 1


@pytest.mark.parametrize("k,modes,expected", [(1, (), 1), (2, (1,), -1), (3, (1, 2), 1)])
def test_creation_sign_examples(k, modes, expected):
    d = 3
    S = MultiIndex.from_modes(modes, d)
    assert creation_sign(k, S) == expected
    assert wedge_sign(k, modes) == expected


def test_creation_sign_matches_inversion_oracle():
    d = 5
    for bits in range(1 << d):
        S = MultiIndex(bits, d)
        for k in range(1, d + 1):
            if k not in S:
                assert creation_sign(k, S) == wedge_sign(k, S.modes)


def test_creation_sign_rejects_bad_mode():
    with pytest.raises(ValueError):
        creation_sign(0, MultiIndex(0, 2))
    with pytest.raises(ValueError):
        creation_sign(3, MultiIndex(0, 2))


def test_multiindex_bounds():
    with pytest.raises(ValueError):
        MultiIndex(4, 2)
    with pytest.raises(ValueError):
        MultiIndex(0, 17)
    assert MultiIndex.from_modes((1, 3), 3).bits == 0b101


def test_build_frame_small_cases():
    f1 = build_frame(1)
    assert np.array_equal(f1.creation[0], [[0, 0], [1, 0]])
    f2 = build_frame(2)
    assert np.array_equal(np.diag(f2.number_op).real, [0, 1, 1, 2])
    assert np.array_equal(np.diag(f2.parity).real, [1, -1, -1, 1])


@pytest.mark.parametrize("d", [0, 17])
def test_build_frame_rejects_dimension(d):
    with pytest.raises(ValueError):
        build_frame(d)


def test_frame_action_on_basis():
    d = 4
    f = build_frame(d)
    for k in range(1, d + 1):
        for s in range(1 << d):
            col = f.creation[k - 1][:, s]
            if s >> (k - 1) & 1:
                assert not col.any()
            else:
                target = s | 1 << (k - 1)
                assert col[target] == wedge_sign(k, MultiIndex(s, d).modes)
                assert np.count_nonzero(col) == 1


@pytest.mark.parametrize("d", range(1, 9))
def test_car_relations_exact(d):
    assert car_residuals(build_frame(d)) == 0.0


def test_car_residuals_detects_scaled_mode():
    f = build_frame(2)
    bad = replace(f, creation=(2 * f.creation[0], f.creation[1]))
    # 4 c1*c1 + 4 c1 c1* = 4·1, minus 1
    assert car_residuals(bad) == 3.0
    assert car_residuals(build_frame(1)) == 0.0


def test_number_operator_multiplicities():
    from math import comb
    for d in range(1, 7):
        f = build_frame(d)
        levels = f.number_levels
        for k in range(d + 1):
            assert np.count_nonzero(levels == k) == comb(d, k)
        assert np.array_equal(f.parity, f.even_proj - f.odd_proj)
        assert np.array_equal(f.even_proj + f.odd_proj, np.eye(1 << d))


def test_clifford_R_examples():
    f1 = build_frame(1)
    R = clifford_R(f1, [1])
    assert np.array_equal(R, [[0, 1], [1, 0]])
    assert np.array_equal(R @ R, np.eye(2))
    f2 = build_frame(2)
    assert not clifford_R(f2, [0, 0]).any()
    R = clifford_R(f2, [1j, 0])
    assert np.allclose(R, R.conj().T)
    assert np.array_equal(R @ R, np.eye(4))
    with pytest.raises(ValueError):
        clifford_R(f2, [1, 2, 3])


def test_clifford_square_random(rng):
    f = build_frame(4)
    for _ in range(100):
        z = rng.uniform(size=4) + 1j * rng.uniform(size=4)
        R = clifford_R(f, z)
        assert np.abs(R @ R - np.vdot(z, z).real * np.eye(16)).max() < 1e-12


def test_complexify_recovers_creators():
    f1 = build_frame(1)
    C = complexify(f1)
    assert np.array_equal(C([1]), f1.creation[0])
    f2 = build_frame(2)
    C = complexify(f2)
    assert np.array_equal(C([0, 1]), f2.creation[1])
    z = np.array([0.3 - 0.2j, 1.1j])
    assert np.abs(C(1j * z) - 1j * C(z)).max() < 1e-15


def test_gauge_unitary():
    f = build_frame(2)
    assert np.array_equal(gauge_unitary(f, 1), np.eye(4))
    assert np.array_equal(gauge_unitary(f, -1), np.diag([1, -1, -1, 1]))
    G = gauge_unitary(f, 1j)
    c1 = f.creation[0]
    assert np.abs(G @ c1 @ G.conj().T - 1j * c1).max() < 1e-15
    with pytest.raises(ValueError):
        gauge_unitary(f, 1.1)


@settings(max_examples=50, deadline=None)
@given(theta=st.floats(0, 2 * np.pi),
       z=st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                  min_size=3, max_size=3))
def test_gauge_covariance(theta, z):
    f = build_frame(3)
    lam = np.exp(1j * theta)
    G = gauge_unitary(f, lam)
    lhs = G @ clifford_R(f, z) @ G.conj().T
    assert np.abs(lhs - clifford_R(f, lam * np.array(z))).max() < 1e-12


def test_hodge_intertwiner():
    f1 = build_frame(1)
    assert np.array_equal(hodge_intertwiner(f1), [[0, 1], [1, 0]])
    for d in range(1, 6):
        f = build_frame(d)
        U = hodge_intertwiner(f)
        assert np.abs(U @ U.conj().T - np.eye(1 << d)).max() < 1e-15
        assert U[(1 << d) - 1, 0] == 1
        for c in f.creation:
            assert np.abs(U @ c @ U.conj().T - c.conj().T).max() < 1e-12


def test_dual_frame_number_operator():
    f = build_frame(3)
    g = dual_frame(f)
    assert np.array_equal(g.number_op, 3 * np.eye(8) - f.number_op)
    assert car_residuals(g) == 0.0
