import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from focklab.summing import (LP_GRID, RademacherDraw, VectorSequence, bounds_to_csv,
                             conjugate_exponent, kappa, khintchine_ratio,
                             khintchine_upper_constant, pi2_hilbert_schmidt, pi_r_lower_bound,
                             rademacher_moment, rademacher_test_function, sign_patterns,
                             strong_norm, weak_norm, weak_norm_details, weak_norm_on_witnesses)


@pytest.mark.parametrize("p,r,k,branch", [
    (1.0, 5.0, 2.0, "p_le_2"), (2.0, 1.0, 2.0, "p_le_2"), (4.0, 1.0, 4 / 3, "r_le_pprime"),
    (4.0, 4 / 3, 4 / 3, "r_le_pprime"), (4.0, 3.0, 3.0, "middle"), (4.0, 4.0, 4.0, "middle"),
    (4.0, 9.0, 4.0, "r_ge_p"), (3.0, 1.5, 1.5, "r_le_pprime"),
])
def test_kappa_table(p, r, k, branch):
    kb = kappa(p, r)
    assert kb.kappa == pytest.approx(k)
    assert kb.branch == branch


@settings(max_examples=200, deadline=None)
@given(st.floats(2.0, 8.0), st.floats(1.0, 12.0))
def test_kappa_continuous_in_r(p, r):
    # the branches agree at r = p' and r = p
    eps = 1e-9
    assert abs(kappa(p, r + eps).kappa - kappa(p, r).kappa) < 1e-6


def test_kappa_rejects_small():
    with pytest.raises(ValueError):
        kappa(0.5, 2)


def test_conjugate_exponent():
    assert conjugate_exponent(1) == math.inf
    assert conjugate_exponent(4) == pytest.approx(4 / 3)


def test_weak_exact_for_orthonormal():
    I = VectorSequence(np.eye(4))
    wn = weak_norm_details(I, 2.0)
    assert wn.exact and wn.value == pytest.approx(1.0)
    assert strong_norm(I, 2.0) == pytest.approx(2.0)


def test_weak_le_strong():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    for p in (1.0, 2.0, 3.0):
        seq = VectorSequence(X)
        assert weak_norm(seq, p) <= strong_norm(seq, p) + 1e-10


def test_weak_lp_grid_single_vector():
    w = np.array([0.5, 1.0, 2.0])
    seq = VectorSequence(np.array([[1.0, -2.0, 0.5]]), LP_GRID, 3.0, w)
    assert weak_norm(seq, 2.0) == pytest.approx(seq.norms()[0])


def test_weak_attained_by_witness():
    rng = np.random.default_rng(2)
    w = rng.uniform(0.5, 2, 5)
    seq = VectorSequence(rng.standard_normal((4, 5)), LP_GRID, 3.0, w)
    wn = weak_norm_details(seq, 2.0, seed=3)
    assert weak_norm_on_witnesses(seq, 2.0, wn.witness) == pytest.approx(wn.value, rel=1e-9)
    # the witness lies in the dual unit ball of L^3 (exponent 3/2)
    q = 1.5
    assert (w @ np.abs(wn.witness) ** q) ** (1 / q) == pytest.approx(1.0, rel=1e-9)


def test_weak_hilbert_p1_ascent_matches_bruteforce():
    X = np.array([[1.0, 0.0], [0.6, 0.8], [0.0, 1.0]])
    seq = VectorSequence(X)
    th = np.linspace(0, 2 * np.pi, 20001)
    Y = np.column_stack([np.cos(th), np.sin(th)])
    brute = np.max(np.abs(X @ Y.T).sum(axis=0))
    assert weak_norm(seq, 1.0) == pytest.approx(brute, rel=1e-6)


def test_weak_monotone_in_p_on_witnesses():
    rng = np.random.default_rng(4)
    seq = VectorSequence(rng.standard_normal((5, 3)))
    Y = rng.standard_normal((50, 3))
    Y /= np.linalg.norm(Y, axis=1)[:, None]
    vals = [weak_norm_on_witnesses(seq, p, Y) for p in (1.0, 2.0, 4.0)]
    assert vals[0] >= vals[1] >= vals[2]


def test_empty_sequence():
    e = VectorSequence.empty(3)
    assert strong_norm(e, 2) == 0 and weak_norm(e, 2) == 0 and pi2_hilbert_schmidt(e) == 0


def test_lp_grid_needs_weights():
    with pytest.raises(ValueError):
        VectorSequence(np.ones((2, 2)), LP_GRID, 2.0)


def test_hs_needs_hilbert():
    seq = VectorSequence(np.ones((1, 2)), LP_GRID, 2.0, np.ones(2))
    with pytest.raises(ValueError):
        pi2_hilbert_schmidt(seq)


def test_scale_homogeneity():
    seq = VectorSequence(np.array([[1.0, 2.0], [0.0, 1.0]]))
    assert strong_norm(seq.scale(-3), 2) == pytest.approx(3 * strong_norm(seq, 2))
    assert weak_norm(seq.scale(2j), 2) == pytest.approx(2 * weak_norm(seq, 2))


def test_sign_patterns():
    s = sign_patterns(3, fix_first=True)
    assert s.shape == (4, 3) and np.all(s[:, 0] == 1)
    assert len({tuple(r) for r in sign_patterns(4, fix_first=False)}) == 16


def test_khintchine_closed_forms():
    assert khintchine_ratio([1, 1], 1.0) == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    assert khintchine_ratio([1.0, -0.4, 2.2], 2.0) == pytest.approx(1.0, rel=1e-14)
    assert rademacher_moment([1, 1, 1], 1.0)[0] == pytest.approx(1.5)


def test_khintchine_p1_bounds():
    rng = np.random.default_rng(5)
    for m in range(1, 13):
        c = rng.standard_normal(m)
        assert 1 / math.sqrt(2) - 1e-12 <= khintchine_ratio(c, 1.0) <= 1 + 1e-12


def test_exact_enumeration_large_m_chunked():
    c = np.ones(18)
    # E|sum of 18 signs| = 18 * C(17, 8) / 2^17
    exact = 18 * math.comb(17, 8) / 2 ** 17
    assert rademacher_moment(c, 1.0)[0] == pytest.approx(exact, rel=1e-12)


def test_monte_carlo_within_se():
    c = np.array([1.0, -0.5, 0.25, 2.0, 0.7])
    exact = rademacher_moment(c, 1.0)[0]
    mean, se = rademacher_moment(c, 1.0, RademacherDraw.from_seed(7, 40000, 5))
    assert abs(mean - exact) < 4 * se


def test_monte_carlo_deterministic_for_seed():
    a = RademacherDraw.from_seed(3, 100, 4).signs
    b = RademacherDraw.from_seed(3, 100, 4).signs
    assert np.array_equal(a, b)


def test_khintchine_upper_constant():
    assert khintchine_upper_constant(2.0) == 1.0
    # B_4 = 3^{1/4}
    assert khintchine_upper_constant(4.0) == pytest.approx(3 ** 0.25, rel=1e-12)
    c = np.ones(10)
    assert khintchine_ratio(c, 4.0) <= khintchine_upper_constant(4.0)


def test_pi_lower_bound_le_hs():
    rng = np.random.default_rng(6)
    T = rng.standard_normal((5, 5))
    cols = VectorSequence(T.T)             # T e_m as rows
    hs = pi2_hilbert_schmidt(cols)
    X = rng.standard_normal((7, 5))
    seq = VectorSequence(X @ T.T)
    bound = pi_r_lower_bound(seq, weak_norm(VectorSequence(X), 2.0), 2.0)
    assert bound.value <= hs + 1e-10


def test_rademacher_test_function():
    g = rademacher_test_function([1, 2], [1, -1], [0, 1j])
    assert g(0.0) == pytest.approx(1 - 2 * math.exp(-0.5))
    with pytest.raises(ValueError):
        rademacher_test_function([1], [1, 1], [0, 1])


def test_bounds_csv():
    text = bounds_to_csv([("kernels", 2.0, "lower_bound", 0.5)])
    assert text.splitlines() == ["family_id,r,bound_type,value", "kernels,2.0,lower_bound,0.5"]
