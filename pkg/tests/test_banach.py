import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fixlab.banach import LpSpace, continuity_probe, sample_ball

P_VALUES = (1.5, 2.0, 3.0, 4.0)


def test_norm_examples():
    assert LpSpace(2, 2.0).norm([3.0, 4.0]) == 5.0
    assert LpSpace(2, 3.0).norm([0.0, 0.0]) == 0.0
    assert LpSpace(2, 3.0).norm([1.0, 1.0]) == pytest.approx(2 ** (1 / 3), rel=1e-15)


def test_pairing_examples():
    sp = LpSpace(2, 3.0)
    assert sp.pairing([1.0, 2.0], [3.0, 4.0]) == 11.0
    assert sp.pairing([0.0, 0.0], [5.0, -7.0]) == 0.0
    x = np.array([1.0, 1.0])
    assert sp.pairing(x, sp.duality_map(x)) == pytest.approx(2 ** (2 / 3), rel=1e-14)


def test_duality_map_examples():
    np.testing.assert_array_equal(LpSpace(2, 2.0).duality_map([3.0, 4.0]), [3.0, 4.0])
    np.testing.assert_array_equal(LpSpace(2, 3.0).duality_map([0.0, 0.0]), [0.0, 0.0])
    j = LpSpace(2, 3.0).duality_map([1.0, 1.0])
    np.testing.assert_allclose(j, [2 ** (-1 / 3)] * 2, rtol=1e-15)


def test_generalized_duality_examples():
    sp = LpSpace(2, 2.0)
    j3 = sp.generalized_duality_map([3.0, 4.0], 3.0)
    np.testing.assert_allclose(j3, [15.0, 20.0], rtol=1e-15)
    assert sp.pairing([3.0, 4.0], j3) == pytest.approx(125.0, rel=1e-15)
    np.testing.assert_array_equal(sp.generalized_duality_map([0.0, 0.0], 2.5), [0.0, 0.0])
    with pytest.raises(ValueError):
        sp.generalized_duality_map([1.0, 0.0], 1.0)


@pytest.mark.parametrize("p", [1.0, math.inf, 0.5, math.nan])
def test_rejects_non_smooth_exponents(p):
    with pytest.raises(ValueError, match="uniformly smooth"):
        LpSpace(2, p)


def test_dual_exponent_and_element_validation():
    sp = LpSpace(3, 3.0)
    assert 1 / sp.p + 1 / sp.q == pytest.approx(1.0, abs=1e-15)
    assert sp.dual.p == pytest.approx(1.5)
    with pytest.raises(ValueError):
        sp.element([1.0, 2.0])
    with pytest.raises(ValueError):
        sp.element([1.0, np.nan, 0.0])
    with pytest.raises(ValueError, match="dimension mismatch"):
        sp.norm([1.0, 2.0])


@pytest.mark.parametrize("p", P_VALUES)
@pytest.mark.parametrize("d", [2, 10])
def test_duality_identities_seeded(p, d):
    sp = LpSpace(d, p)
    rng = np.random.default_rng(7)
    x = rng.standard_normal((10_000, d)) * 10.0 ** rng.uniform(-3, 3, (10_000, 1))
    j = sp.duality_map(x)
    nx = sp.norm(x)
    assert np.all(np.abs(sp.pairing(x, j) - nx**2) <= 1e-10 * np.maximum(1, nx**2))
    assert np.all(np.abs(sp.dual_norm(j) - nx) <= 1e-10 * np.maximum(1, nx))


vectors = arrays(np.float64, 4, elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(x=vectors, p=st.sampled_from(P_VALUES), lam=st.floats(1e-3, 1e3))
def test_duality_homogeneity_and_oddness(x, p, lam):
    sp = LpSpace(4, p)
    j = sp.duality_map(x)
    np.testing.assert_array_equal(sp.duality_map(-x), -j)
    np.testing.assert_allclose(sp.duality_map(lam * x), lam * j, rtol=1e-12, atol=1e-300)


@settings(max_examples=200, deadline=None)
@given(x=vectors, p=st.sampled_from(P_VALUES))
def test_gauge_two_is_bitwise_duality_map(x, p):
    sp = LpSpace(4, p)
    assert np.array_equal(sp.generalized_duality_map(x, 2.0), sp.duality_map(x))


def test_batch_matches_single():
    sp = LpSpace(3, 3.0)
    x = np.random.default_rng(0).standard_normal((5, 3))
    for row, j, n in zip(x, sp.duality_map(x), sp.norm(x)):
        np.testing.assert_allclose(sp.duality_map(row), j, rtol=1e-15)
        assert sp.norm(row) == pytest.approx(n, rel=1e-15)


def test_sample_ball_radius():
    sp = LpSpace(3, 1.5)
    pts = sample_ball(sp, np.random.default_rng(0), 1000, 2.0, center=[1.0, 0.0, 0.0])
    assert np.all(sp.norm(pts - np.array([1.0, 0.0, 0.0])) <= 2.0 + 1e-12)


def test_continuity_probe_examples():
    sp2 = LpSpace(2, 2.0)
    for delta in (1e-3, 0.1, 0.5):
        assert continuity_probe(sp2, 3.0, delta, 500, 0) <= delta + 1e-12
    sp3 = LpSpace(2, 3.0)
    assert continuity_probe(sp3, 1.0, 0.01, 500, 0) <= continuity_probe(sp3, 1.0, 0.1, 500, 0)
    assert continuity_probe(sp3, 1.0, 0.0, 500, 0) == 0.0


@settings(max_examples=30, deadline=None)
@given(d1=st.floats(0, 1), d2=st.floats(0, 1), seed=st.integers(0, 100))
def test_continuity_probe_monotone(d1, d2, seed):
    lo, hi = sorted((d1, d2))
    sp = LpSpace(3, 4.0)
    assert continuity_probe(sp, 1.0, lo, 64, seed) <= continuity_probe(sp, 1.0, hi, 64, seed)
