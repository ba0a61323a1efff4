import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fixlab.schedules import (
    Constant,
    Geometric,
    Power,
    Sum,
    Zero,
    from_json,
    predicate_report,
    ratio_limit,
    ratio_tends_to_zero,
)


def test_eval_examples():
    assert Power(1, 1, 1)(5) == pytest.approx(1 / 6, rel=1e-15)
    assert Zero()(12345) == 0.0
    assert Geometric(0.5, 0.5)(3) == 0.0625


def test_predicate_examples():
    assert predicate_report(Power(1, 1, 1)).as_dict()["sum_diverges"] is True
    r = predicate_report(Power(1, 1, 1))
    assert (r.tends_to_zero, r.sum_diverges, r.sum_converges) == (True, True, False)
    r = predicate_report(Power(1, 2, 1))
    assert (r.tends_to_zero, r.sum_diverges, r.sum_converges) == (True, False, True)
    r = predicate_report(Constant(0.3))
    assert (r.tends_to_zero, r.sum_diverges, r.sum_converges) == (False, True, False)
    r = predicate_report(Geometric(1, 0.9))
    assert (r.tends_to_zero, r.sum_converges) == (True, True)
    r = predicate_report(Zero())
    assert (r.tends_to_zero, r.sum_diverges, r.sum_converges) == (True, False, True)


@pytest.mark.parametrize(
    "rho, expected",
    [(0.0, (False, True, False)), (0.5, (True, True, False)), (1.0, (True, True, False)),
     (1.01, (True, False, True)), (2.0, (True, False, True))],
)
def test_p_series_table(rho, expected):
    r = predicate_report(Power(0.5, rho, 1))
    assert (r.tends_to_zero, r.sum_diverges, r.sum_converges) == expected


def test_range_rejected_without_clamp():
    with pytest.raises(ValueError, match="outside"):
        Power(2.0, 1.0, 1)
    with pytest.raises(ValueError):
        Constant(1.5)
    s = Power(2.0, 1.0, 1, clamp=(0.0, 1.0))
    assert s(0) == 1.0 and s(3) == 0.5
    with pytest.raises(ValueError):
        Power(1.0, 1.0, 0)
    with pytest.raises(ValueError):
        Geometric(1.0, 1.0)


def test_clamp_tail():
    # a floor keeps the schedule away from zero: the tail becomes a constant
    s = Power(1.0, 1.0, 1, clamp=(0.1, 1.0))
    r = predicate_report(s)
    assert not r.tends_to_zero and r.sum_diverges


def test_ratio_limits():
    assert ratio_tends_to_zero(Power(1, 2, 1), Power(1, 1, 1))
    assert not ratio_tends_to_zero(Power(1, 1, 1), Power(1, 1, 1))
    assert ratio_tends_to_zero(Geometric(1, 0.5), Power(1, 3, 1))
    assert ratio_tends_to_zero(Zero(), Power(1, 1, 1))
    assert ratio_limit(Power(1, 1, 1), Power(1, 1, 3)) == 0.5
    assert ratio_limit(Power(1, 2, 1), Power(0.5, 1, 1)) == 0.0
    assert np.isnan(ratio_limit(Zero(), Zero()))


def test_sum_schedule():
    s = Sum(Power(0.5, 1, 1), Power(1, 2, 2))
    assert s(0) == 0.75
    np.testing.assert_allclose(s.values(np.arange(5.0)), [s(n) for n in range(5)], rtol=1e-15)
    assert predicate_report(s).sum_diverges


def test_json_round_trip():
    for s in (Power(0.5, 1.5, 3), Constant(0.25), Geometric(0.5, 0.3), Zero(), Power(3, 1, 1, clamp=(0, 1))):
        t = from_json(s.to_json())
        assert t == s
        assert predicate_report(t) == predicate_report(s)


@given(n=st.integers(0, 2**31 - 1), c=st.floats(1e-6, 1), rho=st.floats(0, 3), off=st.integers(1, 10))
def test_eval_total_in_range(n, c, rho, off):
    v = Power(c, rho, off)(n)
    assert 0.0 <= v <= 1.0
    assert Power(c, rho, off)(n) == v


@given(n=st.integers(0, 10_000))
def test_vector_and_scalar_power_agree(n):
    s = Power(0.7, 1.3, 2)
    assert s.values(np.array([float(n)]))[0] == pytest.approx(s(n), rel=1e-15)
