import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carrieralloc.errors import DomainError, InvalidParameterError
from carrieralloc.utility import (Logarithmic, Sigmoidal, inverse_marginal, log_utility,
                                  marginal_log_utility, utility)

mp.mp.dps = 50

REFERENCE_UTILITIES = [Sigmoidal(3, 20), Sigmoidal(1, 30), Sigmoidal(5, 10),
         Logarithmic(3, 100), Logarithmic(0.5, 100), Logarithmic(15, 100)]


# Reference values straight from the unsimplified sigmoid, in 50-digit arithmetic.
def mp_utility(u, r):
    r = mp.mpf(r)
    if isinstance(u, Sigmoidal):
        a, b = mp.mpf(u.a), mp.mpf(u.b)
        c = (1 + mp.e ** (a * b)) / mp.e ** (a * b)
        d = 1 / (1 + mp.e ** (a * b))
        return c * (1 / (1 + mp.e ** (-a * (r - b))) - d)
    return mp.log(1 + u.k * r) / mp.log(1 + u.k * mp.mpf(u.r_max))


def mp_marginal(u, r):
    return mp.diff(lambda x: mp.log(mp_utility(u, x)), mp.mpf(r))


utilities = st.one_of(
    st.builds(Sigmoidal, st.floats(0.1, 10), st.floats(1, 60)),
    st.builds(Logarithmic, st.floats(0.1, 20), st.floats(1, 200)),
)


@pytest.mark.parametrize("u", REFERENCE_UTILITIES, ids=repr)
@pytest.mark.parametrize("r", [0.05, 1.0, 7.5, 10.0, 19.0, 20.0, 31.0, 100.0, 400.0])
def test_against_high_precision(u, r):
    ref_u = mp_utility(u, r)
    assert utility(u, r) == pytest.approx(float(ref_u), rel=1e-12, abs=1e-300)
    assert log_utility(u, r) == pytest.approx(float(mp.log(ref_u)), rel=1e-10, abs=1e-12)
    assert marginal_log_utility(u, r) == pytest.approx(float(mp_marginal(u, r)), rel=1e-8, abs=1e-14)


def test_known_values():
    assert utility(Sigmoidal(5, 10), 0.0) == 0.0
    assert utility(Logarithmic(3, 100), 100.0) == pytest.approx(1.0, abs=1e-15)
    assert utility(Sigmoidal(5, 10), 10.0) == pytest.approx(0.5, abs=1e-9)
    assert log_utility(Logarithmic(3, 100), 100.0) == pytest.approx(0.0, abs=1e-15)
    assert log_utility(Sigmoidal(1, 30), 30.0) == pytest.approx(math.log(0.5), abs=1e-6)
    v = log_utility(Sigmoidal(5, 10), 1000.0)
    assert -1e-6 < v <= 0.0
    assert marginal_log_utility(Logarithmic(0.5, 100), 2.0) == pytest.approx(0.5 / (2 * math.log(2)), abs=1e-5)
    assert marginal_log_utility(Sigmoidal(1, 30), 30.0) == pytest.approx(0.5, abs=1e-6)


def test_inverse_known_values():
    assert inverse_marginal(Logarithmic(0.5, 100), 0.36067, 1000) == pytest.approx(2.0, abs=1e-4)
    assert inverse_marginal(Sigmoidal(1, 30), 0.5, 1000) == pytest.approx(30.0, abs=1e-3)
    for u in REFERENCE_UTILITIES:
        p = 10 * marginal_log_utility(u, 0.001)
        assert inverse_marginal(u, p, 1000) == 0.0


def test_inverse_caps_at_hint():
    u = Logarithmic(3, 100)
    assert inverse_marginal(u, 1e-9, 50.0) == 50.0


def test_large_ab_does_not_overflow():
    u = Sigmoidal(20, 100)  # ab = 2000
    assert u.c == 1.0
    assert u.d == 0.0
    assert utility(u, 100.0) == pytest.approx(0.5)
    assert np.isfinite(log_utility(u, 50.0))
    assert np.isfinite(marginal_log_utility(u, 50.0))


def test_array_inputs():
    r = np.array([1.0, 10.0, 100.0])
    out = utility(Sigmoidal(5, 10), r)
    assert out.shape == (3,)
    assert out[1] == pytest.approx(0.5)


def test_log_utility_beyond_r_max_is_positive():
    assert log_utility(Logarithmic(3, 100), 500.0) > 0


@pytest.mark.parametrize("bad", [0, -1, math.nan, math.inf])
def test_invalid_parameters(bad):
    with pytest.raises(InvalidParameterError):
        Sigmoidal(bad, 10)
    with pytest.raises(InvalidParameterError):
        Logarithmic(1, bad)


def test_domain_errors():
    with pytest.raises(DomainError):
        utility(Sigmoidal(1, 1), -1.0)
    with pytest.raises(DomainError):
        log_utility(Sigmoidal(1, 1), 0.0)
    with pytest.raises(DomainError):
        marginal_log_utility(Logarithmic(1, 1), 0.0)
    with pytest.raises(InvalidParameterError):
        inverse_marginal(Logarithmic(1, 1), 0.0, 10.0)


@settings(max_examples=200, deadline=None)
@given(utilities, st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_monotone_increasing(u, f1, f2):
    lo, hi = sorted((f1, f2))
    r1, r2 = lo * 10 * u.scale, hi * 10 * u.scale
    if r2 - r1 < 1e-6 * r2:
        return
    assert utility(u, r1) < utility(u, r2) or utility(u, r2) == 1.0


@settings(max_examples=200, deadline=None)
@given(utilities, st.floats(1e-2, 500))
def test_derivative_consistency(u, r):
    h = 1e-5 * max(r, 1.0)
    if r - h <= 0:
        return
    fd = (log_utility(u, r + h) - log_utility(u, r - h)) / (2 * h)
    m = marginal_log_utility(u, r)
    assert abs(m - fd) <= 1e-4 * abs(m) + 1e-12


@settings(max_examples=200, deadline=None)
@given(utilities, st.floats(1e-4, 5))
def test_inverse_round_trip(u, p):
    budget = 20 * u.scale
    r = inverse_marginal(u, p, budget)
    if 0 < r < budget:
        assert marginal_log_utility(u, r) == pytest.approx(p, rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.builds(Sigmoidal, st.floats(0.1, 10), st.floats(1, 60)), st.floats(0, 1e6))
def test_sigmoid_bounded(u, r):
    assert utility(u, r) <= 1.0
    if r < u.b + 30 / u.a:
        assert utility(u, r) < 1.0


@settings(max_examples=100, deadline=None)
@given(utilities, st.floats(1e-2, 1e3), st.floats(1e-2, 1e3))
def test_marginal_strictly_decreasing(u, r1, r2):
    lo, hi = sorted((r1, r2))
    if hi - lo < 1e-6 * hi:
        return
    m1, m2 = marginal_log_utility(u, lo), marginal_log_utility(u, hi)
    # on the flat sigmoid plateau the decrease drops below double resolution
    assert m1 >= m2
    plateau = isinstance(u, Sigmoidal) and m2 > 0.99 * u.a
    if not plateau and m2 > 0:
        assert m1 > m2
