import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftdcopula.numerics import DomainError
from ftdcopula.survival import CreditName, default_cdf, invert_default_time, survival_prob


def test_survival_examples():
    assert survival_prob(0.2, 0.0) == 1.0
    assert survival_prob(0.2, 5.0) == pytest.approx(0.36787944117144233, abs=1e-15)
    assert survival_prob(1.0, 0.6931472) == pytest.approx(0.5, abs=1e-7)


def test_default_cdf_examples():
    assert default_cdf(0.2, 0.0) == 0.0
    assert default_cdf(0.2, 5.0) == pytest.approx(0.6321205588285577, abs=1e-15)


@given(st.floats(1e-4, 5.0), st.floats(0.0, 50.0))
def test_complement(h, t):
    assert default_cdf(h, t) + survival_prob(h, t) == pytest.approx(1.0, abs=1e-15)


def test_survival_strictly_decreasing():
    t = np.linspace(0, 20, 500)
    s = [survival_prob(0.2, v) for v in t]
    assert all(b < a for a, b in zip(s, s[1:]))


def test_invert_examples():
    assert invert_default_time(0.0, 0.2) == 0.0
    assert invert_default_time(0.5, 0.2) == pytest.approx(3.4657359027997265, abs=1e-14)
    # 0.6321206 is 1 - e^-1 rounded to 7 digits; exact inverse is 5.00000056
    assert invert_default_time(0.6321206, 0.2) == pytest.approx(5.0, abs=1e-5)


@pytest.mark.parametrize("u,h", [(1.0, 0.2), (-0.1, 0.2), (0.5, 0.0), (0.5, -1.0)])
def test_invert_domain(u, h):
    with pytest.raises(DomainError):
        invert_default_time(u, h)


@pytest.mark.parametrize("h,t", [(0.2, -1.0), (0.0, 1.0), (-0.2, 1.0)])
def test_cdf_domain(h, t):
    with pytest.raises(DomainError):
        survival_prob(h, t)
    with pytest.raises(DomainError):
        default_cdf(h, t)


@given(st.floats(0.0, 1 - 1e-9), st.floats(0.01, 3.0))
def test_roundtrip(u, h):
    assert abs(default_cdf(h, invert_default_time(u, h)) - u) <= 1e-12


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 5.0])
def test_hazard_finite_difference(t):
    h, d = 0.2, 1e-6
    est = (default_cdf(h, t + d) - default_cdf(h, t)) / (d * (1.0 - default_cdf(h, t)))
    assert est == pytest.approx(h, abs=10 * d)


def test_density_positive():
    h, d = 0.2, 1e-7
    for t in np.linspace(0.0, 30.0, 301):
        assert (default_cdf(h, t + d) - default_cdf(h, t)) / d > 0.0


def test_credit_name_validation():
    CreditName("A", 0.2, 0.0)
    with pytest.raises(ValueError):
        CreditName("A", 0.0, 0.2)
    with pytest.raises(ValueError):
        CreditName("A", 0.2, 1.0)
    with pytest.raises(ValueError):
        CreditName("A", math.nan, 0.2)
