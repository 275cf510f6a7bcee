import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import random_correlation
from ftdcopula.numerics import (
    CorrelationMatrix,
    DomainError,
    NotPSDError,
    bivariate_normal_cdf,
    cholesky,
    phi_array,
    phi_inv_array,
    std_normal_cdf,
    std_normal_inv,
)

mpmath.mp.dps = 40


def mp_cdf(x):
    return float(mpmath.ncdf(mpmath.mpf(x)))


def mp_inv(u):
    return float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(u) - 1))


def bvn_conditional_quad(x, y, rho):
    """Phi_2 by integrating the conditional normal CDF; independent of the Genz path."""
    s = math.sqrt(1.0 - rho * rho)

    def f(t):
        return float(mpmath.npdf(t)) * float(mpmath.ncdf((y - rho * t) / s))

    lo = min(x, 0.0) - 12.0
    pts = [y / rho] if rho != 0.0 and lo < y / rho < x else None
    return integrate.quad(f, lo, x, points=pts, epsabs=1e-15, epsrel=1e-13, limit=400)[0]


class TestStdNormalCdf:
    def test_zero(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_975_quantile(self):
        # mpmath: Phi(1.959964) = 0.97500000090355759...
        assert std_normal_cdf(1.959964) == pytest.approx(0.9750000009035576, abs=1e-15)
        assert abs(std_normal_cdf(1.959964) - 0.975) < 1e-8

    def test_lower_tail_does_not_underflow(self):
        v = std_normal_cdf(-8.0)
        assert v > 0.0
        assert v == pytest.approx(6.220960574271784e-16, rel=1e-12)

    @pytest.mark.parametrize("x", np.linspace(-9, 9, 73).tolist())
    def test_against_mpmath(self, x):
        assert abs(std_normal_cdf(x) - mp_cdf(x)) <= 1e-12

    def test_monotone_on_grid(self):
        x = np.linspace(-8, 8, 20001)
        assert np.all(np.diff(std_normal_cdf(x)) >= 0.0)

    def test_array_matches_scalar(self):
        x = np.linspace(-7, 7, 301)
        scal = np.array([std_normal_cdf(v) for v in x])
        # scipy and libm erfc differ by a few ulps
        assert np.max(np.abs(phi_array(x) - scal) / scal) <= 1e-14


class TestStdNormalInv:
    def test_half(self):
        assert std_normal_inv(0.5) == 0.0

    def test_975(self):
        assert std_normal_inv(0.975) == pytest.approx(1.959963984540054, abs=1e-12)

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, u):
        with pytest.raises(DomainError):
            std_normal_inv(u)

    def test_array_domain(self):
        with pytest.raises(DomainError):
            std_normal_inv(np.array([0.2, 1.0]))

    @pytest.mark.parametrize("u", [1e-12, 1e-9, 1e-5, 0.02, 0.02425, 0.3, 0.5, 0.7, 0.97575, 0.999, 1 - 1e-9])
    def test_against_mpmath(self, u):
        assert std_normal_inv(u) == pytest.approx(mp_inv(u), rel=1e-12, abs=1e-12)

    def test_roundtrip_grid(self):
        u = np.concatenate([np.logspace(-12, -1, 4000), np.linspace(0.01, 0.99, 4000), 1 - np.logspace(-12, -1, 4000)])
        assert np.max(np.abs(std_normal_cdf(std_normal_inv(u)) - u)) <= 1e-9

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=1e-9, max_value=1 - 1e-9))
    def test_roundtrip_property(self, u):
        assert abs(std_normal_cdf(std_normal_inv(u)) - u) <= 1e-9

    def test_strictly_increasing(self):
        u = np.linspace(1e-6, 1 - 1e-6, 20001)
        assert np.all(np.diff(std_normal_inv(u)) > 0.0)

    def test_antisymmetric(self):
        u = np.linspace(0.001, 0.499, 200)
        assert np.array_equal(phi_inv_array(1.0 - u), -phi_inv_array(1.0 - (1.0 - u)))


class TestBivariateNormal:
    def test_independent_center(self):
        assert bivariate_normal_cdf(0.0, 0.0, 0.0) == 0.25

    def test_arcsine_example(self):
        assert bivariate_normal_cdf(0.0, 0.0, 0.1) == pytest.approx(0.26594214021463, abs=1e-12)

    def test_marginalization(self):
        for x in (-2.0, -0.3, 0.0, 1.1):
            for rho in (-0.9, 0.1, 0.95):
                assert abs(bivariate_normal_cdf(x, 8.0, rho) - std_normal_cdf(x)) <= 1e-10

    @pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
    def test_domain(self, rho):
        with pytest.raises(DomainError):
            bivariate_normal_cdf(0.0, 0.0, rho)

    def test_rho_zero_is_exact_product(self):
        rng = np.random.default_rng(3)
        for x, y in rng.uniform(-6, 6, (200, 2)):
            assert bivariate_normal_cdf(x, y, 0.0) == std_normal_cdf(x) * std_normal_cdf(y)

    def test_arcsine_identity_grid(self):
        for rho in np.linspace(-0.99, 0.99, 199):
            expected = 0.25 + math.asin(rho) / (2 * math.pi)
            assert abs(bivariate_normal_cdf(0.0, 0.0, rho) - expected) <= 1e-10

    def test_against_conditional_quadrature(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(150):
            x, y = rng.uniform(-5, 5, 2)
            rho = rng.uniform(-0.995, 0.995)
            worst = max(worst, abs(bivariate_normal_cdf(x, y, rho) - bvn_conditional_quad(x, y, rho)))
        assert worst <= 1e-10

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-6, 6),
        st.floats(-6, 6),
        st.floats(-0.999, 0.999),
    )
    def test_symmetric_and_bounded(self, x, y, rho):
        v = bivariate_normal_cdf(x, y, rho)
        assert v == pytest.approx(bivariate_normal_cdf(y, x, rho), abs=1e-14)
        lo = max(std_normal_cdf(x) + std_normal_cdf(y) - 1.0, 0.0)
        hi = min(std_normal_cdf(x), std_normal_cdf(y))
        assert lo - 1e-14 <= v <= hi + 1e-14

    def test_infinite_limits(self):
        assert bivariate_normal_cdf(math.inf, 0.3, 0.4) == pytest.approx(std_normal_cdf(0.3), abs=1e-15)
        assert bivariate_normal_cdf(-math.inf, 0.3, 0.4) == 0.0


class TestCholesky:
    def test_identity(self):
        L = cholesky(np.eye(5)).L
        assert np.array_equal(L, np.eye(5))

    def test_two_by_two(self):
        L = cholesky([[1.0, 0.1], [0.1, 1.0]]).L
        assert np.allclose(L, [[1.0, 0.0], [0.1, math.sqrt(0.99)]], atol=1e-15)
        assert L[1, 1] == pytest.approx(0.9949874, abs=1e-7)

    def test_not_psd_names_pivot(self):
        with pytest.raises(NotPSDError) as exc:
            cholesky([[1.0, 2.0], [2.0, 1.0]])
        assert exc.value.pivot == 1
        assert "pivot 1" in str(exc.value)

    def test_not_psd_three_by_three(self):
        m = [[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]]
        with pytest.raises(NotPSDError) as exc:
            cholesky(m)
        assert exc.value.pivot == 2

    def test_singular_comonotonic_matrix(self):
        L = cholesky(np.ones((4, 4))).L
        assert np.max(np.abs(L @ L.T - 1.0)) <= 1e-12
        assert np.all(np.diag(L)[1:] == 0.0)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(2024)
        for _ in range(300):
            n = int(rng.integers(1, 11))
            c = random_correlation(rng, n)
            L = cholesky(c).L
            assert np.max(np.abs(L @ L.T - c)) <= 1e-12
            assert np.all(np.diag(L) >= 0.0)
            assert np.array_equal(L, np.tril(L))

    def test_matches_numpy_on_pd(self):
        rng = np.random.default_rng(5)
        c = random_correlation(rng, 7)
        assert np.allclose(cholesky(c).L, np.linalg.cholesky(c), atol=1e-13)

    def test_lower_diagonal_identity_rank_deficient(self):
        c = CorrelationMatrix.uniform(3, 1.0)
        assert cholesky(c).n == 3


class TestCorrelationMatrix:
    def test_uniform(self):
        c = CorrelationMatrix.uniform(5, 0.1)
        assert c.n == 5
        assert np.all(np.diag(c.entries) == 1.0)
        assert c.entries[0, 4] == 0.1

    @pytest.mark.parametrize(
        "m",
        [
            [[1.0, 0.2], [0.3, 1.0]],
            [[0.9, 0.2], [0.2, 1.0]],
            [[1.0, 1.2], [1.2, 1.0]],
            [[1.0, 0.0, 0.0]],
        ],
    )
    def test_invalid(self, m):
        with pytest.raises(ValueError):
            CorrelationMatrix(np.array(m))

    def test_immutable(self):
        c = CorrelationMatrix.uniform(2, 0.5)
        with pytest.raises(ValueError):
            c.entries[0, 1] = 0.0
