"""
Latent-variable (CreditMetrics-style) default model.

A name defaults over one period when its standardized asset value falls
below ``z = Phi^-1(q)``. Joint default probabilities here are computed by
conditioning on one latent variable and integrating, which is deliberately a
different code path from ``gaussian_copula_2d`` so the two can be checked
against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import integrate

from .copula import gaussian_copula_2d
from .numerics import CorrelationMatrix, DomainError, _phi, cholesky, std_normal_inv

HORIZON_YEARS = 1.0


@dataclass(frozen=True)
class FactorModel:
    """Asset values ``X_i = sum_j omega[i, j] theta_j + idio[i] eps_i``.

    ``theta ~ N(0, factor_cov)`` and the ``eps_i`` are iid standard normal.
    """

    omega: NDArray[np.float64]
    factor_cov: NDArray[np.float64]
    idio: NDArray[np.float64]

    def __post_init__(self):
        omega = np.atleast_2d(np.asarray(self.omega, dtype=float))
        cov = np.atleast_2d(np.asarray(self.factor_cov, dtype=float))
        idio = np.asarray(self.idio, dtype=float).reshape(-1)
        if cov.shape != (omega.shape[1], omega.shape[1]):
            raise ValueError(f"factor_cov must be {omega.shape[1]}x{omega.shape[1]}, got {cov.shape}")
        if idio.shape[0] != omega.shape[0]:
            raise ValueError("idio must have one entry per name")
        if not np.allclose(cov, cov.T):
            raise ValueError("factor_cov must be symmetric")
        if np.min(np.linalg.eigvalsh(cov)) < -1e-12:
            raise ValueError("factor_cov must be positive semi-definite")
        if np.any(idio < 0.0):
            raise ValueError("idiosyncratic scales must be non-negative")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "factor_cov", cov)
        object.__setattr__(self, "idio", idio)

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    @property
    def p(self) -> int:
        return self.omega.shape[1]

    def covariance(self) -> NDArray:
        return self.omega @ self.factor_cov @ self.omega.T + np.diag(self.idio**2)

    def sample(self, n_samples: int, rng: np.random.Generator) -> NDArray:
        """Draw asset values directly from the factor structure. Test utility, not a pricing path."""
        theta = rng.multivariate_normal(np.zeros(self.p), self.factor_cov, size=n_samples)
        eps = rng.standard_normal((n_samples, self.n))
        return theta @ self.omega.T + eps * self.idio


@dataclass(frozen=True)
class DefaultThreshold:
    q: float
    z: float


def threshold_from_prob(q: float) -> DefaultThreshold:
    """Latent threshold for a one-period default probability ``q``."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"default probability must lie in (0, 1), got {q!r}")
    return DefaultThreshold(q=q, z=std_normal_inv(q))


def joint_default_prob(qa: float, qb: float, rho: float) -> float:
    """P(Z_A < z_A, Z_B < z_B) for standard normal latents with correlation ``rho``.

    Evaluated as ``int_{-inf}^{z_A} phi(s) Phi((z_B - rho s) / sqrt(1 - rho^2)) ds``.
    """
    if not -1.0 < rho < 1.0:
        raise DomainError(f"|rho| must be < 1, got {rho!r}")
    za = threshold_from_prob(qa).z
    zb = threshold_from_prob(qb).z
    if rho == 0.0:
        return qa * qb
    scale = math.sqrt((1.0 - rho) * (1.0 + rho))
    inv_sqrt_2pi = 1.0 / math.sqrt(2.0 * math.pi)

    def integrand(s):
        return inv_sqrt_2pi * math.exp(-0.5 * s * s) * _phi((zb - rho * s) / scale)

    lo = min(za, 0.0) - 12.0
    # conditional probability switches sharply near s = zb / rho when |rho| is large
    knot = zb / rho
    points = [knot] if lo < knot < za else None
    value, _ = integrate.quad(integrand, lo, za, points=points, epsabs=1e-15, epsrel=1e-13, limit=400)
    return value


def implied_asset_correlation(model: FactorModel) -> CorrelationMatrix:
    """Standardize the factor-model covariance into a correlation matrix."""
    cov = model.covariance()
    var = np.diag(cov).copy()
    if np.any(var <= 0.0):
        bad = int(np.argmin(var))
        raise ValueError(f"name {bad} has zero total variance")
    sd = np.sqrt(var)
    corr = cov / np.outer(sd, sd)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    corr = np.clip(corr, -1.0, 1.0)
    out = CorrelationMatrix(corr)
    cholesky(out)
    return out


@dataclass(frozen=True)
class EquivalenceReport:
    threshold_route: float
    copula_route: float
    gap: float


def verify_copula_equivalence(qa: float, qb: float, rho: float) -> EquivalenceReport:
    """Compare the latent-threshold and copula-function joint default probabilities."""
    a = joint_default_prob(qa, qb, rho)
    b = gaussian_copula_2d(qa, qb, rho)
    return EquivalenceReport(threshold_route=a, copula_route=b, gap=abs(a - b))


def one_period_default_prob(hazard_rate: float, horizon: float = HORIZON_YEARS) -> float:
    """``q = F(horizon)`` for a constant-hazard name."""
    return -math.expm1(-hazard_rate * horizon)
