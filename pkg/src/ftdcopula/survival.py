"""Constant-hazard survival-time model for a single credit name. Times are in years."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .numerics import DomainError, _phi, phi_array

# above this latent value 1 - Phi(y) is taken as Phi(-y); the direct form has
# lost ~4 digits to cancellation by y = 7
TAIL_SWITCH = 5.0


@dataclass(frozen=True)
class CreditName:
    id: str
    hazard_rate: float
    recovery: float

    def __post_init__(self):
        if not (math.isfinite(self.hazard_rate) and self.hazard_rate > 0.0):
            raise ValueError(f"{self.id}: hazard_rate must be > 0, got {self.hazard_rate!r}")
        if not 0.0 <= self.recovery < 1.0:
            raise ValueError(f"{self.id}: recovery must lie in [0, 1), got {self.recovery!r}")


def _check(h, t):
    if not h > 0.0:
        raise DomainError(f"hazard rate must be > 0, got {h!r}")
    if not t >= 0.0:
        raise DomainError(f"time must be >= 0, got {t!r}")


def survival_prob(h: float, t: float) -> float:
    """P(T > t) = exp(-h t)."""
    _check(h, t)
    return math.exp(-h * t)


def default_cdf(h: float, t: float) -> float:
    """P(T <= t) = 1 - exp(-h t), evaluated with expm1 for small h t."""
    _check(h, t)
    return -math.expm1(-h * t)


def invert_default_time(u: float, h: float) -> float:
    """Default time whose cumulative default probability is ``u``: ``-ln(1 - u) / h``."""
    if not h > 0.0:
        raise DomainError(f"hazard rate must be > 0, got {h!r}")
    if not 0.0 <= u < 1.0:
        raise DomainError(f"u must lie in [0, 1), got {u!r}")
    return -math.log1p(-u) / h


@njit
def _latent_to_time(y, h):
    if y > TAIL_SWITCH:
        return -math.log(_phi(-y)) / h
    return -math.log1p(-_phi(y)) / h


def latent_to_time_array(y, h):
    """Vectorized ``_latent_to_time`` (numpy path)."""
    y = np.asarray(y, dtype=float)
    tail = y > TAIL_SWITCH
    out = np.empty_like(y)
    out[~tail] = -np.log1p(-phi_array(y[~tail])) / h
    out[tail] = -np.log(phi_array(-y[tail])) / h
    return out
