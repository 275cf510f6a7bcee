"""
Gaussian copula over default times.

Correlated latent normals ``y = L z`` are mapped name by name to default
times through ``t_j = F_j^{-1}(Phi(y_j))``. The n-dimensional copula is only
ever realized by sampling; the bivariate copula function is evaluated in
closed form.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .numerics import CholeskyFactor, bivariate_normal_cdf, std_normal_inv
from .survival import CreditName, latent_to_time_array


def sample_latent(L: CholeskyFactor | ArrayLike, z: ArrayLike) -> NDArray:
    """Correlate independent normals: returns ``L @ z``.

    ``z`` may be a single length-n vector or an (m, n) array of row vectors,
    in which case each row is transformed.
    """
    L = L.L if isinstance(L, CholeskyFactor) else np.asarray(L, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != L.shape[1]:
        raise ValueError(f"dimension mismatch: factor is {L.shape[0]}x{L.shape[1]}, z has {z.shape[-1]}")
    return z @ L.T if z.ndim == 2 else L @ z


def latent_to_default_times(y: ArrayLike, names: Sequence[CreditName]) -> NDArray:
    """Map latent normals to default times, one column per name.

    Works on a single latent vector or an (m, n) array of them.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != len(names):
        raise ValueError(f"latent vector has {y.shape[-1]} entries for {len(names)} names")
    flat = y.reshape(-1, len(names))
    out = np.empty_like(flat)
    for j, name in enumerate(names):
        out[:, j] = latent_to_time_array(flat[:, j], name.hazard_rate)
    return out.reshape(y.shape)


def gaussian_copula_2d(u: float, v: float, rho: float) -> float:
    """Bivariate Gaussian copula ``C(u, v) = Phi_2(Phi^-1(u), Phi^-1(v); rho)``."""
    return bivariate_normal_cdf(std_normal_inv(u), std_normal_inv(v), rho)
