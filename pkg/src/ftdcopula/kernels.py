"""
Per-path valuation kernels.

Both kernels take a block of uniforms (one row per path, one column per
name) and return per-path default times, first default, and leg PVs. The
numba kernel loops path by path; the numpy kernel is column-vectorized and
is used when ``FTDCOPULA_DISABLE_NUMBA`` is set. They perform the same
floating-point operations in the same order apart from the transcendental
functions, so outputs agree to a few ulps.
"""
from __future__ import annotations

import math

import numpy as np

from ._jit import USE_NUMBA, default_backend, njit
from .numerics import _phi_inv, phi_inv_array
from .survival import _latent_to_time, latent_to_time_array


@njit
def _value_paths_loop(uniforms, L, hazards, recoveries, pay_times, pay_df, maturity, rate):
    m, n = uniforms.shape
    times = np.empty((m, n))
    first_time = np.empty(m)
    first_index = np.empty(m, dtype=np.int64)
    premium = np.empty(m)
    protection = np.empty(m)
    z = np.empty(n)
    n_pay = pay_times.shape[0]
    for i in range(m):
        for j in range(n):
            z[j] = _phi_inv(uniforms[i, j])
        tmin = np.inf
        jmin = 0
        for j in range(n):
            y = 0.0
            for k in range(j + 1):
                y += L[j, k] * z[k]
            t = _latent_to_time(y, hazards[j])
            times[i, j] = t
            # strict < keeps the lowest index on ties
            if t < tmin:
                tmin = t
                jmin = j
        vl = 0.0
        for k in range(n_pay):
            if pay_times[k] < tmin:
                vl += pay_df[k]
            else:
                break
        vr = 0.0
        if tmin < maturity:
            vr = (1.0 - recoveries[jmin]) * math.exp(-rate * tmin)
        first_time[i] = tmin
        first_index[i] = jmin
        premium[i] = vl
        protection[i] = vr
    return times, first_time, first_index, premium, protection


def _value_paths_numpy(uniforms, L, hazards, recoveries, pay_times, pay_df, maturity, rate):
    m, n = uniforms.shape
    z = phi_inv_array(uniforms)
    times = np.empty((m, n))
    for j in range(n):
        y = np.zeros(m)
        for k in range(j + 1):
            y += L[j, k] * z[:, k]
        times[:, j] = latent_to_time_array(y, hazards[j])
    first_index = np.argmin(times, axis=1).astype(np.int64)
    first_time = times[np.arange(m), first_index]

    cum = np.zeros(pay_df.shape[0] + 1)
    acc = 0.0
    for k in range(pay_df.shape[0]):
        acc += pay_df[k]
        cum[k + 1] = acc
    premium = cum[np.searchsorted(pay_times, first_time, side="left")]

    protection = np.where(
        first_time < maturity,
        (1.0 - recoveries[first_index]) * np.exp(-rate * first_time),
        0.0,
    )
    return times, first_time, first_index, premium, protection


BACKENDS = ("numba", "numpy")


def value_paths(uniforms, L, hazards, recoveries, pay_times, pay_df, maturity, rate, backend=None):
    """Value a block of paths from their uniforms. ``backend`` defaults to the env-selected one."""
    backend = backend or default_backend()
    args = (
        np.ascontiguousarray(uniforms, dtype=np.float64),
        np.ascontiguousarray(L, dtype=np.float64),
        np.ascontiguousarray(hazards, dtype=np.float64),
        np.ascontiguousarray(recoveries, dtype=np.float64),
        np.ascontiguousarray(pay_times, dtype=np.float64),
        np.ascontiguousarray(pay_df, dtype=np.float64),
        float(maturity),
        float(rate),
    )
    if backend == "numba":
        if not USE_NUMBA:
            raise RuntimeError("numba backend requested but numba is disabled or unavailable")
        return _value_paths_loop(*args)
    if backend == "numpy":
        return _value_paths_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
