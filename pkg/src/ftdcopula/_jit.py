"""Numba switch.

Setting ``FTDCOPULA_DISABLE_NUMBA=1`` (or running without numba installed)
turns every ``@njit`` below into a no-op and routes the path kernels to the
vectorized numpy implementation.
"""
import os

ENV_FLAG = "FTDCOPULA_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get(ENV_FLAG, "").strip().lower() not in (
    "1",
    "true",
    "yes",
    "on",
)


def njit(func):
    """Compile ``func`` in nopython mode when numba is enabled, else return it untouched."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def default_backend():
    return "numba" if USE_NUMBA else "numpy"
