"""Numba acceleration switch for the hot kernels.

The fast-marching and patch-search inner loops are written as plain Python
functions over numpy arrays and compiled with numba's ``@njit`` at import
time. Setting ``PIXPROBE_NUMBA=0`` (or numba being unimportable) leaves the
same source running interpreted, which is slow but bit-identical: kernels
avoid library reductions so the compiled and interpreted paths perform the
exact same float operations in the same order.

The flag is read once at import. ``pixprobe bench`` compares both paths by
launching the counterpart in a subprocess with the flag flipped.
"""

import os

ENV_FLAG = "PIXPROBE_NUMBA"

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - numba is a default dependency
    _njit = None

NUMBA_AVAILABLE = _njit is not None


def _requested() -> bool:
    return os.environ.get(ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "off")


NUMBA_ENABLED = NUMBA_AVAILABLE and _requested()


def jit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(func)
    return func


def active_path() -> str:
    """Name of the kernel path selected at import: 'numba' or 'numpy'."""
    return "numba" if NUMBA_ENABLED else "numpy"
