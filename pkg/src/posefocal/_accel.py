"""Selection between numba-compiled kernels and the pure-numpy fallback.

Set ``POSEFOCAL_DISABLE_NUMBA=1`` to force the numpy path. If numba is not
importable the numpy path is used regardless.
"""

import os

_FLAG = "POSEFOCAL_DISABLE_NUMBA"

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False


def numba_disabled_by_env():
    return os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAS_NUMBA and not numba_disabled_by_env()


def njit(func):
    """Compile ``func`` with numba when available, otherwise return it unchanged."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True, error_model="numpy")(func)
