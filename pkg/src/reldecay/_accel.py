"""Numba switch.

Set ``RELDECAY_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels (also used automatically when numba is not importable).
"""
import os

_DISABLED = os.environ.get("RELDECAY_DISABLE_NUMBA", "").strip().lower() in (
    "1", "true", "yes", "on",
)

try:
    if _DISABLED:
        raise ImportError("numba disabled by RELDECAY_DISABLE_NUMBA")
    import numba
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
