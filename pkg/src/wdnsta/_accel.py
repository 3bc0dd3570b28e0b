"""Optional numba acceleration.

Hot kernels are written once in a numba-compatible numpy subset and decorated
with :func:`njit`.  Setting ``WDNSTA_DISABLE_NUMBA=1`` (or running without numba
installed) turns the decorator into a no-op so the same functions execute as
plain numpy code.
"""
import os

_flag = os.environ.get("WDNSTA_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    import numba
except ImportError:
    numba = None

USE_NUMBA = numba is not None


def njit(fn=None, **kwargs):
    """``numba.njit(cache=True)`` when acceleration is on, identity otherwise."""
    def wrap(f):
        if not USE_NUMBA:
            return f
        opts = {"cache": True, "nogil": True}
        opts.update(kwargs)
        return numba.njit(**opts)(f)

    if fn is not None:
        return wrap(fn)
    return wrap


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
