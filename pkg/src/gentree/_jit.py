"""Optional numba acceleration.

Set GENTREE_NO_NUMBA=1 to run the kernels as plain Python over numpy
arrays (same code, no compilation). The flag is read once at import.
"""
import os


def _noop_jit(f=None, **kwargs):
    if f is None:
        return lambda g: g
    return f


def _numba_wanted():
    return os.environ.get("GENTREE_NO_NUMBA", "").strip().lower() in ("", "0", "false", "no")


try:
    if not _numba_wanted():
        raise ImportError("disabled by GENTREE_NO_NUMBA")
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def njit(f=None, **kwargs):
    """numba.njit(cache=True) when available, identity otherwise."""
    if not HAVE_NUMBA:
        return _noop_jit(f)
    kwargs.setdefault("cache", True)
    if f is None:
        return _njit(**kwargs)
    return _njit(**kwargs)(f)


def py_func(f):
    """The uncompiled Python body of a kernel."""
    return getattr(f, "py_func", f)
