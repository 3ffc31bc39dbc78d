"""Backend dispatch for the hot loops.

``LEXQD_BACKEND=numpy`` selects the vectorized numpy fallback; the default
is the numba backend when numba imports, numpy otherwise.
"""
import os

BACKEND_ENV = "LEXQD_BACKEND"


def _load(name):
    if name == "numba":
        from . import numba_impl
        return numba_impl
    if name == "numpy":
        from . import numpy_impl
        return numpy_impl
    raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {name!r}")


def _select():
    requested = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if requested == "numba":
        try:
            return _load("numba")
        except ImportError:
            return _load("numpy")
    return _load(requested)


impl = _select()
BACKEND = impl.NAME


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active one)."""
    return impl if name is None else _load(name)


def set_threads(n):
    """Cap numba's worker pool; a no-op under the numpy backend."""
    if BACKEND != "numba" or n is None:
        return
    import numba
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
