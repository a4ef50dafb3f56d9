"""Backend selection for the numeric kernels.

Set ``CANTORGAUGE_BACKEND=numpy`` to run every kernel through its pure-numpy
path; the default uses numba when it imports cleanly.
"""
import os

BACKEND_ENV = "CANTORGAUGE_BACKEND"

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False


def use_numba():
    choice = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    return _HAVE_NUMBA and choice != "numpy"


def jit(func):
    """njit(cache=False) when numba is importable, identity otherwise.

    Compilation happens lazily, so defining a jitted kernel is free even when
    the numpy backend is selected at call time.
    """
    if _HAVE_NUMBA:
        return numba.njit(func)
    return func


def set_threads(n):
    if _HAVE_NUMBA and n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def backend_name():
    return "numba" if use_numba() else "numpy"
