"""Numba detection and the backend switch for the hot kernels.

Set ``OMPPI_DISABLE_NUMBA=1`` to force the pure-numpy path, e.g. on
platforms without an LLVM toolchain or when debugging a kernel.
"""
import os
import warnings

DISABLED_BY_ENV = os.environ.get("OMPPI_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
    "on",
)

# Old system TBB builds make numba warn and fall back to another threading layer.
warnings.filterwarnings("ignore", message=".*TBB.*", module="numba")

try:
    if DISABLED_BY_ENV:
        raise ImportError("numba disabled via OMPPI_DISABLE_NUMBA")
    from numba import njit, prange, set_num_threads, get_num_threads

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range

    def set_num_threads(n):
        pass

    def get_num_threads():
        return 1
