"""Backend dispatch for the batched rollout kernels.

``numba`` is the default when importable; ``OMPPI_DISABLE_NUMBA=1`` selects
the numpy path at import time and :func:`set_backend` switches at runtime.

Shapes: ``x0`` (5,), ``inputs`` (M, N, 2), ``dyn`` from
``DynamicsParams.as_array()``, ``frames`` (N, A, 4) from
``cost.agent_frames`` and ``cv`` from ``cost.cost_vector``.
"""
import numpy as np

from . import _kernels_numpy
from ._accel import HAVE_NUMBA

if HAVE_NUMBA:
    from . import _kernels_numba

BACKENDS = ("numba", "numpy") if HAVE_NUMBA else ("numpy",)
_impl = _kernels_numba if HAVE_NUMBA else _kernels_numpy


def backend() -> str:
    return "numba" if _impl is not _kernels_numpy else "numpy"


def set_backend(name: str) -> None:
    global _impl
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; choose from {BACKENDS}")
    _impl = _kernels_numba if name == "numba" else _kernels_numpy


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def rollout_costs(x0, inputs, dyn, frames, cv) -> np.ndarray:
    """Simulate every input sequence from ``x0`` and return the summed running cost of
    the post-step states, one value per rollout."""
    return _impl.rollout_costs(_f64(x0), _f64(inputs), _f64(dyn), _f64(frames), _f64(cv))


def rollout_states(x0, inputs, dyn) -> np.ndarray:
    return _impl.rollout_states(_f64(x0), _f64(inputs), _f64(dyn))


def path_costs(xy, speed, frames, cv) -> np.ndarray:
    """Summed running cost of prescribed (M, N, 2) positions with (M, N) speeds."""
    return _impl.path_costs(_f64(xy), _f64(speed), _f64(frames), _f64(cv))
