"""Backend selection for the hot loops.

``RKF_BACKEND=numpy`` forces the plain numpy/scipy kernels; ``numba`` (the
default when numba imports) uses the JIT versions. Both expose the same
functions and are checked against each other in the test suite.
"""
import os

import numpy as np

from . import _kernels_numpy

_requested = os.environ.get("RKF_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"RKF_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba":
    try:
        from . import _kernels_numba as _impl
        BACKEND = "numba"
    except ImportError:  # numba missing
        _impl = _kernels_numpy
        BACKEND = "numpy"
else:
    _impl = _kernels_numpy
    BACKEND = "numpy"

LinAlgError = (np.linalg.LinAlgError, _kernels_numpy.LinAlgError)


def _c(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def riccati_step(sigma, a, cw, q):
    return _impl.riccati_step(_c(sigma), _c(a), _c(cw), _c(q))


def kalman_pass(a, cw, q, yw, x0, sigma0):
    return _impl.kalman_pass(_c(a), _c(cw), _c(q), _c(yw), _c(x0), _c(sigma0))


def riccati_iterate(a, cw, q, sigma0, tol, max_iter):
    sigma, k, gap = _impl.riccati_iterate(_c(a), _c(cw), _c(q), _c(sigma0), float(tol), int(max_iter))
    return sigma, int(k), float(gap)


def riccati_sequence(a, cw, q, sigma0, steps):
    return _impl.riccati_sequence(_c(a), _c(cw), _c(q), _c(sigma0), int(steps))


def get_backend(name):
    """Kernel module by name, regardless of the environment flag (tests, benchmarks)."""
    if name == "numpy":
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba
        return _kernels_numba
    raise ValueError(f"unknown backend {name!r}")
