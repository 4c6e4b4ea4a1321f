"""Backend selection for the numeric inner loops.

The numba backend is used when numba imports cleanly, unless the
environment variable ``MGRAF_DISABLE_NUMBA`` is set to a truthy value, in
which case the pure-numpy path is used. Both backends stay importable so
tests and the benchmark can compare them side by side.
"""
import os

from . import _numpy as numpy_backend

try:
    from . import _numba as numba_backend
except ImportError:  # numba missing or broken
    numba_backend = None

_disabled = os.environ.get("MGRAF_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

backend = numpy_backend if (_disabled or numba_backend is None) else numba_backend
BACKEND_NAME = "numpy" if backend is numpy_backend else "numba"

logistic_pass = backend.logistic_pass
loglik_only = backend.loglik_only
coupling_matvec = backend.coupling_matvec
coupling_rmatvec = backend.coupling_rmatvec
network_hessian_blocks = backend.network_hessian_blocks
pair_distances = backend.pair_distances
bfs_path_stats = backend.bfs_path_stats

__all__ = [
    "BACKEND_NAME",
    "backend",
    "numpy_backend",
    "numba_backend",
    "logistic_pass",
    "loglik_only",
    "coupling_matvec",
    "coupling_rmatvec",
    "network_hessian_blocks",
    "pair_distances",
    "bfs_path_stats",
]
