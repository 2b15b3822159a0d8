"""Hot geometry/DTW kernels with a numba fast path and a numpy fallback.

The backend is chosen once at import time: numba when it is importable,
unless the environment variable GRAPHNAV_NUMBA is set to 0/false/no/off.
`BACKEND` records which path is active; benchmarks/bench_kernels.py
compares the two directly.
"""

import os

from . import numpy_impl

_FALSY = {"0", "false", "no", "off"}


def _numba_enabled():
    flag = os.environ.get("GRAPHNAV_NUMBA", "").strip().lower()
    if flag in _FALSY:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


if _numba_enabled():
    from . import numba_impl as _impl

    BACKEND = "numba"
else:
    _impl = numpy_impl
    BACKEND = "numpy"

ray_hit = _impl.ray_hit
ray_hits = _impl.ray_hits
segment_blocked = _impl.segment_blocked
dtw_cost = _impl.dtw_cost

__all__ = ["BACKEND", "ray_hit", "ray_hits", "segment_blocked", "dtw_cost", "numpy_impl"]
