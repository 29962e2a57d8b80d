"""Backend selection for the hot kernels.

The compiled extension is preferred.  Set ``BIOLIDAR_SLAM_PURE_PYTHON=1`` to
force the numpy fallback, e.g. to compare backends or debug.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("BIOLIDAR_SLAM_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

raycast = _impl.raycast
bresenham_update = _impl.bresenham_update
sample_bilinear = _impl.sample_bilinear
relax_sweep = _impl.relax_sweep

__all__ = ["BACKEND", "raycast", "bresenham_update", "sample_bilinear", "relax_sweep"]
