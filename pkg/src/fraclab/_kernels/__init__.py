"""Hot-kernel backend selection.

The compiled Cython module is preferred when it imported cleanly; the numpy
reference implementation is the fallback and the ground truth for tests.
Set ``FRACLAB_FORCE_REF=1`` to force the reference backend.
"""

from __future__ import annotations

import os

import numpy as np

from . import _ref

if os.environ.get("FRACLAB_FORCE_REF") == "1":
    _impl = _ref
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _ref

backend_name: str = _impl.BACKEND


def _c1(x) -> np.ndarray:
    return np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))


def _c2(x, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {arr.shape[1]}")
    return np.ascontiguousarray(arr)


def ramp01(t) -> np.ndarray:
    """Smooth ramp, identically 0 for t <= 1 and 1 for t >= 2."""
    t_arr = _c1(t)
    out = _impl.ramp01(t_arr.ravel())
    return np.asarray(out).reshape(t_arr.shape)


def dist_segment(points, a, b) -> np.ndarray:
    a = _c1(a)
    return np.asarray(_impl.dist_segment(_c2(points, a.size), a, _c1(b)))


def dist_circle3d(points, radius: float) -> np.ndarray:
    return np.asarray(_impl.dist_circle3d(_c2(points, 3), float(radius)))


def dist_point_cloud(points, cloud) -> np.ndarray:
    cloud = _c2(cloud)
    return np.asarray(_impl.dist_point_cloud(_c2(points, cloud.shape[1]), cloud))
