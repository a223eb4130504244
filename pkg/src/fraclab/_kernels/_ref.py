"""Reference (pure numpy) implementations of the hot kernels.

Same contract as the compiled module ``_fast``: inputs are contiguous
float64 arrays already normalized by the package-level wrappers.
"""

from __future__ import annotations

import numpy as np

BACKEND = "reference"

# Largest number of point/cloud pairwise entries held in memory at once.
_BLOCK_ENTRIES = 4_000_000


def ramp01(t: np.ndarray) -> np.ndarray:
    """Smooth ramp: 0 for t <= 1, 1 for t >= 2, C-infinity in between."""
    out = np.where(t >= 2.0, 1.0, 0.0)
    band = (t > 1.0) & (t < 2.0)
    if np.any(band):
        tb = t[band]
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            b1 = np.exp(-1.0 / (tb - 1.0))
            b2 = np.exp(-1.0 / (2.0 - tb))
        out[band] = b1 / (b1 + b2)
    return out


def dist_segment(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.sqrt(((points - a) ** 2).sum(axis=1))
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.sqrt(((points - closest) ** 2).sum(axis=1))


def dist_circle3d(points: np.ndarray, radius: float) -> np.ndarray:
    # Canonical frame: circle of given radius in the z = 0 plane, center 0.
    rho = np.hypot(points[:, 0], points[:, 1])
    return np.hypot(rho - radius, points[:, 2])


def dist_point_cloud(points: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    m = points.shape[0]
    k = cloud.shape[0]
    out = np.empty(m)
    block = max(1, _BLOCK_ENTRIES // max(k, 1))
    for lo in range(0, m, block):
        hi = min(lo + block, m)
        diff = points[lo:hi, None, :] - cloud[None, :, :]
        out[lo:hi] = np.sqrt((diff**2).sum(axis=2)).min(axis=1)
    return out
