"""Compact sets: exact distance oracles and tubular-neighborhood geometry.

Every variant provides a closed-form distance, the nearest-point map with a
multiplicity flag, and deterministic surface samples. Tube volumes and
boundary areas are hit-or-miss Monte Carlo over the set's bounding box
inflated by the tube radius, which keeps the hit fraction scale-free; the
co-dimension defect lambda is read off a log-log fit of boundary area
against radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import dist_circle3d, dist_point_cloud, dist_segment
from .errors import (
    ConfigInvalid,
    DegenerateShell,
    FitUnstable,
    NotDifferentiable,
    PointOnSet,
)
from .quadrature import derive_rng

MULTIPLICITY_TOL = 1e-9


@dataclass(frozen=True)
class NearestResult:
    point: np.ndarray
    distance: float
    multiple: bool


def _as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        if arr.size != dim:
            raise ValueError(f"point of dimension {arr.size}, set lives in R^{dim}")
        return arr[None, :], True
    if arr.shape[-1] != dim:
        raise ValueError(f"points of dimension {arr.shape[-1]}, set lives in R^{dim}")
    return arr.reshape(-1, dim), False


class CompactSet:
    """Base class; concrete variants implement `_dist` and `nearest_point`."""

    variant: str = "abstract"

    def __init__(self, dim: int):
        self.dim = int(dim)

    # -- core oracles ------------------------------------------------------

    def _dist(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x):
        pts, single = _as_points(x, self.dim)
        d = self._dist(pts)
        return float(d[0]) if single else d.reshape(np.shape(x)[:-1])

    def nearest_point(self, x) -> NearestResult:
        raise NotImplementedError

    def distance_gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        near = self.nearest_point(x)
        if near.distance <= MULTIPLICITY_TOL:
            raise PointOnSet("distance gradient requested on the set")
        if near.multiple:
            raise NotDifferentiable("nearest point is not unique")
        return (x - near.point) / near.distance

    # -- geometry metadata -------------------------------------------------

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample_points(self, k: int) -> np.ndarray:
        """Deterministic dense sample on the set (k is a target count)."""
        raise NotImplementedError

    def nominal_dimension(self) -> float:
        raise NotImplementedError

    def reach(self) -> float:
        return math.inf

    def is_origin_point(self) -> bool:
        """True when the set is the single point at the origin (distance is
        then the plain norm, enabling radial fast paths)."""
        return False

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    # -- serialization -----------------------------------------------------

    def descriptor(self) -> dict:
        raise NotImplementedError


class FinitePoints(CompactSet):
    variant = "finite-points"

    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        super().__init__(pts.shape[1])
        self.points = pts

    def _dist(self, points):
        return dist_point_cloud(points, self.points)

    def nearest_point(self, x):
        x = np.asarray(x, dtype=np.float64)
        d = np.linalg.norm(self.points - x, axis=1)
        i = int(np.argmin(d))
        multiple = int(np.sum(d <= d[i] + MULTIPLICITY_TOL)) > 1
        return NearestResult(self.points[i].copy(), float(d[i]), multiple)

    def bounding_box(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def sample_points(self, k):
        return self.points.copy()

    def nominal_dimension(self):
        return 0.0

    def is_origin_point(self):
        return len(self.points) == 1 and float(np.linalg.norm(self.points[0])) == 0.0

    def reach(self):
        if len(self.points) < 2:
            return math.inf
        d = np.linalg.norm(self.points[:, None, :] - self.points[None, :, :], axis=2)
        d[d == 0.0] = math.inf
        return float(d.min()) / 2.0

    def descriptor(self):
        return {"variant": self.variant, "dim": self.dim, "points": self.points.tolist()}


class Segment(CompactSet):
    variant = "segment"

    def __init__(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        super().__init__(a.size)
        self.a, self.b = a, b
        self.length = float(np.linalg.norm(b - a))

    def _dist(self, points):
        return dist_segment(points, self.a, self.b)

    def nearest_point(self, x):
        x = np.asarray(x, dtype=np.float64)
        ab = self.b - self.a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0.0 else float(np.clip((x - self.a) @ ab / denom, 0.0, 1.0))
        p = self.a + t * ab
        return NearestResult(p, float(np.linalg.norm(x - p)), False)

    def bounding_box(self):
        return np.minimum(self.a, self.b), np.maximum(self.a, self.b)

    def sample_points(self, k):
        t = np.linspace(0.0, 1.0, max(2, int(k)))
        return self.a + t[:, None] * (self.b - self.a)

    def nominal_dimension(self):
        return 1.0

    def descriptor(self):
        return {
            "variant": self.variant,
            "dim": self.dim,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
        }


class Polyline(CompactSet):
    variant = "polyline"

    def __init__(self, vertices):
        verts = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
        if len(verts) < 2:
            raise ConfigInvalid("polyline needs at least two vertices")
        super().__init__(verts.shape[1])
        self.vertices = verts
        self._segments = [Segment(verts[i], verts[i + 1]) for i in range(len(verts) - 1)]

    def _dist(self, points):
        d = np.full(points.shape[0], np.inf)
        for seg in self._segments:
            np.minimum(d, seg._dist(points), out=d)
        return d

    def nearest_point(self, x):
        results = [seg.nearest_point(x) for seg in self._segments]
        dists = np.array([r.distance for r in results])
        i = int(np.argmin(dists))
        close = np.flatnonzero(dists <= dists[i] + MULTIPLICITY_TOL)
        pts = np.array([results[j].point for j in close])
        multiple = bool(len(close) > 1 and np.ptp(pts, axis=0).max() > MULTIPLICITY_TOL)
        return NearestResult(results[i].point, float(dists[i]), multiple)

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def sample_points(self, k):
        lens = np.array([s.length for s in self._segments])
        total = lens.sum()
        out = [self.vertices[0][None, :]]
        for seg, ln in zip(self._segments, lens):
            m = max(1, int(round(k * ln / total)))
            t = np.linspace(0.0, 1.0, m + 1)[1:]
            out.append(seg.a + t[:, None] * (seg.b - seg.a))
        return np.concatenate(out, axis=0)

    def nominal_dimension(self):
        return 1.0

    def reach(self):
        return math.inf if len(self._segments) == 1 else 0.0

    def descriptor(self):
        return {"variant": self.variant, "dim": self.dim, "vertices": self.vertices.tolist()}


class CircleInR3(CompactSet):
    variant = "circle-r3"

    def __init__(self, radius: float, center=(0.0, 0.0, 0.0), normal=(0.0, 0.0, 1.0)):
        super().__init__(3)
        if radius <= 0:
            raise ConfigInvalid("circle radius must be positive")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=np.float64)
        nrm = np.asarray(normal, dtype=np.float64)
        self.normal = nrm / np.linalg.norm(nrm)
        # Orthonormal in-plane frame.
        probe = np.array([1.0, 0.0, 0.0])
        if abs(self.normal @ probe) > 0.9:
            probe = np.array([0.0, 1.0, 0.0])
        e1 = probe - (probe @ self.normal) * self.normal
        self.e1 = e1 / np.linalg.norm(e1)
        self.e2 = np.cross(self.normal, self.e1)
        self._frame = np.stack([self.e1, self.e2, self.normal], axis=0)

    def _to_frame(self, points):
        return (points - self.center) @ self._frame.T

    def _dist(self, points):
        return dist_circle3d(self._to_frame(points), self.radius)

    def nearest_point(self, x):
        x = np.asarray(x, dtype=np.float64)
        q = self._to_frame(x[None, :])[0]
        rho = math.hypot(q[0], q[1])
        d = math.hypot(rho - self.radius, q[2])
        if rho <= MULTIPLICITY_TOL:
            # On the axis: the whole circle is nearest.
            p = self.center + self.radius * self.e1
            return NearestResult(p, d, True)
        u = np.array([q[0] / rho, q[1] / rho, 0.0])
        p_frame = self.radius * u
        p = self.center + p_frame @ self._frame
        return NearestResult(p, d, False)

    def bounding_box(self):
        ext = self.radius * np.sqrt(self.e1**2 + self.e2**2)
        return self.center - ext, self.center + ext

    def sample_points(self, k):
        ang = 2.0 * np.pi * np.arange(max(8, int(k))) / max(8, int(k))
        return (
            self.center
            + self.radius * np.outer(np.cos(ang), self.e1)
            + self.radius * np.outer(np.sin(ang), self.e2)
        )

    def nominal_dimension(self):
        return 1.0

    def reach(self):
        return self.radius

    def descriptor(self):
        return {
            "variant": self.variant,
            "dim": 3,
            "radius": self.radius,
            "center": self.center.tolist(),
            "normal": self.normal.tolist(),
        }


class Sphere(CompactSet):
    variant = "sphere"

    def __init__(self, radius: float, center=None, dim: int = 3):
        super().__init__(dim)
        if radius <= 0:
            raise ConfigInvalid("sphere radius must be positive")
        self.radius = float(radius)
        self.center = (
            np.zeros(dim) if center is None else np.asarray(center, dtype=np.float64)
        )

    def _dist(self, points):
        return np.abs(np.linalg.norm(points - self.center, axis=1) - self.radius)

    def nearest_point(self, x):
        x = np.asarray(x, dtype=np.float64)
        v = x - self.center
        r = float(np.linalg.norm(v))
        if r <= MULTIPLICITY_TOL:
            p = self.center.copy()
            p[0] += self.radius
            return NearestResult(p, self.radius, True)
        p = self.center + self.radius * v / r
        return NearestResult(p, abs(r - self.radius), False)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def sample_points(self, k):
        if self.dim == 3:
            m = max(16, int(k))
            i = np.arange(m) + 0.5
            phi = np.arccos(1.0 - 2.0 * i / m)
            theta = np.pi * (1.0 + 5.0**0.5) * i
            dirs = np.stack(
                [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)],
                axis=1,
            )
        elif self.dim == 2:
            ang = 2.0 * np.pi * np.arange(max(8, int(k))) / max(8, int(k))
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        elif self.dim == 1:
            dirs = np.array([[1.0], [-1.0]])
        else:
            rng = derive_rng(0, "sphere-sample", self.dim, k)
            dirs = rng.standard_normal((int(k), self.dim))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return self.center + self.radius * dirs

    def nominal_dimension(self):
        return float(self.dim - 1)

    def reach(self):
        return self.radius

    def descriptor(self):
        return {
            "variant": self.variant,
            "dim": self.dim,
            "radius": self.radius,
            "center": self.center.tolist(),
        }


class ProductCantor(CompactSet):
    """Level-L midpoint cloud of the ratio-c Cantor set, optionally a product
    of several factors on the leading axes."""

    variant = "product-cantor"

    def __init__(self, ratio: float, levels: int, factors: int = 1, ambient_dim: int | None = None):
        if not 0.0 < ratio < 0.5:
            raise ConfigInvalid("cantor ratio must lie in (0, 1/2)")
        if levels < 1 or levels > 16:
            raise ConfigInvalid("cantor levels must lie in 1..16")
        dim = int(ambient_dim if ambient_dim is not None else factors)
        if factors < 1 or factors > dim:
            raise ConfigInvalid("factors must lie in 1..ambient_dim")
        super().__init__(dim)
        self.ratio = float(ratio)
        self.levels = int(levels)
        self.factors = int(factors)
        starts = np.array([0.0])
        scale = 1.0
        for _ in range(levels):
            starts = np.concatenate([starts, starts + (1.0 - ratio) * scale])
            scale *= ratio
        line = np.sort(starts + scale / 2.0)
        if factors == 1:
            cloud = np.zeros((line.size, dim))
            cloud[:, 0] = line
        else:
            grids = np.meshgrid(*([line] * factors), indexing="ij")
            cloud = np.zeros((line.size**factors, dim))
            for j, g in enumerate(grids):
                cloud[:, j] = g.ravel()
        self.points = cloud
        self._proxy = FinitePoints(cloud)

    def _dist(self, points):
        return self._proxy._dist(points)

    def nearest_point(self, x):
        return self._proxy.nearest_point(x)

    def bounding_box(self):
        return self._proxy.bounding_box()

    def sample_points(self, k):
        return self.points.copy()

    def nominal_dimension(self):
        return self.factors * math.log(2.0) / math.log(1.0 / self.ratio)

    def reach(self):
        return self._proxy.reach()

    def descriptor(self):
        return {
            "variant": self.variant,
            "dim": self.dim,
            "ratio": self.ratio,
            "levels": self.levels,
            "factors": self.factors,
        }


_VARIANTS = {
    cls.variant: cls for cls in (FinitePoints, Segment, Polyline, CircleInR3, Sphere, ProductCantor)
}


def set_from_descriptor(desc: dict) -> CompactSet:
    d = dict(desc)
    variant = d.pop("variant", None)
    if variant == FinitePoints.variant:
        return FinitePoints(d["points"])
    if variant == Segment.variant:
        return Segment(d["a"], d["b"])
    if variant == Polyline.variant:
        return Polyline(d["vertices"])
    if variant == CircleInR3.variant:
        return CircleInR3(d["radius"], d.get("center", (0, 0, 0)), d.get("normal", (0, 0, 1)))
    if variant == Sphere.variant:
        return Sphere(d["radius"], d.get("center"), d.get("dim", 3))
    if variant == ProductCantor.variant:
        return ProductCantor(d["ratio"], d["levels"], d.get("factors", 1), d.get("dim"))
    raise ConfigInvalid(f"unknown set variant {variant!r} (known: {sorted(_VARIANTS)})")


# ---------------------------------------------------------------------------
# Tube measure estimates.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TubeEstimate:
    value: float
    ci95: float
    samples: int
    box_volume: float


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    ci95: float
    radius: float
    h: float
    samples: int


@dataclass(frozen=True)
class LambdaFit:
    lambda_hat: float
    slope: float
    intercept: float
    r2: float
    radii: list[float]
    areas: list[float]
    cis: list[float]


@dataclass(frozen=True)
class AssouadEstimate:
    exponent: float
    r2: float
    records: list[tuple[float, float, int]] = field(default_factory=list)


def _mc_box(
    s: CompactSet, pad: float, predicate, n_samples: int, seed: int, workers: int, tag: str
) -> tuple[float, float, float]:
    """Hit fraction of `predicate(distances)` over the inflated bounding box.
    Returns (hit probability, its 95% CI, box volume)."""
    lo, hi = s.bounding_box()
    lo, hi = lo - pad, hi + pad
    vol_box = float(np.prod(hi - lo))
    per = [n_samples // workers + (1 if i < n_samples % workers else 0) for i in range(workers)]
    hits = 0
    for i, m in enumerate(per):
        rng = derive_rng(seed, tag, i, pad)
        done = 0
        while done < m:
            chunk = min(262_144, m - done)
            pts = rng.uniform(lo, hi, size=(chunk, s.dim))
            hits += int(np.count_nonzero(predicate(s._dist(pts))))
            done += chunk
    p = hits / n_samples
    ci = 1.96 * math.sqrt(max(p * (1.0 - p), 1e-300) / n_samples)
    return p, ci, vol_box


def tube_volume(
    s: CompactSet, r: float, n_samples: int = 1_000_000, seed: int = 0, workers: int = 1
) -> TubeEstimate:
    """|N_r(Sigma)| by hit-or-miss MC over the r-inflated bounding box."""
    if r <= 0:
        raise ConfigInvalid("tube radius must be positive")
    p, ci, vol_box = _mc_box(s, r, lambda d: d <= r, n_samples, seed, workers, "tube-volume")
    return TubeEstimate(p * vol_box, ci * vol_box, n_samples, vol_box)


def tube_boundary_area(
    s: CompactSet,
    r: float,
    h: float | None = None,
    n_samples: int = 400_000,
    seed: int = 0,
    workers: int = 1,
) -> AreaEstimate:
    """Surface area of the tube boundary via the symmetric volume-difference
    shell [vol(N_{r+h}) - vol(N_{r-h})] / (2h), counted in one pass."""
    if r <= 0:
        raise ConfigInvalid("tube radius must be positive")
    h = r / 50.0 if h is None else float(h)
    if not 0.0 < h < r:
        raise DegenerateShell("shell half-width must lie in (0, r)")
    p, ci, vol_box = _mc_box(
        s,
        r + h,
        lambda d: (d > r - h) & (d <= r + h),
        n_samples,
        seed,
        workers,
        f"tube-area-{r!r}",
    )
    if p * n_samples < 20:
        raise DegenerateShell(f"only {p * n_samples:.0f} shell hits at radius {r}")
    return AreaEstimate(p * vol_box / (2 * h), ci * vol_box / (2 * h), r, h, n_samples)


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_lambda(
    s: CompactSet,
    radii,
    n_samples: int = 400_000,
    seed: int = 0,
    workers: int = 1,
    min_r2: float = 0.9,
) -> LambdaFit:
    """lambda-hat = (n-1) - slope of log(boundary area) vs log(radius)."""
    radii = sorted(float(r) for r in radii)
    if len(radii) < 5 or radii[-1] / radii[0] < 99.0:
        raise ConfigInvalid("need >= 5 radii spanning >= 2 decades")
    areas, cis = [], []
    for r in radii:
        est = tube_boundary_area(s, r, n_samples=n_samples, seed=seed, workers=workers)
        areas.append(est.value)
        cis.append(est.ci95)
    slope, intercept, r2 = _linfit(np.log(np.asarray(radii)), np.log(np.asarray(areas)))
    if r2 < min_r2:
        raise FitUnstable(f"log-log area fit r2={r2:.3f} < {min_r2}")
    return LambdaFit((s.dim - 1) - slope, slope, intercept, r2, radii, areas, cis)


def greedy_cover_count(points: np.ndarray, r: float) -> int:
    """Greedy number of closed r-balls covering the given finite cloud."""
    m = points.shape[0]
    uncovered = np.ones(m, dtype=bool)
    count = 0
    while uncovered.any():
        i = int(np.argmax(uncovered))
        d = np.linalg.norm(points - points[i], axis=1)
        uncovered &= d > r
        count += 1
    return count


def assouad_estimate(
    s: CompactSet, scale_pairs, n_centers: int = 8, max_sample: int = 200_000
) -> AssouadEstimate:
    """Covering exponent: fit of log sup_c N(Sigma cap B_R(c), r) against
    log(R/r) over the supplied (r, R) pairs, centers greedy-sampled on Sigma."""
    pairs = [(float(r), float(R)) for r, R in scale_pairs]
    if len(pairs) < 2 or any(r >= R for r, R in pairs):
        raise ConfigInvalid("need >= 2 scale pairs with r < R")
    records: list[tuple[float, float, int]] = []
    for r, R in pairs:
        k = int(min(max_sample, max(64, 8.0 * s.diameter() / r if s.diameter() > 0 else 64)))
        sample = s.sample_points(k)
        centers = sample[:: max(1, len(sample) // n_centers)]
        best = 0
        for c in centers:
            local = sample[np.linalg.norm(sample - c, axis=1) <= R]
            if len(local):
                best = max(best, greedy_cover_count(local, r))
        if best == 0:
            raise DegenerateShell(f"no sample points within R={R} of any center")
        records.append((r, R, best))
    x = np.log([R / r for r, R, _ in records])
    y = np.log([max(c, 1) for _, _, c in records])
    slope, _, r2 = _linfit(x, y)
    return AssouadEstimate(slope, r2, records)
