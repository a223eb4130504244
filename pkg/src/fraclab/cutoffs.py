"""Cutoff families and the capacity test sequence.

Three constructions, all driven by the ramp profile S (0 below 1, 1 above 2)
or the unit bump mollifier:

* point-annulus: S(|x|/eps) * (1 - S(2|x|/R)), vanishing on the eps-ball and
  outside the R-ball, with a plateau in between;
* fermi tube: the same two-ramp profile composed with the distance to a
  positive-reach set, active in the normal directions only;
* mollified tube: 1 - (indicator of N_2eps convolved with rho_eps), exactly
  0 on N_eps and 1 off N_3eps.

Each cutoff carries certified derivative sup-norm bounds. "Certified" means:
a closed-form bound (chain/product rule over profile-derivative sups and
distance-derivative bounds, or Young's inequality for convolutions), with the
profile sups themselves taken from dense-grid maxima with first-order
inflation. The bounds are directional: deriv_bound(j) dominates
sup_x sup_{|e|=1} |d^j/dt^j eta(x + t e)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .errors import (
    ConfigInvalid,
    EpsTooLarge,
    ReachTooSmall,
    SigmaTooLarge,
    UnsupportedOrder,
)
from .fields import ProfileRadialField, RadialProfile, ScalarField
from .profiles import (
    bump,
    bump_cdf,
    bump_directional_l1,
    bump_radial_deriv,
    ramp_deriv,
    ramp_deriv_sup,
)
from .quadrature import gauss_nodes
from .sets import CompactSet, FinitePoints, set_from_descriptor

_BINOM = [[math.comb(j, i) for i in range(j + 1)] for j in range(7)]

# Directional-derivative bounds for the distance to a point: along any line,
# |d^m/dt^m |x + t e|| <= _DIST_DERIV_NUM[m] / |x|^{m-1}. The same constants
# bound distance derivatives to positive-reach sets with |x| replaced by the
# curvature margin (distance to the set and to the reach horizon).
_DIST_DERIV_NUM = {1: 1.0, 2: 1.0, 3: 3.0, 4: 15.0}


def _faa_di_bruno_bound(j: int, p: dict[int, float], d: dict[int, float]) -> float:
    """sup |d^j/dt^j P(d(x+te))| from sups of P^(k) and of distance derivatives."""
    if j == 1:
        return p[1] * d[1]
    if j == 2:
        return p[2] * d[1] ** 2 + p[1] * d[2]
    if j == 3:
        return p[3] * d[1] ** 3 + 3 * p[2] * d[1] * d[2] + p[1] * d[3]
    if j == 4:
        return (
            p[4] * d[1] ** 4
            + 6 * p[3] * d[1] ** 2 * d[2]
            + 3 * p[2] * d[2] ** 2
            + 4 * p[2] * d[1] * d[3]
            + p[1] * d[4]
        )
    raise UnsupportedOrder("derivative certificates cover orders 1..4")


def _dist_deriv_bounds(margin: float) -> dict[int, float]:
    return {m: _DIST_DERIV_NUM[m] / margin ** (m - 1) for m in (1, 2, 3, 4)}


def _corner_radius(cset: CompactSet) -> float:
    lo, hi = cset.bounding_box()
    corners = np.stack(np.meshgrid(*zip(lo, hi))).reshape(cset.dim, -1).T
    return float(np.max(np.linalg.norm(corners, axis=1)))


class TwoRampProfile(RadialProfile):
    """P(t) = S(a1 t) * (1 - S(a2 t + b2)): rise band then fall band."""

    max_order = 4

    def __init__(self, a1: float, a2: float, b2: float):
        self.a1, self.a2, self.b2 = float(a1), float(a2), float(b2)
        self.rise = (1.0 / self.a1, 2.0 / self.a1)
        self.fall = ((1.0 - self.b2) / self.a2, (2.0 - self.b2) / self.a2)
        if self.rise[1] >= self.fall[0]:
            raise ConfigInvalid("cutoff bands overlap; no plateau left")

    def value(self, r):
        r = np.asarray(r, dtype=np.float64)
        return ramp_deriv(self.a1 * r, 0) * (1.0 - ramp_deriv(self.a2 * r + self.b2, 0))

    def deriv(self, order, r):
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros_like(r)
        for i in range(order + 1):
            s_part = ramp_deriv(self.a1 * r, i) * self.a1**i
            m = order - i
            if m == 0:
                q_part = 1.0 - ramp_deriv(self.a2 * r + self.b2, 0)
            else:
                q_part = -ramp_deriv(self.a2 * r + self.b2, m) * self.a2**m
            out += _BINOM[order][i] * s_part * q_part
        return out

    def band_edges(self):
        return [self.rise[0], self.rise[1], self.fall[0], self.fall[1]]

    def bands(self):
        return [self.rise, self.fall]

    def deriv_sup_per_band(self, k: int) -> tuple[float, float]:
        """sup |P^(k)| over the rise band and over the fall band.

        The bands are separated, so on each band only one factor varies and
        the other is identically 1."""
        return ramp_deriv_sup(k) * self.a1**k, ramp_deriv_sup(k) * self.a2**k


class ComplementBumpProfile(RadialProfile):
    """Mollified-tube profile for a point in n=1, as a radial profile.

    P(r) = CDF((r - 2 eps)/eps) is the exact convolution of the indicator of
    [-2eps, 2eps] with rho_eps evaluated at radius r >= 0; `complement=True`
    gives 1 - P (equal to 1 near the origin), used by the capacity sequence.
    """

    max_order = 4

    def __init__(self, eps: float, complement: bool):
        if eps <= 0:
            raise ConfigInvalid("eps must be positive")
        self.eps = float(eps)
        self.complement = bool(complement)

    def _u(self, r):
        return np.asarray(r, dtype=np.float64) / self.eps - 2.0

    def value(self, r):
        v = bump_cdf(self._u(r))
        return 1.0 - v if self.complement else v

    def deriv(self, order, r):
        v = bump_radial_deriv(self._u(r), order - 1, n=1) / self.eps**order
        return -v if self.complement else v

    def band_edges(self):
        return [self.eps, 3.0 * self.eps]

    def bands(self):
        return [(self.eps, 3.0 * self.eps)]


class PointAnnulusCutoff(ProfileRadialField):
    """Radial cutoff vanishing on B_eps and outside B_R, 1 on [2eps, R/2]."""

    def __init__(self, eps: float, outer_radius: float, dim: int):
        if eps <= 0 or outer_radius <= 0:
            raise ConfigInvalid("scales must be positive")
        if eps >= outer_radius / 4.0:
            raise EpsTooLarge(f"need eps < outer_radius/4, got {eps} vs {outer_radius / 4}")
        prof = TwoRampProfile(1.0 / eps, 2.0 / outer_radius, 0.0)
        super().__init__(dim, prof, kind="point-annulus")
        self.eps = float(eps)
        self.outer_radius = float(outer_radius)
        self.set: CompactSet | None = None
        self.support_radius = self.outer_radius
        self.length_scale = self.eps
        self.params = {"eps": self.eps, "outer_radius": self.outer_radius}

    def deriv_bound(self, j: int) -> float:
        prof: TwoRampProfile = self.profile
        best = 0.0
        for band, (lo, _hi) in zip(("rise", "fall"), prof.bands()):
            idx = 0 if band == "rise" else 1
            p = {k: prof.deriv_sup_per_band(k)[idx] for k in range(1, j + 1)}
            d = _dist_deriv_bounds(lo)
            best = max(best, _faa_di_bruno_bound(j, p, d))
        return best

    def descriptor(self):
        return {"kind": self.kind, "dim": self.dim, **self.params}


class DistanceProfileField(ScalarField):
    """eta(x) = P(d(x)) for a 1-D profile P and the distance d to a set."""

    def __init__(self, dim: int, profile: RadialProfile, cset: CompactSet, kind: str):
        super().__init__(dim)
        self.kind = kind
        self.profile = profile
        self.set = cset
        self.radial = cset.is_origin_point()
        self.decay_hint = math.inf
        self.support_radius = _corner_radius(cset) + max(hi for _lo, hi in profile.bands())

    def eval(self, x):
        d = self.set.distance(x)
        if np.isscalar(d) or np.ndim(d) == 0:
            return float(self.profile.value(np.array([d]))[0])
        return self.profile.value(np.asarray(d))

    def eval_radial(self, r):
        if not self.radial:
            raise UnsupportedOrder(f"{self.kind} is not radial")
        return self.profile.value(np.asarray(r, dtype=np.float64))

    def feature_radii(self):
        if not self.radial:
            return []
        return self.profile.band_edges()

    def plateau_radius(self, x):
        d = float(self.set.distance(np.asarray(x, dtype=np.float64)))
        gaps = [
            (lo - d) if d < lo else ((d - hi) if d > hi else 0.0)
            for lo, hi in self.profile.bands()
        ]
        return min(gaps, default=math.inf)

    def kink_radii(self, x):
        # Band edges of the profile sit at distance values b; the distance
        # to the set over a sphere of radius s about x sweeps the interval
        # [max(d - s, 0), d + s], so the sphere average can lose smoothness
        # at s = |d - b| and s = d + b.
        d = float(self.set.distance(np.asarray(x, dtype=np.float64)))
        out = set()
        for lo, hi in self.profile.bands():
            out.update((abs(d - lo), abs(d - hi), d + lo, d + hi))
        return sorted(t for t in out if t > 0.0)


class FermiCutoff(DistanceProfileField):
    """Tube cutoff through the distance function: 0 on {d <= eps} and
    {d >= 3 rho}, 1 on the band {2 eps <= d <= 2 rho}."""

    def __init__(self, cset: CompactSet, eps: float, rho: float):
        if eps <= 0 or rho <= 0:
            raise ConfigInvalid("scales must be positive")
        if eps >= rho / 4.0:
            raise EpsTooLarge(f"need eps < rho/4, got {eps} vs {rho / 4}")
        if cset.reach() < 4.0 * rho:
            raise ReachTooSmall(
                f"set reach {cset.reach():g} below 4*rho = {4 * rho:g}"
            )
        prof = TwoRampProfile(1.0 / eps, 1.0 / rho, -1.0)
        super().__init__(cset.dim, prof, cset, kind="manifold-fermi")
        self.eps = float(eps)
        self.rho = float(rho)
        self.length_scale = self.eps
        m = cset.nominal_dimension()
        self.codim = self.dim - int(round(m)) if abs(m - round(m)) < 1e-9 else None
        self.params = {"eps": self.eps, "rho": self.rho}

    def outer_factor(self, d) -> np.ndarray:
        """The plateau envelope eta2(d) = 1 - S(d/rho - 1) alone."""
        return 1.0 - ramp_deriv(np.asarray(d, dtype=np.float64) / self.rho - 1.0, 0)

    def descriptor(self):
        return {
            "kind": self.kind,
            "set": self.set.descriptor(),
            "eps": self.eps,
            "rho": self.rho,
        }

    def deriv_bound(self, j: int) -> float:
        prof: TwoRampProfile = self.profile
        best = 0.0
        reach = self.set.reach()
        for idx, (lo, hi) in enumerate(prof.bands()):
            p = {k: prof.deriv_sup_per_band(k)[idx] for k in range(1, j + 1)}
            margin = lo if math.isinf(reach) else min(lo, reach - hi)
            d = _dist_deriv_bounds(margin)
            best = max(best, _faa_di_bruno_bound(j, p, d))
        return best


class MollifiedTubeCutoff(ScalarField):
    """eta(x) = 1 - integral of rho_eps(x - y) over N_2eps(set).

    Exactly 0 where d <= eps and exactly 1 where d >= 3 eps by support
    arithmetic; in between the convolution is evaluated by a tensor Gauss
    rule over the cube circumscribing B_eps(x) (n <= 3). `complement=True`
    flips the orientation to the capacity test function, 1 near the set.
    """

    def __init__(self, cset: CompactSet, eps: float, complement: bool = False, nodes_per_axis: int = 32):
        super().__init__(cset.dim)
        if eps <= 0:
            raise ConfigInvalid("eps must be positive")
        self.kind = "tube-bump" if complement else "mollified-tube"
        self.set = cset
        self.eps = float(eps)
        self.complement = bool(complement)
        self.nodes_per_axis = int(nodes_per_axis)
        self.radial = cset.is_origin_point()
        self.decay_hint = math.inf
        self.length_scale = self.eps
        self.support_radius = _corner_radius(cset) + 3.0 * self.eps
        self.far_constant = 0.0 if complement else 1.0
        self._offsets, self._weights = self._build_rule()

    def _build_rule(self):
        x, w = gauss_nodes(self.nodes_per_axis)
        pts = [x * self.eps] * self.dim
        wts = [w * self.eps] * self.dim
        mesh = np.meshgrid(*pts, indexing="ij")
        offsets = np.stack([m.ravel() for m in mesh], axis=1)
        weight = np.ones(offsets.shape[0])
        for i in range(self.dim):
            weight *= np.meshgrid(*wts, indexing="ij")[i].ravel()
        r = np.linalg.norm(offsets, axis=1)
        dens = bump(r / self.eps, self.dim) / self.eps**self.dim
        keep = dens > 0.0
        return offsets[keep], (weight * dens)[keep]

    def _convolved(self, pts: np.ndarray) -> np.ndarray:
        # mass of rho_eps(x - .) over N_2eps, for each row of pts
        out = np.empty(pts.shape[0])
        block = max(1, 2_000_000 // max(1, self._offsets.shape[0]))
        for i in range(0, pts.shape[0], block):
            chunk = pts[i : i + block]
            y = chunk[:, None, :] + self._offsets[None, :, :]
            d = self.set.distance(y.reshape(-1, self.dim)).reshape(chunk.shape[0], -1)
            out[i : i + block] = (d <= 2.0 * self.eps) @ self._weights
        return out

    def eval(self, x):
        arr = np.asarray(x, dtype=np.float64)
        single = arr.ndim == 1
        pts = arr.reshape(-1, self.dim)
        d = np.atleast_1d(self.set.distance(pts))
        vals = np.empty(pts.shape[0])
        inner = d <= self.eps
        outer = d >= 3.0 * self.eps
        mid = ~(inner | outer)
        vals[inner] = 1.0
        vals[outer] = 0.0
        if np.any(mid):
            if self.dim == 1 and isinstance(self.set, FinitePoints):
                vals[mid] = self._mass_1d(pts[mid, 0])
            else:
                vals[mid] = np.clip(self._convolved(pts[mid]), 0.0, 1.0)
        eta = vals if self.complement else 1.0 - vals
        if single:
            return float(eta[0])
        return eta.reshape(arr.shape[:-1])

    def _mass_1d(self, xs: np.ndarray) -> np.ndarray:
        # exact convolution in n=1: sum of CDF differences over the intervals
        total = np.zeros_like(xs)
        for p in self.set.points[:, 0]:
            u = (xs - p) / self.eps
            total += bump_cdf(u + 2.0) - bump_cdf(u - 2.0)
        return np.clip(total, 0.0, 1.0)

    def eval_radial(self, r):
        if not self.radial:
            raise UnsupportedOrder(f"{self.kind} is not radial")
        r = np.asarray(r, dtype=np.float64)
        pts = np.zeros(r.shape + (self.dim,))
        pts[..., 0] = r
        return np.atleast_1d(self.eval(pts))

    def feature_radii(self):
        if not self.radial:
            return []
        return [self.eps, 3.0 * self.eps]

    def plateau_radius(self, x):
        d = float(self.set.distance(np.asarray(x, dtype=np.float64)))
        if d <= self.eps:
            return self.eps - d if d < self.eps else 0.0
        if d >= 3.0 * self.eps:
            return d - 3.0 * self.eps
        return 0.0

    def kink_radii(self, x):
        # The mollified profile is smooth; these are panel hints marking
        # where the sphere about x first meets the transition shell.
        d = float(self.set.distance(np.asarray(x, dtype=np.float64)))
        out = {abs(d - self.eps), abs(d - 3.0 * self.eps), d + self.eps}
        return sorted(t for t in out if t > 0.0)

    def deriv_bound(self, j: int) -> float:
        if not 1 <= j <= 4:
            raise UnsupportedOrder("derivative certificates cover orders 1..4")
        return bump_directional_l1(j, self.dim) / self.eps**j

    def descriptor(self):
        return {"kind": self.kind, "set": self.set.descriptor(), "eps": self.eps}


def point_cutoff(eps: float, outer_radius: float, dim: int = 1) -> PointAnnulusCutoff:
    return PointAnnulusCutoff(eps, outer_radius, dim)


def manifold_cutoff(cset: CompactSet, eps: float, rho: float) -> FermiCutoff:
    return FermiCutoff(cset, eps, rho)


def tube_cutoff(cset: CompactSet, eps: float, **kw) -> ScalarField:
    """Mollified tube cutoff; for a single point in n=1 the convolution is
    closed-form and the result is a radial profile field (same values)."""
    if cset.dim == 1 and cset.is_origin_point():
        f = ProfileRadialField(1, ComplementBumpProfile(eps, complement=False), kind="mollified-tube")
        f.set = cset
        f.eps = float(eps)
        f.length_scale = eps
        f.support_radius = 3.0 * eps
        f.far_constant = 1.0
        f.deriv_bound = lambda j: bump_directional_l1(j, 1) / eps**j
        f.descriptor = lambda: {"kind": f.kind, "set": cset.descriptor(), "eps": float(eps)}
        return f
    return MollifiedTubeCutoff(cset, eps, complement=False, **kw)


def tube_bump(cset: CompactSet, eps: float, **kw) -> ScalarField:
    """Complement orientation: 1 on N_eps, 0 off N_3eps (capacity member)."""
    if cset.dim == 1 and cset.is_origin_point():
        f = ProfileRadialField(1, ComplementBumpProfile(eps, complement=True), kind="tube-bump")
        f.set = cset
        f.eps = float(eps)
        f.support_radius = 3.0 * eps
        f.length_scale = eps
        f.deriv_bound = lambda j: bump_directional_l1(j, 1) / eps**j
        f.descriptor = lambda: {"kind": f.kind, "set": cset.descriptor(), "eps": float(eps)}
        return f
    return MollifiedTubeCutoff(cset, eps, complement=True, **kw)


class WeightedSumField(ScalarField):
    """sum_i c_i f_i with shared dimension (capacity combinations)."""

    kind = "weighted-sum"

    def __init__(self, coeffs, children):
        dims = {f.dim for f in children}
        if len(dims) != 1 or len(coeffs) != len(children):
            raise ConfigInvalid("weighted sum needs matched coefficients and a common dimension")
        super().__init__(dims.pop())
        self.coeffs = [float(c) for c in coeffs]
        self.children = list(children)
        self.radial = all(f.radial for f in children)
        supports = [f.support_radius for f in children]
        self.support_radius = None if any(s is None for s in supports) else max(supports)
        self.far_constant = float(
            sum(c * f.far_constant for c, f in zip(self.coeffs, children))
        )
        self.decay_hint = math.inf if self.support_radius is not None else None
        self.length_scale = min(f.length_scale for f in children)

    def eval(self, x):
        return sum(c * f.eval(x) for c, f in zip(self.coeffs, self.children))

    def eval_radial(self, r):
        if not self.radial:
            raise UnsupportedOrder("weighted sum is not radial")
        return sum(c * f.eval_radial(r) for c, f in zip(self.coeffs, self.children))

    def feature_radii(self):
        out: list[float] = []
        for f in self.children:
            out.extend(f.feature_radii())
        return sorted(set(out))

    def plateau_radius(self, x):
        return min(f.plateau_radius(x) for f in self.children)

    def kink_radii(self, x):
        out = set()
        for f in self.children:
            out.update(f.kink_radii(x))
        return sorted(out)


@dataclass
class CapacitySequence:
    """The test sequence psi_k = (1/S_k) sum_{l<=k} eta_{eps_l} / l."""

    cset: CompactSet
    sigma: float
    k_max: int
    eps_schedule: list[float]
    s_values: list[float]
    s_fractions: list[Fraction]
    members: list[ScalarField]
    psi: list[ScalarField] = dc_field(default_factory=list)

    def __post_init__(self):
        if not self.psi:
            for k in range(1, self.k_max + 1):
                coeffs = [1.0 / (self.s_values[k - 1] * (ell + 1)) for ell in range(k)]
                self.psi.append(WeightedSumField(coeffs, self.members[:k]))


def capacity_sequence(
    cset: CompactSet,
    sigma: float,
    k_max: int,
    schedule_rule: str = "factorial",
    eps0: float = 0.05,
) -> CapacitySequence:
    """Build psi_1..psi_k from tube-bump members at scales eps_l = eps0 / l!.

    The shrinking factorial schedule realizes the pairwise ratio condition
    min(eps_l/eps_m, eps_m/eps_l) <= min(1/l, 1/m): for l < m the ratio is
    l!/m! <= 1/m. Requires sigma <= (n - lambda)/2 for the set's nominal
    dimension lambda, the feasibility window for zero capacity.
    """
    if k_max < 1 or k_max > 8:
        raise ConfigInvalid("k_max must lie in 1..8")
    if schedule_rule != "factorial":
        raise ConfigInvalid("only the factorial schedule is implemented")
    lam = cset.nominal_dimension()
    if sigma > (cset.dim - lam) / 2.0 + 1e-12:
        raise SigmaTooLarge(
            f"sigma = {sigma:g} exceeds (n - lambda)/2 = {(cset.dim - lam) / 2:g}"
        )
    eps = [eps0 / math.factorial(ell) for ell in range(1, k_max + 1)]
    s_frac = []
    acc = Fraction(0)
    for ell in range(1, k_max + 1):
        acc += Fraction(1, ell)
        s_frac.append(acc)
    members = [tube_bump(cset, e) for e in eps]
    return CapacitySequence(
        cset=cset,
        sigma=float(sigma),
        k_max=int(k_max),
        eps_schedule=eps,
        s_values=[float(s) for s in s_frac],
        s_fractions=s_frac,
        members=members,
    )


def cutoff_from_descriptor(desc: dict) -> ScalarField:
    d = dict(desc)
    kind = d.get("kind")
    if kind == "point-annulus":
        return point_cutoff(d["eps"], d["outer_radius"], d.get("dim", 1))
    if kind == "manifold-fermi":
        return manifold_cutoff(set_from_descriptor(d["set"]), d["eps"], d["rho"])
    if kind == "mollified-tube":
        return tube_cutoff(set_from_descriptor(d["set"]), d["eps"])
    if kind == "tube-bump":
        return tube_bump(set_from_descriptor(d["set"]), d["eps"])
    raise ConfigInvalid(f"unknown cutoff kind {kind!r}")
