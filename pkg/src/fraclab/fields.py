"""Scalar-field catalog and field-level operations.

Smooth radial kinds carry a symbolic profile g(t) in t = |x|^2, so radial
Laplacians stay polynomial in the same representation (Delta f corresponds to
2n g' + 4t g'', no removable 1/r singularities) and coordinate derivatives of
any multi-index come from symbolic differentiation with cached vectorized
evaluators. Ramp-built kinds (plateaus and cutoff profiles) instead carry a
1-D radial profile with analytic derivative tables.

Decay metadata drives quadrature tails: `decay_hint` is rho with
f ~ |x|^(-rho) at infinity (math.inf for super-polynomial decay), and
`support_radius` is an exact truncation radius when the field has compact
support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .errors import (
    ConfigInvalid,
    EvalAtSingularity,
    NotSmoothAtPoint,
    UnsupportedOrder,
)
from .profiles import ramp_deriv, sphere_area
from .quadrature import Panel, derive_rng, integrate_panels, split_panels_at

_T = sp.Symbol("t", nonnegative=True)
_EPS = float(np.finfo(np.float64).eps)

_LAMBDA_CACHE: dict = {}


def _lambdify_cached(key, args, expr):
    fn = _LAMBDA_CACHE.get(key)
    if fn is None:
        fn = sp.lambdify(args, expr, modules="numpy")
        _LAMBDA_CACHE[key] = fn
    return fn


class ScalarField:
    """Common interface consumed by the operator and verification layers."""

    kind: str = "abstract"

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigInvalid("field dimension must be >= 1")
        self.dim = int(dim)
        self.radial = False
        self.decay_hint: float | None = None
        # f(x) == far_constant exactly for |x| > support_radius (when set).
        self.support_radius: float | None = None
        self.far_constant: float = 0.0
        self.length_scale: float = 1.0

    # -- evaluation ---------------------------------------------------------

    def eval(self, x) -> np.ndarray:
        raise NotImplementedError

    __call__ = None  # set below

    def eval_radial(self, r) -> np.ndarray:
        if not self.radial:
            raise UnsupportedOrder(f"{self.kind} is not radial")
        r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
        pts = np.zeros((r_arr.size, self.dim))
        pts[:, 0] = r_arr.ravel()
        vals = np.atleast_1d(np.asarray(self.eval(pts), dtype=np.float64))
        return vals.reshape(np.shape(r)) if np.ndim(r) else float(vals[0])

    # -- analytic structure --------------------------------------------------

    def neg_laplacian(self) -> "ScalarField":
        """(-Delta) applied once, as a new field."""
        raise UnsupportedOrder(f"{self.kind} has no analytic Laplacian")

    def derivative_analytic(self, x, alpha: tuple[int, ...]) -> float:
        raise UnsupportedOrder(f"{self.kind} has no analytic derivatives")

    # -- quadrature metadata --------------------------------------------------

    def feature_radii(self) -> list[float]:
        """Radii (about the origin) of spheres across which the field is not
        analytic; quadrature panels are aligned to them."""
        return []

    def singular_radii(self) -> list[float]:
        """Subset of feature radii carrying genuine singularities that need
        dyadic panel refinement."""
        return []

    def plateau_radius(self, x) -> float:
        """Radius of a ball about x on which the field is certified constant
        (0.0 when unknown)."""
        return 0.0

    def kink_radii(self, x) -> list[float]:
        """Radii s at which the sphere average of the field over S_s(x) may
        lose analyticity: tangency radii of feature spheres."""
        q = float(np.linalg.norm(np.asarray(x, dtype=np.float64)))
        out = set()
        for rho in self.feature_radii():
            out.update((abs(q - rho), q + rho))
        return sorted(t for t in out if t > 0.0)

    def singular_kink_radii(self, x) -> list[float]:
        q = float(np.linalg.norm(np.asarray(x, dtype=np.float64)))
        out = set()
        for rho in self.singular_radii():
            out.update((abs(q - rho), q + rho))
        return sorted(t for t in out if t > 0.0)

    def descriptor(self) -> dict:
        raise ConfigInvalid(f"{self.kind} has no serializable descriptor")


def _call(self, x):
    return self.eval(x)


ScalarField.__call__ = _call


def _norms_sq(x, dim) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        if arr.size != dim:
            raise ValueError(f"point of dimension {arr.size}, field lives in R^{dim}")
        return np.einsum("i,i->", arr, arr)[None] if False else np.array([arr @ arr]), True
    if arr.shape[-1] != dim:
        raise ValueError(f"points of dimension {arr.shape[-1]}, field lives in R^{dim}")
    flat = arr.reshape(-1, dim)
    return np.einsum("ij,ij->i", flat, flat), False


class SympyRadialField(ScalarField):
    """Radial field defined by a symbolic profile g(t), t = |x|^2."""

    def __init__(
        self,
        dim: int,
        profile_t: sp.Expr,
        kind: str = "radial",
        decay_hint: float | None = None,
        singular_origin: bool = False,
        params: dict | None = None,
    ):
        super().__init__(dim)
        self.kind = kind
        self.radial = True
        self.profile_t = sp.simplify(profile_t)
        self.decay_hint = decay_hint
        self._singular_origin = bool(singular_origin)
        self.params = dict(params or {})
        self._children: list["ScalarField"] | None = None
        self._key = (sp.srepr(self.profile_t), dim)

    # evaluation

    def eval_radial(self, r):
        r_arr = np.asarray(r, dtype=np.float64)
        t_vals = r_arr * r_arr
        if self._singular_origin and np.any(t_vals == 0.0):
            raise EvalAtSingularity(f"{self.kind} is singular at the origin")
        fn = _lambdify_cached(("t", *self._key), _T, self.profile_t)
        out = fn(t_vals)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), r_arr.shape).copy()

    def eval(self, x):
        t_vals, single = _norms_sq(x, self.dim)
        vals = self.eval_radial(np.sqrt(t_vals))
        if single:
            return float(vals[0])
        return vals.reshape(np.shape(x)[:-1])

    # analytic structure

    def neg_laplacian(self):
        g = self.profile_t
        lap = 2 * self.dim * sp.diff(g, _T) + 4 * _T * sp.diff(g, _T, 2)
        decay = None if self.decay_hint is None else self.decay_hint + 2.0
        if self.decay_hint == math.inf:
            decay = math.inf
        return SympyRadialField(
            self.dim,
            -lap,
            kind=f"neg-laplacian({self.kind})",
            decay_hint=decay,
            singular_origin=self._singular_origin,
        )

    def derivative_analytic(self, x, alpha):
        x = np.asarray(x, dtype=np.float64)
        if self._singular_origin and float(x @ x) == 0.0:
            raise EvalAtSingularity(f"{self.kind} is singular at the origin")
        syms = sp.symbols(f"x0:{self.dim}", real=True)
        key = ("deriv", *self._key, tuple(alpha))
        fn = _LAMBDA_CACHE.get(key)
        if fn is None:
            expr = self.profile_t.subs(_T, sum(s**2 for s in syms))
            for s, k in zip(syms, alpha):
                if k:
                    expr = sp.diff(expr, s, int(k))
            fn = sp.lambdify(syms, expr, modules="numpy")
            _LAMBDA_CACHE[key] = fn
        return float(fn(*x))

    def singular_radii(self):
        return [0.0] if self._singular_origin else []

    def feature_radii(self):
        return self.singular_radii()

    def descriptor(self):
        if self.kind in _CATALOG_BUILDERS:
            return {"kind": self.kind, "dim": self.dim, **self.params}
        if self.kind in ("sum", "product") and self._children:
            return {
                "kind": self.kind,
                "dim": self.dim,
                "children": [c.descriptor() for c in self._children],
            }
        raise ConfigInvalid(f"{self.kind} has no serializable descriptor")


# ---------------------------------------------------------------------------
# Catalog kinds.
# ---------------------------------------------------------------------------


def PowerLaw(alpha: float, dim: int) -> SympyRadialField:
    """|x|^(-alpha)."""
    if alpha <= 0:
        raise ConfigInvalid("power-law exponent must be positive")
    f = SympyRadialField(
        dim,
        _T ** (-sp.Float(alpha) / 2),
        kind="power-law",
        decay_hint=float(alpha),
        singular_origin=True,
        params={"alpha": float(alpha)},
    )
    return f


def ShiftedPower(rho: float, dim: int) -> SympyRadialField:
    """(1 + |x|^2)^(-rho/2)."""
    return SympyRadialField(
        dim,
        (1 + _T) ** (-sp.Float(rho) / 2),
        kind="shifted-power",
        decay_hint=float(rho),
        params={"rho": float(rho)},
    )


def Bubble(sigma: float, dim: int) -> SympyRadialField:
    """(1 + |x|^2)^(-(n-2*sigma)/2), the profile sent to a pure power of
    itself by the order-sigma operator."""
    if not 0.0 < sigma < dim / 2.0:
        raise ConfigInvalid("bubble order must lie in (0, n/2)")
    f = SympyRadialField(
        dim,
        (1 + _T) ** (-(sp.Integer(dim) - 2 * sp.Float(sigma)) / 2),
        kind="bubble",
        decay_hint=float(dim - 2 * sigma),
        params={"sigma": float(sigma)},
    )
    return f


def Gaussian(dim: int, width: float = 1.0) -> SympyRadialField:
    """exp(-|x|^2 / (2 width^2))."""
    if width <= 0:
        raise ConfigInvalid("gaussian width must be positive")
    return SympyRadialField(
        dim,
        sp.exp(-_T / (2 * sp.Float(width) ** 2)),
        kind="gaussian",
        decay_hint=math.inf,
        params={"width": float(width)},
    )


def Polynomial(coeffs, dim: int) -> SympyRadialField:
    """Radial polynomial sum_j c_j |x|^(2j) with coeffs = [c_0, c_1, ...]."""
    coeffs = [float(c) for c in coeffs]
    expr = sum(sp.Float(c) * _T**j for j, c in enumerate(coeffs))
    deg = max((j for j, c in enumerate(coeffs) if c != 0.0), default=0)
    return SympyRadialField(
        dim,
        sp.sympify(expr),
        kind="polynomial",
        decay_hint=float(-2 * deg),
        params={"coeffs": coeffs},
    )


def Constant(c: float, dim: int) -> SympyRadialField:
    f = SympyRadialField(
        dim, sp.Float(c) + 0 * _T, kind="constant", decay_hint=math.inf, params={"c": float(c)}
    )
    f.far_constant = float(c)
    f.support_radius = 0.0
    return f


class BallIndicator(ScalarField):
    """Indicator of the closed ball of the given radius about the origin."""

    kind = "ball-indicator"

    def __init__(self, radius: float, dim: int):
        super().__init__(dim)
        if radius <= 0:
            raise ConfigInvalid("ball radius must be positive")
        self.radius = float(radius)
        self.radial = True
        self.decay_hint = math.inf
        self.support_radius = self.radius
        self.length_scale = self.radius

    def eval_radial(self, r):
        r_arr = np.asarray(r, dtype=np.float64)
        return (r_arr <= self.radius).astype(np.float64)

    def eval(self, x):
        t_vals, single = _norms_sq(x, self.dim)
        vals = (t_vals <= self.radius**2).astype(np.float64)
        return float(vals[0]) if single else vals.reshape(np.shape(x)[:-1])

    def derivative_analytic(self, x, alpha):
        x = np.asarray(x, dtype=np.float64)
        r = float(np.linalg.norm(x))
        if abs(r - self.radius) <= 1e-9:
            raise NotSmoothAtPoint("ball indicator is discontinuous across its boundary")
        return 0.0 if sum(alpha) > 0 else self.eval(x)

    def feature_radii(self):
        return [self.radius]

    def singular_radii(self):
        return [self.radius]

    def plateau_radius(self, x):
        r = float(np.linalg.norm(np.asarray(x, dtype=np.float64)))
        return abs(r - self.radius)

    def descriptor(self):
        return {"kind": self.kind, "dim": self.dim, "radius": self.radius}


class RadialProfile:
    """1-D profile P(r) with derivative tables, for ramp-built fields."""

    max_order = 4

    def value(self, r) -> np.ndarray:
        raise NotImplementedError

    def deriv(self, order: int, r) -> np.ndarray:
        raise NotImplementedError

    def band_edges(self) -> list[float]:
        raise NotImplementedError

    def bands(self) -> list[tuple[float, float]]:
        """Closed intervals outside which the profile is locally constant."""
        raise NotImplementedError


class ProfileRadialField(ScalarField):
    """Radial field r -> P(|x|) for a profile with plateau structure.

    Profiles are constant near the origin (all our ramp constructions are),
    which makes the radial Laplacian formula P'' + (n-1) P'/r safe at r = 0.
    """

    kind = "profile-radial"

    def __init__(self, dim: int, profile: RadialProfile, kind: str | None = None):
        super().__init__(dim)
        if kind:
            self.kind = kind
        self.profile = profile
        self.radial = True
        self.decay_hint = math.inf
        self.params: dict = {}

    def eval_radial(self, r):
        return self.profile.value(np.asarray(r, dtype=np.float64))

    def eval(self, x):
        t_vals, single = _norms_sq(x, self.dim)
        vals = self.eval_radial(np.sqrt(t_vals))
        return float(vals[0]) if single else vals.reshape(np.shape(x)[:-1])

    def neg_laplacian(self):
        return ProfileRadialField(
            self.dim, _NegLaplacianProfile(self.profile, self.dim), kind=f"neg-laplacian({self.kind})"
        )

    def derivative_analytic(self, x, alpha):
        order = int(sum(alpha))
        if order == 0:
            return self.eval(x)
        raise UnsupportedOrder("profile fields use the finite-difference fallback")

    def feature_radii(self):
        return self.profile.band_edges()

    def plateau_radius(self, x):
        r = float(np.linalg.norm(np.asarray(x, dtype=np.float64)))
        gaps = [abs(r - lo) if r < lo else (abs(r - hi) if r > hi else 0.0) for lo, hi in self.profile.bands()]
        return min(gaps, default=math.inf)

    def descriptor(self):
        if self.kind in _CATALOG_BUILDERS and self.params:
            return {"kind": self.kind, "dim": self.dim, **self.params}
        raise ConfigInvalid(f"{self.kind} has no serializable descriptor")


class _NegLaplacianProfile(RadialProfile):
    """-(P'' + (n-1) P'/r), with derivative formulas up to order 2."""

    def __init__(self, parent: RadialProfile, dim: int):
        self.parent = parent
        self.dim = dim
        self.max_order = max(0, parent.max_order - 2)

    def _safe_inv(self, r, power=1):
        r_arr = np.asarray(r, dtype=np.float64)
        with np.errstate(divide="ignore"):
            inv = np.where(r_arr > 0.0, 1.0 / np.maximum(r_arr, 1e-300) ** power, 0.0)
        return inv

    def value(self, r):
        c = self.dim - 1
        # P'(0) = 0 on the plateau, so the 1/r term vanishes where it's unsafe.
        return -(self.parent.deriv(2, r) + c * self.parent.deriv(1, r) * self._safe_inv(r))

    def deriv(self, order, r):
        c = self.dim - 1
        p = self.parent
        if order == 1 and p.max_order >= 3:
            return -(
                p.deriv(3, r)
                + c * (p.deriv(2, r) * self._safe_inv(r) - p.deriv(1, r) * self._safe_inv(r, 2))
            )
        if order == 2 and p.max_order >= 4:
            return -(
                p.deriv(4, r)
                + c
                * (
                    p.deriv(3, r) * self._safe_inv(r)
                    - 2 * p.deriv(2, r) * self._safe_inv(r, 2)
                    + 2 * p.deriv(1, r) * self._safe_inv(r, 3)
                )
            )
        raise UnsupportedOrder("derived profile supports two orders beyond the Laplacian")

    def band_edges(self):
        return self.parent.band_edges()

    def bands(self):
        return self.parent.bands()


class MollifiedIndicatorProfile(RadialProfile):
    """1 on [0, a], 0 on [b, inf), one ramp transition in between."""

    def __init__(self, a: float, b: float):
        if not 0.0 < a < b:
            raise ConfigInvalid("need 0 < inner radius < outer radius")
        self.a, self.b = float(a), float(b)
        self.width = self.b - self.a

    def _u(self, r):
        return 1.0 + (np.asarray(r, dtype=np.float64) - self.a) / self.width

    def value(self, r):
        return 1.0 - ramp_deriv(self._u(r), 0)

    def deriv(self, order, r):
        return -ramp_deriv(self._u(r), order) / self.width**order

    def band_edges(self):
        return [self.a, self.b]

    def bands(self):
        return [(self.a, self.b)]


def MollifiedIndicator(inner_radius: float, outer_radius: float, dim: int) -> ProfileRadialField:
    """Smooth plateau: 1 on the inner ball, 0 outside the outer ball."""
    prof = MollifiedIndicatorProfile(inner_radius, outer_radius)
    f = ProfileRadialField(dim, prof, kind="mollified-indicator")
    f.support_radius = prof.b
    f.length_scale = prof.width
    f.params = {"inner_radius": prof.a, "outer_radius": prof.b}
    return f


class CompositeField(ScalarField):
    """Pointwise sum or product of fields on the same space."""

    def __init__(self, op: str, children: list[ScalarField]):
        if op not in ("sum", "product"):
            raise ConfigInvalid("composite op must be 'sum' or 'product'")
        dims = {f.dim for f in children}
        if len(dims) != 1:
            raise ConfigInvalid("composite children must share a dimension")
        super().__init__(dims.pop())
        if not children:
            raise ConfigInvalid("composite needs at least one child")
        self.op = op
        self.kind = op
        self.children = list(children)
        self.radial = all(f.radial for f in children)
        decays = [f.decay_hint for f in children]
        supports = [f.support_radius for f in children]
        all_cover = None if any(s is None for s in supports) else max(supports)
        if op == "sum":
            self.decay_hint = None if any(d is None for d in decays) else min(decays)
            self.far_constant = float(sum(f.far_constant for f in children))
            self.support_radius = all_cover
        else:
            self.decay_hint = None if any(d is None for d in decays) else float(sum(decays))
            far = 1.0
            for f in children:
                far *= f.far_constant
            self.far_constant = far
            # Beyond every child's radius the product is the product of the
            # far constants; a factor that is exactly 0 beyond its own radius
            # kills the product earlier than that.
            candidates = [] if all_cover is None else [all_cover]
            candidates += [
                s
                for f, s in zip(children, supports)
                if s is not None and f.far_constant == 0.0
            ]
            self.support_radius = min(candidates) if candidates else None
        self.length_scale = min(f.length_scale for f in children)

    def _combine(self, pieces):
        out = pieces[0]
        for p in pieces[1:]:
            out = out + p if self.op == "sum" else out * p
        return out

    def eval(self, x):
        return self._combine([f.eval(x) for f in self.children])

    def eval_radial(self, r):
        if not self.radial:
            raise UnsupportedOrder("composite is not radial")
        return self._combine([f.eval_radial(r) for f in self.children])

    def neg_laplacian(self):
        if self.op == "sum":
            return CompositeField("sum", [f.neg_laplacian() for f in self.children])
        raise UnsupportedOrder("products have no closed Laplacian here")

    def feature_radii(self):
        out: list[float] = []
        for f in self.children:
            out.extend(f.feature_radii())
        return sorted(set(out))

    def singular_radii(self):
        out: list[float] = []
        for f in self.children:
            out.extend(f.singular_radii())
        return sorted(set(out))

    def plateau_radius(self, x):
        if self.op == "product":
            # Constant where every factor is constant.
            return min(f.plateau_radius(x) for f in self.children)
        return min(f.plateau_radius(x) for f in self.children)

    def descriptor(self):
        return {
            "kind": self.op,
            "dim": self.dim,
            "children": [f.descriptor() for f in self.children],
        }


def sum_fields(*children: ScalarField) -> ScalarField:
    sympy_kids = [f for f in children if isinstance(f, SympyRadialField)]
    if len(sympy_kids) == len(children):
        expr = sum(f.profile_t for f in sympy_kids)
        decays = [f.decay_hint for f in children]
        out = SympyRadialField(
            children[0].dim,
            expr,
            kind="sum",
            decay_hint=None if any(d is None for d in decays) else min(decays),
            singular_origin=any(f._singular_origin for f in sympy_kids),
        )
        out._children = list(children)
        return out
    return CompositeField("sum", list(children))


def product_fields(*children: ScalarField) -> ScalarField:
    sympy_kids = [f for f in children if isinstance(f, SympyRadialField)]
    if len(sympy_kids) == len(children):
        expr = sp.Integer(1)
        for f in sympy_kids:
            expr = expr * f.profile_t
        decays = [f.decay_hint for f in children]
        out = SympyRadialField(
            children[0].dim,
            expr,
            kind="product",
            decay_hint=None if any(d is None for d in decays) else float(sum(decays)),
            singular_origin=any(f._singular_origin for f in sympy_kids),
        )
        out._children = list(children)
        return out
    return CompositeField("product", list(children))


class RadialNumericField(ScalarField):
    """Radial field interpolated from samples, with power-law continuation
    beyond the grid. Used to feed numerically computed radial functions
    (potentials, semigroup intermediates) back into the operator."""

    kind = "radial-numeric"

    def __init__(self, r_grid, values, decay_hint: float, interp_error: float = 0.0, features=()):
        from scipy.interpolate import CubicSpline

        r_grid = np.asarray(r_grid, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if r_grid.ndim != 1 or r_grid.size < 4 or np.any(np.diff(r_grid) <= 0):
            raise ConfigInvalid("need an increasing radial grid with >= 4 nodes")
        super().__init__(1)
        self.dim = 1  # ambient dim is set by with_dim below
        self.radial = True
        self._spline = CubicSpline(r_grid, values, bc_type="natural")
        self.r_max = float(r_grid[-1])
        self.decay_hint = float(decay_hint)
        self._tail_coeff = float(values[-1]) * self.r_max**self.decay_hint
        self.interp_error = float(interp_error)
        self._features = sorted(float(f) for f in features)
        # A curvature scale, not the finest knot gap: dyadic clustering in
        # the grid must not drag the operator's core radius to round-off.
        self.length_scale = max(float(np.min(np.diff(r_grid))) * 8.0, self.r_max / 256.0)

    def feature_radii(self):
        return list(self._features)

    def with_dim(self, dim: int) -> "RadialNumericField":
        self.dim = int(dim)
        return self

    def eval_radial(self, r):
        r_arr = np.asarray(r, dtype=np.float64)
        out = np.empty_like(r_arr, dtype=np.float64)
        inside = r_arr <= self.r_max
        out[inside] = self._spline(r_arr[inside])
        if np.any(~inside):
            out[~inside] = self._tail_coeff * r_arr[~inside] ** (-self.decay_hint)
        return out

    def eval(self, x):
        t_vals, single = _norms_sq(x, self.dim)
        vals = self.eval_radial(np.sqrt(t_vals))
        return float(vals[0]) if single else vals.reshape(np.shape(x)[:-1])


_CATALOG_BUILDERS = {
    "power-law": lambda d: PowerLaw(d["alpha"], d["dim"]),
    "shifted-power": lambda d: ShiftedPower(d["rho"], d["dim"]),
    "bubble": lambda d: Bubble(d["sigma"], d["dim"]),
    "gaussian": lambda d: Gaussian(d["dim"], d.get("width", 1.0)),
    "polynomial": lambda d: Polynomial(d["coeffs"], d["dim"]),
    "constant": lambda d: Constant(d["c"], d["dim"]),
    "ball-indicator": lambda d: BallIndicator(d["radius"], d["dim"]),
    "mollified-indicator": lambda d: MollifiedIndicator(
        d["inner_radius"], d["outer_radius"], d["dim"]
    ),
}


def field_from_descriptor(desc: dict) -> ScalarField:
    d = dict(desc)
    kind = d.get("kind")
    if kind in ("sum", "product"):
        children = [field_from_descriptor(c) for c in d["children"]]
        return sum_fields(*children) if kind == "sum" else product_fields(*children)
    builder = _CATALOG_BUILDERS.get(kind)
    if builder is None:
        raise ConfigInvalid(f"unknown field kind {kind!r} (known: {sorted(_CATALOG_BUILDERS)})")
    try:
        return builder(d)
    except KeyError as exc:
        raise ConfigInvalid(f"field descriptor for {kind!r} missing {exc}") from exc


# ---------------------------------------------------------------------------
# Field-level operations.
# ---------------------------------------------------------------------------


def eval_field(field: ScalarField, x):
    return field.eval(x)


def derivative(field: ScalarField, x, alpha) -> float:
    """Partial derivative for the multi-index alpha; analytic when the field
    provides it, otherwise nested central differences with stepsize
    h = eps_mach^(1/3) * (1 + |x|)."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != field.dim or any(a < 0 for a in alpha):
        raise ConfigInvalid("alpha must be a multi-index matching the dimension")
    if sum(alpha) > 4:
        raise UnsupportedOrder("derivatives supported up to total order 4")
    try:
        return field.derivative_analytic(x, alpha)
    except UnsupportedOrder:
        pass
    x = np.asarray(x, dtype=np.float64)
    h = _EPS ** (1.0 / 3.0) * (1.0 + float(np.linalg.norm(x)))
    return _fd_eval(field, x, alpha, h)


def _fd_eval(field, point, alpha, h):
    if sum(alpha) == 0:
        return float(field.eval(point))
    idx = next(i for i, a in enumerate(alpha) if a > 0)
    e = np.zeros_like(point)
    e[idx] = h
    lower = tuple(a if i != idx else a - 1 for i, a in enumerate(alpha))
    return (_fd_eval(field, point + e, lower, h) - _fd_eval(field, point - e, lower, h)) / (2 * h)


def iterated_laplacian(field: ScalarField, k: int, x=None):
    """(-Delta)^k as a field, or its value at x when x is given."""
    if k < 0:
        raise UnsupportedOrder("k must be >= 0")
    g = field
    for _ in range(int(k)):
        g = g.neg_laplacian()
    if x is None:
        return g
    return float(g.eval(np.asarray(x, dtype=np.float64)))


def laplacian_value(field: ScalarField, x, h_scale: float | None = None) -> float:
    """Delta f(x): analytic when the field supports it, else finite
    differences (radial 3-point formula for radial fields)."""
    x = np.asarray(x, dtype=np.float64)
    try:
        return -float(field.neg_laplacian().eval(x))
    except UnsupportedOrder:
        pass
    scale = h_scale if h_scale is not None else min(field.length_scale, 1.0 + float(np.linalg.norm(x)))
    h = max(scale, 1e-8) * _EPS**0.25
    if field.radial:
        r = float(np.linalg.norm(x))
        if r < h:
            f0 = float(field.eval_radial(np.array([h]))[0])
            fc = float(field.eval_radial(np.array([0.0]))[0])
            return field.dim * 2.0 * (f0 - fc) / h**2
        rm, r0, rp = r - h, r, r + h
        fm, f0, fp = (float(v) for v in field.eval_radial(np.array([rm, r0, rp])))
        d2 = (fp - 2 * f0 + fm) / h**2
        d1 = (fp - fm) / (2 * h)
        return d2 + (field.dim - 1) * d1 / r
    total = 0.0
    f0 = float(field.eval(x))
    for i in range(field.dim):
        e = np.zeros_like(x)
        e[i] = h
        total += (float(field.eval(x + e)) - 2 * f0 + float(field.eval(x - e))) / h**2
    return total


@dataclass(frozen=True)
class WeightedNormResult:
    value: float
    abs_error: float
    finite: bool
    shells: list[tuple[int, float]]


# Dyadic-shell divergence detection thresholds.
_SHELL_RATIO = 0.95
_SHELL_RUN = 8
_MAX_SHELLS = 96


def weighted_integral(
    field: ScalarField,
    weight_exponent: float,
    rel_tol: float = 1e-8,
    mc_samples: int = 20_000,
    seed: int = 0,
) -> WeightedNormResult:
    """integral of |f(x)| / (1 + |x|^w) over R^n, by dyadic shells.

    Shell contributions that fail to decay geometrically (ratio >= 0.95 over
    8 consecutive shells, inward or outward) raise the divergence flag and
    the value +inf. Otherwise the remaining tails are extrapolated
    geometrically and charged to the error bar as well.
    """
    w = float(weight_exponent)
    n = field.dim

    if field.radial:
        splits = sorted({r for r in field.feature_radii() if r > 0.0})
        sing = sorted({r for r in field.singular_radii() if r > 0.0})

        def shell_integral(lo: float, hi: float) -> float:
            panels = [Panel(lo, hi)]
            inner_splits = [s for s in splits if lo < s < hi]
            plain = [s for s in inner_splits if s not in sing]
            for s in plain:
                new = []
                for p in panels:
                    if p.lo < s < p.hi:
                        new.extend([Panel(p.lo, s), Panel(s, p.hi)])
                    else:
                        new.append(p)
                panels = new
            refine = [s for s in inner_splits if s in sing]
            if refine:
                panels = split_panels_at(panels, refine)

            def integrand(r):
                vals = np.abs(field.eval_radial(r))
                return sphere_area(n) * vals * r ** (n - 1) / (1.0 + r**w)

            val, _ = integrate_panels(integrand, panels, 16)
            return val

    else:

        def shell_integral(lo: float, hi: float) -> float:
            rng = derive_rng(seed, "weighted-shell", repr(lo), repr(hi))
            pts = rng.uniform(-hi, hi, size=(mc_samples, n))
            r = np.linalg.norm(pts, axis=1)
            mask = (r > lo) & (r <= hi)
            box_vol = (2.0 * hi) ** n
            vals = np.zeros(mc_samples)
            if np.any(mask):
                vals[mask] = np.abs(field.eval(pts[mask])) / (1.0 + r[mask] ** w)
            return float(vals.mean() * box_vol)

    # Walk shells outward and inward from [1, 2].
    contributions: list[tuple[int, float]] = []

    def walk(direction: int) -> tuple[float, float, bool]:
        total, tail_err = 0.0, 0.0
        run = 0
        prev = None
        j = 0 if direction > 0 else -1
        last_positive = None
        for _ in range(_MAX_SHELLS):
            lo, hi = 2.0**j, 2.0 ** (j + 1)
            if (
                field.far_constant == 0.0
                and field.support_radius is not None
                and lo > field.support_radius
            ):
                break
            c = shell_integral(lo, hi)
            contributions.append((j, c))
            total += c
            if prev is not None and prev > 0:
                ratio = c / prev
                run = run + 1 if ratio >= _SHELL_RATIO else 0
                if run >= _SHELL_RUN:
                    return total, tail_err, False
            if c > 0:
                last_positive = c
            if prev is not None and c <= rel_tol * max(total, 1e-300) and c < prev:
                ratio = c / prev
                tail_err = c * ratio / max(1.0 - ratio, 0.05)
                total += tail_err
                return total, tail_err, True
            prev = c
            j += direction
        if last_positive is None:
            return total, tail_err, True
        # Ran out of shells while still contributing: extrapolate cautiously.
        ratio = min(c / prev if prev and prev > 0 else 0.5, 0.9)
        tail_err = last_positive * ratio / (1.0 - ratio)
        return total + tail_err, tail_err, True

    out_total, out_err, out_ok = walk(+1)
    in_total, in_err, in_ok = walk(-1)
    if not (out_ok and in_ok):
        return WeightedNormResult(math.inf, math.inf, False, contributions)
    return WeightedNormResult(out_total + in_total, out_err + in_err, True, contributions)


def weighted_l1_norm(field: ScalarField, s: float, **kw) -> WeightedNormResult:
    """The membership integral of the natural domain: weight 1 + |x|^(n+2s)."""
    if s <= 0:
        raise ConfigInvalid("order s must be positive")
    return weighted_integral(field, field.dim + 2.0 * s, **kw)
