"""Smooth transition profiles shared by all cutoff families.

Everything is built from one ramp

    S(t) = B(t-1) / (B(t-1) + B(2-t)),   B(s) = exp(-1/s) for s > 0 else 0,

which is exactly 0 for t <= 1 and exactly 1 for t >= 2, and from the unit
bump rho(u) ~ exp(-1/(1-u^2)) on (-1, 1) normalized to unit mass. Values go
through the selected kernel backend; derivatives are differentiated
symbolically once per order and cached as vectorized callables.
"""

from __future__ import annotations

import functools

import numpy as np
import sympy as sp

from ._kernels import ramp01
from .errors import UnsupportedOrder

MAX_DERIV_ORDER = 6

# Inside a transition band, stay this far from the endpoints when evaluating
# derivative formulas: below it every derivative is < exp(-700) ~ underflow.
_BAND_MARGIN = 1.0 / 700.0


@functools.lru_cache(maxsize=None)
def _ramp_deriv_fn(order: int):
    t = sp.Symbol("t", positive=True)
    b1 = sp.exp(-1 / (t - 1))
    b2 = sp.exp(-1 / (2 - t))
    expr = sp.diff(b1 / (b1 + b2), t, order)
    return sp.lambdify(t, expr, modules="numpy")


def ramp(t) -> np.ndarray:
    """The ramp S itself (backend kernel)."""
    return ramp01(t)


def ramp_deriv(t, order: int) -> np.ndarray:
    """d^order S / dt^order, exactly zero outside the open band (1, 2)."""
    if order == 0:
        return ramp(t)
    if not 1 <= order <= MAX_DERIV_ORDER:
        raise UnsupportedOrder(f"ramp derivatives supported up to order {MAX_DERIV_ORDER}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros_like(t_arr)
    band = (t_arr > 1.0 + _BAND_MARGIN) & (t_arr < 2.0 - _BAND_MARGIN)
    if np.any(band):
        out[band] = _ramp_deriv_fn(order)(t_arr[band])
    return out.reshape(np.shape(t))


@functools.lru_cache(maxsize=None)
def ramp_deriv_sup(order: int, grid: int = 20001) -> float:
    """Desk-certified sup of |S^(order)|: dense-grid max with a first-order
    inflation by the grid spacing times the next derivative's grid max."""
    if order == 0:
        return 1.0
    tt = np.linspace(1.0, 2.0, grid)
    vals = np.abs(ramp_deriv(tt, order))
    h = 1.0 / (grid - 1)
    if order + 1 <= MAX_DERIV_ORDER:
        slope = float(np.max(np.abs(ramp_deriv(tt, order + 1))))
    else:
        slope = float(np.max(vals)) / h  # crude but only hit above MAX-1
    return float(np.max(vals) + h * slope)


# ---------------------------------------------------------------------------
# Unit bump mollifier rho_n on the unit ball of R^n, unit mass.
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _bump_deriv_fn(order: int):
    u = sp.Symbol("u", real=True)
    expr = sp.diff(sp.exp(-1 / (1 - u**2)), u, order)
    return sp.lambdify(u, expr, modules="numpy")


def _bump_raw(u, order: int = 0) -> np.ndarray:
    """exp(-1/(1-u^2)) on (-1,1) (and radial derivatives), unnormalized."""
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.zeros_like(u_arr)
    inside = np.abs(u_arr) < 1.0 - _BAND_MARGIN
    if np.any(inside):
        out[inside] = _bump_deriv_fn(order)(u_arr[inside])
    return out.reshape(np.shape(u))


def _gauss_panel(f, a: float, b: float, nodes: int = 64) -> float:
    x, w = np.polynomial.legendre.leggauss(nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.sum(w * f(mid + half * x)))


@functools.lru_cache(maxsize=None)
def sphere_area(n: int) -> float:
    """Surface measure of S^{n-1} in R^n."""
    from scipy.special import gamma

    return float(2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0))


@functools.lru_cache(maxsize=None)
def bump_norm_constant(n: int) -> float:
    """c_n with rho_n(z) = c_n exp(-1/(1-|z|^2)) of unit mass on B_1 in R^n."""
    mass = _gauss_panel(lambda r: _bump_raw(r) * r ** (n - 1), 0.0, 1.0, 128)
    return 1.0 / (sphere_area(n) * mass)


def bump(u, n: int = 1) -> np.ndarray:
    """rho_n as a function of the radius |z| = u."""
    return bump_norm_constant(n) * _bump_raw(u)


def bump_radial_deriv(u, order: int, n: int = 1) -> np.ndarray:
    if not 0 <= order <= MAX_DERIV_ORDER:
        raise UnsupportedOrder(f"bump derivatives supported up to order {MAX_DERIV_ORDER}")
    return bump_norm_constant(n) * _bump_raw(u, order)


@functools.lru_cache(maxsize=None)
def _bump_cdf_cheb():
    # CDF of the 1-D bump; smooth on [-1,1] with all derivatives vanishing at
    # the ends, so a moderate Chebyshev fit reaches ~1e-14.
    c1 = bump_norm_constant(1)
    xs, ws = np.polynomial.legendre.leggauss(48)

    def cdf_scalar(t: float) -> float:
        if t <= -1.0:
            return 0.0
        if t >= 1.0:
            return 1.0
        mid, half = 0.5 * (t - 1.0), 0.5 * (t + 1.0)
        return float(half * np.sum(ws * c1 * _bump_raw(mid + half * xs)))

    grid = np.cos(np.pi * np.arange(201) / 200.0)
    vals = np.array([cdf_scalar(t) for t in grid])
    return np.polynomial.chebyshev.Chebyshev.fit(grid, vals, deg=160, domain=[-1.0, 1.0])


@functools.lru_cache(maxsize=None)
def bump_deriv_sup(order: int, n: int = 1, grid: int = 20001) -> float:
    """Desk-certified sup of the order-th radial derivative of rho_n."""
    uu = np.linspace(-1.0, 1.0, grid)
    vals = np.abs(bump_radial_deriv(uu, order, n))
    h = 2.0 / (grid - 1)
    nxt = min(order + 1, MAX_DERIV_ORDER)
    slope = float(np.max(np.abs(bump_radial_deriv(uu, nxt, n))))
    return float(np.max(vals) + h * slope)


@functools.lru_cache(maxsize=None)
def bump_directional_l1(order: int, n: int) -> float:
    """L1 norm of the order-th derivative of rho_n along a fixed axis.

    Young's inequality turns these into sup-norm certificates for derivatives
    of mollified indicators: |d^j_e (chi * rho_eps)| <= this / eps^j.
    """
    if order == 0:
        return 1.0
    x1, tau = sp.symbols("x1 tau", real=True)
    expr = sp.diff(sp.exp(-1 / (1 - x1**2 - tau)), x1, order)
    fn = sp.lambdify((x1, tau), expr, modules="numpy")
    c = bump_norm_constant(n)
    xg, xw = np.polynomial.legendre.leggauss(96)

    def abs_slice(a: float) -> np.ndarray:
        # integral over the perpendicular variables at x1 = a
        out = np.zeros_like(np.atleast_1d(a), dtype=np.float64)
        for i, ai in enumerate(np.atleast_1d(a)):
            lim = 1.0 - ai * ai - 1e-12
            if lim <= 0:
                continue
            if n == 1:
                out[i] = abs(float(fn(ai, 0.0)))
                continue
            # perpendicular radius q in [0, sqrt(lim)), tau = q^2
            q = 0.5 * np.sqrt(lim) * (xg + 1.0)
            qw = 0.5 * np.sqrt(lim) * xw
            vals = np.abs(fn(ai, q * q))
            out[i] = float(np.sum(qw * vals * sphere_area(n - 1) * q ** (n - 2)))
        return out

    total = float(np.sum(xw * abs_slice(xg)))
    return 1.05 * c * total  # 5% headroom over the quadrature of |.|


def bump_cdf(t) -> np.ndarray:
    """Antiderivative of the 1-D unit bump: 0 at -1, 1 at +1."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.where(t_arr >= 1.0, 1.0, 0.0)
    band = (t_arr > -1.0) & (t_arr < 1.0)
    if np.any(band):
        out[band] = np.clip(_bump_cdf_cheb()(t_arr[band]), 0.0, 1.0)
    return out.reshape(np.shape(t))
