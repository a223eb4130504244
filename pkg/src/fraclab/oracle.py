"""Independent oracles: Hankel-side evaluation and closed-form constants.

The real-space engine in fraclap never appears here.  For radial fields
with a known Fourier transform the operator is evaluated from the symbol,

    (-Delta)^sigma f(r)
        = (2 pi)^{-n/2} r^{1-n/2} int_0^inf k^{n/2+2 sigma} fhat(k)
                                             J_{n/2-1}(k r) dk,

with the k -> 0 limit of the Bessel factor substituted at r = 0.  fhat is
the non-unitary transform int f(x) e^{-i k.x} dx.  The whole order sigma
enters through the symbol at once, so this route is independent of the
engine's split sigma = k + sigma' as well as of its radial quadrature.

Closed-form constants for the power-law mapping, the bubble identity and
the Riesz fundamental solution live here too; they are pure Gamma-function
arithmetic and double as frozen test anchors.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import jv as _bessel_j
from scipy.special import kv as _bessel_k

from .errors import (
    ConfigInvalid,
    OscillatoryQuadratureFailure,
    QuadratureFailure,
    UnsupportedOrder,
)
from .fields import ScalarField
from .fraclap import FracOrder, frac_order
from .quadrature import Panel, panel_nodes

_EPS = float(np.finfo(np.float64).eps)

# Octave-marching limits for the k-axis.
_MAX_OCTAVES = 240
_ENVELOPE_RUN = 12
_PANEL_CAP = 20_000


# ---------------------------------------------------------------------------
# Closed-form constants.
# ---------------------------------------------------------------------------


def power_law_constant(n: int, alpha: float, sigma: float) -> float:
    """C(alpha, sigma) in (-Delta)^sigma |x|^{-alpha} = C |x|^{-alpha-2 sigma}:

        C = 4^sigma G((alpha+2 sigma)/2) G((n-alpha)/2)
                  / (G(alpha/2) G((n-alpha-2 sigma)/2)),

    valid for 0 < alpha < alpha + 2 sigma < n."""
    n, alpha, sigma = int(n), float(alpha), float(sigma)
    if not (0.0 < alpha and alpha + 2.0 * sigma < n):
        raise ConfigInvalid("the mapping needs 0 < alpha < alpha + 2 sigma < n")
    if sigma <= 0.0:
        raise ConfigInvalid("sigma must be positive")
    return (
        4.0**sigma
        * _gamma((alpha + 2.0 * sigma) / 2.0)
        * _gamma((n - alpha) / 2.0)
        / (_gamma(alpha / 2.0) * _gamma((n - alpha - 2.0 * sigma) / 2.0))
    )


def bubble_constant(n: int, sigma: float) -> float:
    """Lambda in (-Delta)^sigma (1+|x|^2)^{-(n-2s)/2}
                       = Lambda (1+|x|^2)^{-(n+2s)/2}."""
    n, sigma = int(n), float(sigma)
    if not 0.0 < sigma < n / 2.0:
        raise ConfigInvalid("the bubble identity needs 0 < sigma < n/2")
    return 4.0**sigma * _gamma(n / 2.0 + sigma) / _gamma(n / 2.0 - sigma)


def riesz_constant(n: int, gamma: float) -> float:
    """c_{n,gamma} in Gamma(x) = c_{n,gamma} |x|^{2 gamma - n}, the kernel
    inverting (-Delta)^gamma."""
    n, gamma = int(n), float(gamma)
    if not 0.0 < gamma < n / 2.0:
        raise ConfigInvalid("the Riesz kernel needs 0 < gamma < n/2")
    return _gamma(n / 2.0 - gamma) / (4.0**gamma * math.pi ** (n / 2.0) * _gamma(gamma))


# ---------------------------------------------------------------------------
# Transform table (non-unitary convention).
# ---------------------------------------------------------------------------


def _gaussian_hat(width: float, n: int):
    c = (2.0 * math.pi) ** (n / 2.0) * width**n

    def hat(k):
        return c * np.exp(-0.5 * (width * k) ** 2)

    return hat


def _shifted_power_hat(rho: float, n: int):
    # (1+|x|^2)^{-rho/2} -> (2 pi)^{n/2} 2^{1-rho/2}/G(rho/2)
    #                       k^{(rho-n)/2} K_{(n-rho)/2}(k)
    c = (2.0 * math.pi) ** (n / 2.0) * 2.0 ** (1.0 - rho / 2.0) / _gamma(rho / 2.0)
    nu = (n - rho) / 2.0

    def hat(k):
        with np.errstate(over="ignore"):
            return c * k ** ((rho - n) / 2.0) * _bessel_k(nu, k)

    return hat


def _ball_hat(radius: float, n: int):
    def hat(k):
        return (2.0 * math.pi * radius / k) ** (n / 2.0) * _bessel_j(n / 2.0, k * radius)

    return hat


def _transform_of(field: ScalarField):
    kind = field.kind
    n = field.dim
    if kind == "gaussian":
        return _gaussian_hat(field.params["width"], n)
    if kind == "shifted-power":
        return _shifted_power_hat(field.params["rho"], n)
    if kind == "bubble":
        return _shifted_power_hat(n - 2.0 * field.params["sigma"], n)
    if kind == "ball-indicator":
        return _ball_hat(field.radius, n)
    if kind == "constant":
        return None
    if kind == "power-law":
        raise UnsupportedOrder(
            "pure powers have no integrable transform; use power_law_constant"
        )
    raise UnsupportedOrder(f"no tabulated transform for kind '{kind}'")


# ---------------------------------------------------------------------------
# Hankel-side evaluation.
# ---------------------------------------------------------------------------


def _octave_panels(a: float, b: float, osc: float) -> list[Panel]:
    # Resolve oscillations of scale exp(i k osc): panels no wider than half
    # a period.
    if osc <= 0.0:
        return [Panel(a, b)]
    width = math.pi / (2.0 * osc)
    parts = max(1, int(math.ceil((b - a) / width)))
    if parts > _PANEL_CAP:
        raise OscillatoryQuadratureFailure(
            f"resolving k-oscillations of scale {osc} needs {parts} panels per octave"
        )
    edges = np.linspace(a, b, parts + 1)
    return [Panel(float(lo), float(hi)) for lo, hi in zip(edges[:-1], edges[1:])]


def fourier_oracle(field: ScalarField, order, r: float, rel_tol: float = 1e-9) -> float:
    """Symbol-side value of (-Delta)^sigma f at radius r for radial catalog
    fields with a tabulated transform."""
    if not field.radial:
        raise UnsupportedOrder("the transform oracle needs a radial field")
    if isinstance(order, FracOrder):
        n, sigma = order.n, order.sigma
    else:
        ord_ = frac_order(field.dim, float(order))
        n, sigma = ord_.n, ord_.sigma
    if n != field.dim:
        raise ConfigInvalid("order dimension does not match the field")
    r = float(r)
    if r < 0.0:
        raise ConfigInvalid("radius must be nonnegative")
    hat = _transform_of(field)
    if hat is None:
        return 0.0
    nu = n / 2.0 - 1.0

    if r == 0.0:
        pref = (2.0 * math.pi) ** (-n / 2.0) * 2.0 ** (1.0 - n / 2.0) / _gamma(n / 2.0)

        def integrand(k):
            return pref * k ** (n + 2.0 * sigma - 1.0) * hat(k)

    else:
        pref = (2.0 * math.pi) ** (-n / 2.0) * r ** (1.0 - n / 2.0)

        def integrand(k):
            return pref * k ** (n / 2.0 + 2.0 * sigma) * hat(k) * _bessel_j(nu, k * r)

    # The transform itself oscillates on the scale of the ball radius.
    osc = r + (field.radius if field.kind == "ball-indicator" else 0.0)

    # March k-octaves upward from a floor far below every relevant scale;
    # the sub-floor remnant is a pure power and is charged to the budget.
    k_lo = 2.0**-40
    acc = 0.0
    err = 0.0
    envelopes: list[float] = []
    small = 0
    a = k_lo
    for _ in range(_MAX_OCTAVES):
        b = 2.0 * a
        panels = _octave_panels(a, b, osc)
        xs, ws = panel_nodes(panels, 16)
        vals = np.asarray(integrand(xs), dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise QuadratureFailure("transform integrand is not finite")
        part = float(vals @ ws)
        xs2, ws2 = panel_nodes(panels, 9)
        part2 = float(np.asarray(integrand(xs2)) @ ws2)
        acc += part
        err += abs(part - part2)
        envelopes.append(float(np.max(np.abs(vals))) * (b - a))
        a = b
        if len(envelopes) >= _ENVELOPE_RUN:
            # Divergence can only be declared far past every catalog scale;
            # the integrand legitimately grows through its low-k rise.
            recent = envelopes[-_ENVELOPE_RUN:]
            if b > 4096.0 and all(
                e2 >= 0.9 * e1 and e2 > 0.0 for e1, e2 in zip(recent[:-1], recent[1:])
            ):
                raise OscillatoryQuadratureFailure(
                    "k-octave envelopes refuse to decay; the symbol-side "
                    "integral is at best conditionally convergent"
                )
            scale = max(abs(acc), max(envelopes))
            if envelopes[-1] <= 0.1 * rel_tol * scale:
                small += 1
                if small >= 2:
                    err += envelopes[-1]
                    break
            else:
                small = 0
    else:
        raise QuadratureFailure("k-octave march exceeded its budget")

    # Sub-floor remnant: integrand ~ k^q with q > -1 below k_lo.
    head = float(np.max(np.abs(np.asarray(integrand(np.array([k_lo]))))))
    err += 5.0 * head * k_lo
    if err > max(rel_tol * abs(acc), 1e-290) * 1e3:
        raise QuadratureFailure(
            f"transform quadrature stalled at relative error {err / max(abs(acc), 1e-300):.1e}"
        )
    return acc
