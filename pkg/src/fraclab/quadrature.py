"""Shared quadrature machinery: Gauss panels, sphere rules, seeded streams.

All deterministic integrals in the package are sums over panels, each panel
integrated with Gauss-Legendre at two node counts; the difference is the
panel's error estimate. Panels are laid out geometrically in scale and split
dyadically toward known singular abscissae, which keeps every integrand
analytic on every panel.
"""

from __future__ import annotations

import functools
import zlib
from dataclasses import dataclass

import numpy as np

from .profiles import sphere_area


@functools.lru_cache(maxsize=None)
def gauss_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


@dataclass(frozen=True)
class Panel:
    lo: float
    hi: float


def geometric_panels(lo: float, hi: float, per_octave: float = 1.0) -> list[Panel]:
    """Panels covering [lo, hi] with geometrically growing width."""
    if hi <= lo:
        return []
    n_oct = max(1, int(np.ceil(per_octave * np.log2(hi / lo))))
    edges = lo * (hi / lo) ** (np.arange(n_oct + 1) / n_oct)
    edges[0], edges[-1] = lo, hi
    return [Panel(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:])]


def dyadic_panels_toward(point: float, far: float, levels: int) -> list[Panel]:
    """Panels on the interval between `point` and `far`, halving toward
    `point`. The innermost sliver of relative size 2^-levels is dropped
    (callers account for it in their error budgets)."""
    width = far - point
    if width == 0.0:
        return []
    panels = []
    for j in range(levels):
        a = point + width * 2.0 ** -(j + 1)
        b = point + width * 2.0**-j
        panels.append(Panel(min(a, b), max(a, b)))
    return panels


def split_panels_at(panels: list[Panel], points: list[float], levels: int = 42) -> list[Panel]:
    """Refine panels dyadically toward each listed abscissa."""
    out: list[Panel] = []
    for p in panels:
        inner = [p]
        for s in points:
            nxt: list[Panel] = []
            for q in inner:
                if q.lo < s < q.hi:
                    nxt.extend(dyadic_panels_toward(s, q.lo, levels))
                    nxt.extend(dyadic_panels_toward(s, q.hi, levels))
                elif s == q.lo:
                    nxt.extend(dyadic_panels_toward(s, q.hi, levels))
                elif s == q.hi:
                    nxt.extend(dyadic_panels_toward(s, q.lo, levels))
                else:
                    nxt.append(q)
            inner = nxt
        out.extend(inner)
    return out


def plain_split_at(panels: list[Panel], points: list[float]) -> list[Panel]:
    """Insert plain panel edges at the listed abscissae (no refinement).

    Suitable for points where the integrand stays analytic on each side;
    use split_panels_at when a derivative actually blows up there.
    """
    out = list(panels)
    for s in points:
        nxt: list[Panel] = []
        for p in out:
            if p.lo < s < p.hi:
                nxt.append(Panel(p.lo, s))
                nxt.append(Panel(s, p.hi))
            else:
                nxt.append(p)
        out = nxt
    return out


def panel_nodes(panels: list[Panel], m: int) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated Gauss nodes and weights over a list of panels."""
    x, w = gauss_nodes(m)
    nodes, weights = [], []
    for p in panels:
        mid, half = 0.5 * (p.lo + p.hi), 0.5 * (p.hi - p.lo)
        nodes.append(mid + half * x)
        weights.append(half * w)
    if not panels:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def integrate_panels(f, panels: list[Panel], m: int) -> tuple[float, float]:
    """Integral and error estimate: Gauss-m against Gauss-(m//2+1)."""
    xs, ws = panel_nodes(panels, m)
    if xs.size == 0:
        return 0.0, 0.0
    vals = np.asarray(f(xs), dtype=np.float64)
    full = float(vals @ ws)
    xs2, ws2 = panel_nodes(panels, max(2, m // 2 + 1))
    coarse = float(np.asarray(f(xs2), dtype=np.float64) @ ws2)
    return full, abs(full - coarse)


# ---------------------------------------------------------------------------
# Sphere rules: directions and surface-measure weights on S^{n-1}.
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def sphere_rule(n: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic rule with sum(w) = |S^{n-1}|.

    n=1: the two points. n=2: uniform angles (trapezoid rule is spectrally
    accurate on the circle). n=3: Gauss in the polar variable through the
    substitution cos(theta) = -1 + u^2 (which also tames integrands with an
    integrable singularity toward the south pole) times uniform azimuth.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = max(4, 2 * order)
        ang = 2.0 * np.pi * np.arange(m) / m
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return dirs, np.full(m, 2.0 * np.pi / m)
    if n == 3:
        x, w = gauss_nodes(order)
        u = 0.5 * np.sqrt(2.0) * (x + 1.0)
        wu = 0.5 * np.sqrt(2.0) * w
        t = -1.0 + u**2
        wt = 2.0 * u * wu
        m_phi = max(4, 2 * order)
        phi = 2.0 * np.pi * np.arange(m_phi) / m_phi
        st = np.sqrt(np.clip(1.0 - t**2, 0.0, None))
        dirs = np.stack(
            [
                np.outer(st, np.cos(phi)).ravel(),
                np.outer(st, np.sin(phi)).ravel(),
                np.repeat(t, m_phi),
            ],
            axis=1,
        )
        weights = np.repeat(wt, m_phi) * (2.0 * np.pi / m_phi)
        return dirs, weights
    raise ValueError("deterministic sphere rules cover n <= 3; use sphere_samples")


def sphere_samples(n: int, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo directions with equal weights summing to |S^{n-1}|."""
    g = rng.standard_normal((m, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g, np.full(m, sphere_area(n) / m)


# ---------------------------------------------------------------------------
# Deterministic seeded streams.
# ---------------------------------------------------------------------------


def derive_rng(seed: int, *context) -> np.random.Generator:
    """Generator whose stream depends only on (seed, context), never on call
    order; context pieces may be ints, floats, or short strings."""
    entropy: list[int] = [int(seed) & 0xFFFFFFFF]
    for item in context:
        if isinstance(item, str):
            entropy.append(zlib.crc32(item.encode()))
        elif isinstance(item, (int, np.integer)):
            entropy.append(int(item) & 0xFFFFFFFF)
        else:
            entropy.append(zlib.crc32(repr(float(item)).encode()))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def worker_streams(seed: int, workers: int, *context) -> list[np.random.Generator]:
    """One deterministic generator per worker slot."""
    return [derive_rng(seed, "worker", i, *context) for i in range(workers)]
