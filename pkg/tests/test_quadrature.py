"""Panel quadrature, sphere rules, and the deterministic RNG derivation."""

import math

import numpy as np
import pytest

from fraclab.quadrature import (
    Panel,
    derive_rng,
    dyadic_panels_toward,
    gauss_nodes,
    geometric_panels,
    integrate_panels,
    panel_nodes,
    plain_split_at,
    sphere_rule,
    sphere_samples,
    split_panels_at,
    worker_streams,
)


def test_gauss_nodes_integrate_polynomials_exactly():
    x, w = gauss_nodes(8)
    for k in range(0, 16):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert np.sum(w * x**k) == pytest.approx(exact, abs=1e-13)


def test_integrate_panels_smooth_integrand():
    panels = geometric_panels(1.0, 64.0)
    val, err = integrate_panels(lambda t: 1.0 / t**2, panels, 16)
    exact = 1.0 - 1.0 / 64.0
    assert val == pytest.approx(exact, abs=1e-12)
    assert abs(val - exact) <= max(err, 1e-12)


def test_dyadic_panels_resolve_endpoint_singularity():
    # int_0^1 t^-1/2 dt = 2; the graded panels leave out only the mass below
    # the deepest level, here 2 * 2^-30
    panels = dyadic_panels_toward(0.0, 1.0, 60)
    val, err = integrate_panels(lambda t: 1.0 / np.sqrt(t), panels, 20)
    assert val == pytest.approx(2.0, abs=1e-8)


def test_dyadic_panels_shrink_toward_point():
    panels = dyadic_panels_toward(0.0, 1.0, 10)
    widths = [p.hi - p.lo for p in panels]
    assert min(p.lo for p in panels) > 0.0
    assert max(widths) / min(widths) > 100.0


def test_split_panels_at_inserts_edges():
    panels = [Panel(0.0, 1.0)]
    out = plain_split_at(panels, [0.25, 0.5])
    edges = sorted({p.lo for p in out} | {p.hi for p in out})
    assert 0.25 in edges and 0.5 in edges
    graded = split_panels_at(panels, [0.5], levels=6)
    assert len(graded) > len(out)


def test_panel_nodes_cover_all_panels():
    panels = [Panel(0.0, 1.0), Panel(1.0, 3.0)]
    xs, ws = panel_nodes(panels, 8)
    assert xs.shape == ws.shape == (16,)
    assert np.sum(ws) == pytest.approx(3.0)


@pytest.mark.parametrize("n", [2, 3])
def test_sphere_rule_integrates_quadratics_exactly(n):
    # weights carry the surface measure: sum w = |S^{n-1}|, and the weighted
    # mean of x_i^2 is 1/n while odd moments vanish
    from fraclab.profiles import sphere_area

    dirs, w = sphere_rule(n, 12)
    total = np.sum(w)
    assert total == pytest.approx(sphere_area(n), rel=1e-12)
    for i in range(n):
        assert np.sum(w * dirs[:, i]) == pytest.approx(0.0, abs=1e-10)
        assert np.sum(w * dirs[:, i] ** 2) / total == pytest.approx(1.0 / n, abs=1e-12)


def test_sphere_samples_unit_vectors_with_surface_weight():
    from fraclab.profiles import sphere_area

    rng = np.random.default_rng(5)
    dirs, w = sphere_samples(4, 500, rng)
    assert dirs.shape == (500, 4)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)
    assert np.sum(w) == pytest.approx(sphere_area(4), rel=1e-12)
    again, _ = sphere_samples(4, 500, np.random.default_rng(5))
    assert np.array_equal(dirs, again)


def test_derive_rng_is_deterministic_and_context_sensitive():
    a = derive_rng(7, "stage", 3).normal(size=4)
    b = derive_rng(7, "stage", 3).normal(size=4)
    c = derive_rng(7, "stage", 4).normal(size=4)
    d = derive_rng(8, "stage", 3).normal(size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_derive_rng_handles_float_context():
    a = derive_rng(0, "tube", 0.125).uniform(size=3)
    b = derive_rng(0, "tube", 0.125).uniform(size=3)
    assert np.array_equal(a, b)


def test_worker_streams_are_disjoint_and_reproducible():
    s1 = worker_streams(11, 3, "energy")
    s2 = worker_streams(11, 3, "energy")
    draws1 = [g.uniform(size=2) for g in s1]
    draws2 = [g.uniform(size=2) for g in s2]
    for d1, d2 in zip(draws1, draws2):
        assert np.array_equal(d1, d2)
    assert not np.array_equal(draws1[0], draws1[1])
