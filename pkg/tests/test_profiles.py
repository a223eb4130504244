"""Ramp and bump profiles: exact plateaus, derivative consistency, and the
desk-certified sup norms actually dominating dense grids."""

import math

import numpy as np
import pytest

from fraclab.profiles import (
    bump,
    bump_cdf,
    bump_deriv_sup,
    bump_norm_constant,
    bump_radial_deriv,
    ramp,
    ramp_deriv,
    ramp_deriv_sup,
    sphere_area,
)


def test_ramp_plateaus_are_exact():
    t = np.array([-3.0, 0.0, 0.5, 1.0, 2.0, 2.5, 100.0])
    v = ramp(t)
    assert np.all(v[t <= 1.0] == 0.0)
    assert np.all(v[t >= 2.0] == 1.0)


def test_ramp_monotone_on_band():
    t = np.linspace(1.0, 2.0, 1001)
    v = ramp(t)
    assert np.all(np.diff(v) >= 0.0)
    assert 0.0 < ramp(np.array([1.5]))[0] < 1.0
    # symmetry of the construction: S(t) + S(3 - t) = 1
    assert np.allclose(v + ramp(3.0 - t), 1.0, atol=1e-14)


def test_ramp_deriv_matches_finite_differences():
    t = np.linspace(1.05, 1.95, 19)
    h = 1e-6
    fd = (ramp(t + h) - ramp(t - h)) / (2.0 * h)
    assert np.allclose(ramp_deriv(t, 1), fd, rtol=1e-7, atol=1e-9)


def test_ramp_deriv_vanishes_off_band():
    t = np.array([0.0, 1.0, 2.0, 5.0])
    for order in (1, 2, 3, 4):
        assert np.all(ramp_deriv(t, order) == 0.0)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_ramp_deriv_sup_dominates_grid(order):
    t = np.linspace(1.0, 2.0, 4096)
    assert np.max(np.abs(ramp_deriv(t, order))) <= ramp_deriv_sup(order)


def test_sphere_area_known_values():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)
    assert sphere_area(4) == pytest.approx(2.0 * math.pi**2)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_bump_has_unit_mass(n):
    # radial integral of c_n exp(-1/(1-r^2)) times the sphere measure
    r = np.linspace(0.0, 1.0, 200_001)
    integrand = bump(r, n) * r ** (n - 1) * sphere_area(n)
    assert np.trapezoid(integrand, r) == pytest.approx(1.0, abs=1e-8)


def test_bump_supported_on_unit_ball():
    u = np.array([-2.0, -1.0, 1.0, 1.5])
    assert np.all(bump(u, 3) == 0.0)
    assert bump(np.array([0.0]), 3)[0] > 0.0


def test_bump_radial_deriv_matches_finite_differences():
    u = np.linspace(-0.9, 0.9, 19)
    h = 1e-6
    fd = (bump(u + h, 2) - bump(u - h, 2)) / (2.0 * h)
    assert np.allclose(bump_radial_deriv(u, 1, 2), fd, rtol=1e-6, atol=1e-8)


def test_bump_deriv_sup_dominates_grid():
    u = np.linspace(-1.0, 1.0, 4096)
    for order in (1, 2, 3):
        assert np.max(np.abs(bump_radial_deriv(u, order, 1))) <= bump_deriv_sup(order, 1)


def test_bump_cdf_endpoints_and_midpoint():
    assert bump_cdf(np.array([-1.0]))[0] == 0.0
    assert bump_cdf(np.array([1.0]))[0] == 1.0
    assert bump_cdf(np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-11)
    t = np.linspace(-1.0, 1.0, 501)
    assert np.all(np.diff(bump_cdf(t)) >= -1e-12)


def test_bump_cdf_derivative_is_bump():
    t = np.linspace(-0.95, 0.95, 21)
    h = 1e-6
    fd = (bump_cdf(t + h) - bump_cdf(t - h)) / (2.0 * h)
    assert np.allclose(fd, bump(t, 1), rtol=1e-5, atol=1e-8)


def test_bump_norm_constant_caches_consistently():
    assert bump_norm_constant(3) == bump_norm_constant(3)
    assert bump_norm_constant(1) != bump_norm_constant(2)
