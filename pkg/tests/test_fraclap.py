"""Hypersingular evaluation: order bookkeeping, route agreement against the
closed-form bubble identity, honesty of the error bars, and the quadratic
forms."""

import math

import numpy as np
import pytest

from fraclab.cutoffs import tube_bump
from fraclab.errors import ConfigInvalid, UnsupportedOrder
from fraclab.fields import Bubble, Gaussian, Polynomial
from fraclab.fraclap import (
    QuadratureSpec,
    energy_cross,
    frac_laplacian,
    frac_laplacian_radial,
    frac_order,
    normalization_constant,
    quadratic_energy,
)
from fraclab.oracle import bubble_constant
from fraclab.sets import FinitePoints


def bubble_exact(n: int, sigma: float, r: float) -> float:
    return bubble_constant(n, sigma) * (1.0 + r * r) ** (-(n + 2 * sigma) / 2.0)


# -- order bookkeeping -------------------------------------------------------


def test_frac_order_split():
    o = frac_order(3, 1.4)
    assert (o.k, o.sigma_prime, o.is_integer) == (1, pytest.approx(0.4), False)
    assert frac_order(3, 1.0).is_integer
    assert frac_order(1, 0.5).sigma == 0.5  # closed endpoint sigma = n/2


def test_frac_order_rejects_out_of_range():
    with pytest.raises(ConfigInvalid):
        frac_order(3, 0.0)
    with pytest.raises(ConfigInvalid):
        frac_order(3, 1.6)
    with pytest.raises(ConfigInvalid):
        frac_order(0, 0.5)


def test_normalization_constant_half_order_line():
    assert normalization_constant(1, 0.5) == pytest.approx(1.0 / math.pi, rel=1e-12)
    # Gamma(-1/2) = -2 sqrt(pi) gives C(3, 1/2) = 1/pi^2
    assert normalization_constant(3, 0.5) == pytest.approx(1.0 / math.pi**2, rel=1e-12)
    with pytest.raises(ConfigInvalid):
        normalization_constant(3, 1.0)


def test_quadrature_spec_validation():
    with pytest.raises(ConfigInvalid):
        QuadratureSpec(radial_nodes=8)
    with pytest.raises(ConfigInvalid):
        QuadratureSpec(angular_rule="trapezoid")
    with pytest.raises(ConfigInvalid):
        QuadratureSpec(rel_tol=0.5)


# -- evaluation routes -------------------------------------------------------


def test_collapsed_route_hits_bubble_identity():
    f = Bubble(0.5, 3)
    for r in (0.0, 1.0, 2.5):
        res = frac_laplacian_radial(f, 0.5, r)
        exact = bubble_exact(3, 0.5, r)
        assert res.value == pytest.approx(exact, rel=1e-6)
        assert abs(res.value - exact) <= res.abs_error + 1e-12 * abs(exact)


def test_sphere_rule_route_agrees_with_collapsed():
    f = Bubble(0.5, 3)
    spec = QuadratureSpec(angular_rule="gauss")
    for r in (0.5, 2.0):
        a = frac_laplacian(f, 0.5, [r, 0.0, 0.0], spec)
        b = frac_laplacian_radial(f, 0.5, r)
        assert abs(a.value - b.value) <= a.abs_error + b.abs_error + 1e-12


def test_monte_carlo_route_is_deterministic_and_close():
    f = Bubble(0.5, 3)
    spec = QuadratureSpec(angular_rule="mc", mc_samples=20_000, seed=11)
    a = frac_laplacian(f, 0.5, [1.0, 0.0, 0.0], spec)
    b = frac_laplacian(f, 0.5, [1.0, 0.0, 0.0], spec)
    assert a.value == b.value and a.method == "monte-carlo"
    exact = bubble_exact(3, 0.5, 1.0)
    assert abs(a.value - exact) <= 4.0 * a.abs_error + 0.02 * abs(exact)


def test_higher_order_goes_through_iterated_laplacian():
    # sigma = 1.25 reduces to (-Delta) then order 0.25
    f = Bubble(1.25, 3)
    res = frac_laplacian_radial(f, 1.25, 1.0)
    exact = bubble_exact(3, 1.25, 1.0)
    assert res.value == pytest.approx(exact, rel=1e-5)


def test_integer_order_is_exact():
    f = Polynomial([0.0, 1.0], 3)  # r^2
    res = frac_laplacian(f, 1.0, [0.3, 0.0, 0.0])
    assert res.value == pytest.approx(-6.0, rel=1e-12)
    assert res.abs_error == 0.0


def test_collapsed_route_requires_radial_field():
    eta = tube_bump(FinitePoints([[0.0, 0.5], [0.0, -0.5]]), 0.1)
    with pytest.raises(UnsupportedOrder):
        frac_laplacian_radial(eta, 0.5, 1.0)


def test_negative_radius_rejected():
    with pytest.raises(ConfigInvalid):
        frac_laplacian_radial(Bubble(0.5, 3), 0.5, -1.0)


def test_gaussian_sign_structure():
    # positive near the peak, negative in the far field where the operator
    # sees mostly the missing mass
    f = Gaussian(1)
    near = frac_laplacian_radial(f, 0.25, 0.0)
    far = frac_laplacian_radial(f, 0.25, 6.0)
    assert near.value > 0.0
    assert far.value < 0.0


# -- quadratic forms ---------------------------------------------------------


def test_quadratic_energy_positive():
    phi = tube_bump(FinitePoints([[0.0]]), 0.125)
    res = quadratic_energy(phi, 0.5)
    assert res.value > 0.0
    assert res.value > 10.0 * res.abs_error


def test_energy_cross_symmetry():
    phi = tube_bump(FinitePoints([[0.0]]), 0.125)
    psi = tube_bump(FinitePoints([[0.0]]), 0.05)
    ab = energy_cross(phi, psi, 0.5)
    ba = energy_cross(psi, phi, 0.5)
    tol = ab.abs_error + ba.abs_error + 1e-6 * abs(ab.value)
    assert abs(ab.value - ba.value) <= tol


def test_energy_cross_requires_compact_outer_factor():
    with pytest.raises(ConfigInvalid):
        energy_cross(Bubble(0.5, 3), Bubble(0.5, 3), 0.5)
