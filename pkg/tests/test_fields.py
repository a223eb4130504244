"""Field catalog: closed-form values, calculus hooks, combinators, and the
weighted-norm membership integral."""

import math

import numpy as np
import pytest

from fraclab.errors import ConfigInvalid
from fraclab.fields import (
    BallIndicator,
    Bubble,
    Constant,
    Gaussian,
    MollifiedIndicator,
    Polynomial,
    PowerLaw,
    ShiftedPower,
    derivative,
    field_from_descriptor,
    iterated_laplacian,
    laplacian_value,
    product_fields,
    sum_fields,
    weighted_integral,
    weighted_l1_norm,
)


def test_catalog_values_match_closed_forms():
    assert PowerLaw(1.0, 3).eval([2.0, 0.0, 0.0]) == pytest.approx(0.5)
    assert ShiftedPower(3.0, 3).eval_radial(np.array([1.0]))[0] == pytest.approx(2.0**-1.5)
    assert Bubble(0.5, 3).eval([0.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert Bubble(0.5, 3).eval([1.0, 0.0, 0.0]) == pytest.approx(0.5)
    assert Gaussian(3).eval([1.0, 0.0, 0.0]) == pytest.approx(math.exp(-0.5))
    assert Polynomial([1.0, 2.0], 3).eval([1.0, 1.0, 1.0]) == pytest.approx(7.0)
    assert Constant(4.5, 2).eval([17.0, -3.0]) == pytest.approx(4.5)


def test_bubble_exponent_encodes_order():
    # (1 + r^2)^(-(n - 2 sigma)/2) with n=3, sigma=0.5 is 1/(1 + r^2)
    f = Bubble(0.5, 3)
    r = np.array([0.0, 0.7, 2.0, 9.0])
    assert f.eval_radial(r) == pytest.approx(1.0 / (1.0 + r**2))


def test_catalog_rejects_bad_parameters():
    with pytest.raises(ConfigInvalid):
        PowerLaw(-1.0, 3)
    with pytest.raises(ConfigInvalid):
        Bubble(2.0, 3)  # needs sigma < n/2
    with pytest.raises(ConfigInvalid):
        Gaussian(3, width=0.0)
    with pytest.raises(ConfigInvalid):
        BallIndicator(0.0, 3)


def test_ball_indicator_is_closed_ball():
    f = BallIndicator(1.0, 3)
    assert f.eval([0.5, 0.0, 0.0]) == 1.0
    assert f.eval([1.0, 0.0, 0.0]) == 1.0
    assert f.eval([1.5, 0.0, 0.0]) == 0.0
    assert f.support_radius == 1.0


def test_mollified_indicator_plateaus():
    f = MollifiedIndicator(1.0, 2.0, 3)
    r = np.array([0.0, 0.5, 1.0])
    assert f.eval_radial(r) == pytest.approx(np.ones(3))
    r_out = np.array([2.0, 3.0, 10.0])
    assert f.eval_radial(r_out) == pytest.approx(np.zeros(3), abs=1e-15)
    mid = f.eval_radial(np.linspace(1.0, 2.0, 50))
    assert np.all(np.diff(mid) <= 1e-12)
    assert np.all((mid >= 0.0) & (mid <= 1.0))


def test_batch_eval_shape():
    f = Gaussian(3)
    out = f.eval(np.zeros((5, 3)))
    assert out.shape == (5,)
    assert out == pytest.approx(np.ones(5))


# -- calculus ----------------------------------------------------------------


def test_laplacian_of_gaussian_at_origin():
    # f = exp(-r^2/2), so f ~ 1 - r^2/2 and Delta f(0) = -n
    assert laplacian_value(Gaussian(3), [0.0, 0.0, 0.0]) == pytest.approx(-3.0, rel=1e-6)


def test_laplacian_of_quadratic():
    f = Polynomial([0.0, 1.0], 3)  # r^2
    assert laplacian_value(f, [0.3, -0.1, 0.7]) == pytest.approx(6.0, rel=1e-6)


def test_iterated_laplacian_value():
    f = Polynomial([0.0, 1.0], 3)
    assert iterated_laplacian(f, 1, [0.3, 0.0, 0.0]) == pytest.approx(-6.0, rel=1e-9)


def test_analytic_derivative():
    f = Bubble(0.5, 3)  # 1/(1+r^2)
    # d/dx1 = -2 x1 / (1 + r^2)^2 at (1, 0, 0)
    assert derivative(f, [1.0, 0.0, 0.0], (1, 0, 0)) == pytest.approx(-0.5, rel=1e-9)
    assert derivative(Gaussian(3), [0.0, 0.0, 0.0], (2, 0, 0)) == pytest.approx(-1.0, rel=1e-6)


# -- combinators and descriptors ---------------------------------------------


def test_sum_and_product_fields():
    f = sum_fields(Gaussian(3), Constant(1.0, 3))
    x = [0.5, 0.0, 0.0]
    assert f.eval(x) == pytest.approx(math.exp(-0.125) + 1.0)
    g = product_fields(Bubble(0.5, 3), Bubble(0.5, 3))
    assert g.eval(x) == pytest.approx((1.0 / 1.25) ** 2)


def test_descriptor_round_trips():
    catalog = [
        PowerLaw(1.5, 3),
        ShiftedPower(2.5, 2),
        Bubble(0.75, 3),
        Gaussian(4, width=2.0),
        Polynomial([1.0, -0.5, 0.25], 3),
        Constant(2.0, 1),
        BallIndicator(1.5, 3),
        MollifiedIndicator(0.5, 1.5, 2),
        sum_fields(Gaussian(3), Constant(1.0, 3)),
    ]
    for f in catalog:
        clone = field_from_descriptor(f.descriptor())
        assert clone.dim == f.dim
        r = np.array([0.4, 1.1, 3.0])  # off the origin: power laws blow up there
        if f.radial:
            assert clone.eval_radial(r) == pytest.approx(f.eval_radial(r), abs=1e-14)
        else:
            x = np.zeros(f.dim)
            assert clone.eval(x) == pytest.approx(f.eval(x))


def test_descriptor_rejects_unknown_kind():
    with pytest.raises(ConfigInvalid):
        field_from_descriptor({"kind": "no-such-field", "dim": 3})


# -- weighted integrals ------------------------------------------------------


def test_weighted_l1_norm_closed_form():
    # integral of 1/(1+r^4) over R^3 is 4 pi * pi/(4 sin(3 pi/4)) = sqrt(2) pi^2
    res = weighted_l1_norm(Constant(1.0, 3), 0.5)
    exact = math.sqrt(2.0) * math.pi**2
    assert res.finite
    assert res.value == pytest.approx(exact, rel=1e-6)
    assert abs(res.value - exact) <= max(res.abs_error, 1e-6 * exact)


def test_weighted_integral_of_indicator_truncates():
    res = weighted_integral(BallIndicator(1.0, 3), 0.0)
    # weight is identically 2 and the support stops the outward walk
    assert res.value == pytest.approx(2.0 * math.pi / 3.0, rel=1e-8)


def test_weighted_integral_flags_tail_divergence():
    # r^2 / r^3 shells are log-divergent outward
    res = weighted_integral(Constant(1.0, 3), 3.0)
    assert not res.finite
    assert math.isinf(res.value)


def test_weighted_integral_flags_origin_divergence():
    # |x|^-3 against r^2 dr diverges at the origin whatever the weight
    res = weighted_integral(PowerLaw(3.0, 3), 6.0)
    assert not res.finite


def test_weighted_l1_norm_rejects_nonpositive_order():
    with pytest.raises(ConfigInvalid):
        weighted_l1_norm(Constant(1.0, 3), 0.0)
