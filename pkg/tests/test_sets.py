"""Compact-set geometry: exact distances, metric properties, tube measures,
and the covering estimates."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclab.errors import ConfigInvalid, NotDifferentiable
from fraclab.sets import (
    CircleInR3,
    FinitePoints,
    Polyline,
    ProductCantor,
    Segment,
    Sphere,
    assouad_estimate,
    fit_lambda,
    greedy_cover_count,
    set_from_descriptor,
    tube_boundary_area,
    tube_volume,
)

ZOO = [
    FinitePoints([[0.5, -0.25], [-1.0, 0.75]]),
    Segment([0.0, 0.0, -0.5], [0.0, 0.0, 0.5]),
    Polyline([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]),
    CircleInR3(1.0),
    Sphere(1.0, dim=3),
    ProductCantor(1.0 / 3.0, 4),
]


# -- exact distances ---------------------------------------------------------


def test_finite_points_distance_is_min_over_cloud():
    s = FinitePoints([[0.0, 0.0], [3.0, 4.0]])
    assert s.distance([0.0, 1.0]) == pytest.approx(1.0)
    assert s.distance([3.0, 0.0]) == pytest.approx(3.0)  # min(3, 4)


def test_segment_distance_interior_and_endpoints():
    s = Segment([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    assert s.distance([0.5, 2.0, 0.0]) == pytest.approx(2.0)
    assert s.distance([2.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert s.distance([-3.0, 4.0, 0.0]) == pytest.approx(5.0)


def test_polyline_distance_uses_nearest_piece():
    s = Polyline([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    assert s.distance([0.5, -1.0]) == pytest.approx(1.0)
    assert s.distance([2.0, 0.5]) == pytest.approx(1.0)


def test_circle_distance_closed_form():
    # distance to the unit circle in the z=0 plane
    s = CircleInR3(1.0)
    assert s.distance([2.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert s.distance([0.0, 0.0, 1.0]) == pytest.approx(math.sqrt(2.0))
    assert s.distance([0.0, 0.0, 0.0]) == pytest.approx(1.0)


def test_sphere_distance_is_radial_offset():
    s = Sphere(2.0, dim=3)
    assert s.distance([3.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert s.distance([0.0, 0.5, 0.0]) == pytest.approx(1.5)


def test_cantor_cloud_has_expected_count_and_span():
    # the level-L construction is carried as interval midpoints, so endpoints
    # of [0, 1] sit half an interval width away
    s = ProductCantor(1.0 / 3.0, 4)
    pts = s.sample_points(10_000)
    half_width = 0.5 * (1.0 / 3.0) ** 4
    assert s.distance([0.0]) == pytest.approx(half_width, abs=1e-12)
    assert s.distance([1.0]) == pytest.approx(half_width, abs=1e-12)
    assert s.distance([0.5]) > 0.1  # middle third removed
    assert len(pts) >= 2**4


# -- metric properties -------------------------------------------------------


@pytest.mark.parametrize("cset", ZOO, ids=lambda s: s.variant)
@given(data=st.data())
@settings(max_examples=25, deadline=None)
def test_distance_is_one_lipschitz(cset, data):
    lo, hi = cset.bounding_box()
    center = (np.asarray(lo) + np.asarray(hi)) / 2.0
    coords = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
    x = center + np.array(data.draw(st.lists(coords, min_size=cset.dim, max_size=cset.dim)))
    y = center + np.array(data.draw(st.lists(coords, min_size=cset.dim, max_size=cset.dim)))
    gap = abs(cset.distance(x) - cset.distance(y)) - float(np.linalg.norm(x - y))
    assert gap <= 1e-12


@pytest.mark.parametrize("cset", ZOO, ids=lambda s: s.variant)
def test_distance_gradient_is_unit_where_defined(cset, rng):
    lo, hi = cset.bounding_box()
    xs = rng.uniform(lo - 1.0, hi + 1.0, size=(64, cset.dim))
    used = 0
    for x in xs:
        try:
            g = cset.distance_gradient(x)
        except Exception:
            continue
        used += 1
        assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-12)
    assert used > 0


def test_gradient_refuses_equidistant_point():
    s = FinitePoints([[-1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(NotDifferentiable):
        s.distance_gradient(np.array([0.0, 5.0]))


def test_nominal_dimensions():
    assert FinitePoints([[0.0]]).nominal_dimension() == 0.0
    assert Segment([0, 0, 0], [1, 0, 0]).nominal_dimension() == 1.0
    assert CircleInR3(1.0).nominal_dimension() == 1.0
    assert Sphere(1.0, dim=3).nominal_dimension() == 2.0
    cantor = ProductCantor(1.0 / 3.0, 6)
    assert cantor.nominal_dimension() == pytest.approx(math.log(2.0) / math.log(3.0))


def test_descriptor_round_trip():
    for cset in ZOO:
        clone = set_from_descriptor(cset.descriptor())
        assert clone.variant == cset.variant
        assert clone.dim == cset.dim
        x = np.full(cset.dim, 0.3)
        assert clone.distance(x) == pytest.approx(cset.distance(x), abs=1e-14)


# -- tube measures -----------------------------------------------------------


def test_tube_volume_of_point_matches_ball():
    s = FinitePoints([[0.0, 0.0, 0.0]])
    r = 0.5
    est = tube_volume(s, r, n_samples=400_000, seed=3)
    exact = 4.0 / 3.0 * math.pi * r**3
    assert abs(est.value - exact) <= 4.0 * est.ci95
    assert est.ci95 / exact < 0.02


def test_tube_volume_is_deterministic_for_fixed_seed():
    s = Segment([0.0, 0.0, -0.5], [0.0, 0.0, 0.5])
    a = tube_volume(s, 0.25, n_samples=50_000, seed=9)
    b = tube_volume(s, 0.25, n_samples=50_000, seed=9)
    assert a.value == b.value and a.ci95 == b.ci95


def test_tube_volume_worker_split_changes_stream_not_contract():
    s = FinitePoints([[0.0, 0.0]])
    a = tube_volume(s, 0.5, n_samples=100_000, seed=2, workers=2)
    b = tube_volume(s, 0.5, n_samples=100_000, seed=2, workers=2)
    assert a.value == b.value


def test_tube_boundary_area_of_sphere_shell():
    # boundary of N_r(point) is a sphere of area 4 pi r^2
    s = FinitePoints([[0.0, 0.0, 0.0]])
    r = 0.5
    est = tube_boundary_area(s, r, n_samples=400_000, seed=4)
    exact = 4.0 * math.pi * r**2
    assert abs(est.value - exact) <= 4.0 * est.ci95 + 0.02 * exact


def test_fit_lambda_needs_enough_radii():
    s = FinitePoints([[0.0, 0.0, 0.0]])
    with pytest.raises(ConfigInvalid):
        fit_lambda(s, [0.1, 0.2, 0.4])


def test_fit_lambda_recovers_point_codimension():
    s = FinitePoints([[0.0, 0.0, 0.0]])
    fit = fit_lambda(s, np.geomspace(0.01, 1.0, 7), n_samples=100_000, seed=0)
    assert abs(fit.lambda_hat - 0.0) < 0.15
    assert fit.r2 > 0.99


# -- covering ----------------------------------------------------------------


def test_greedy_cover_count_on_grid():
    pts = np.array([[float(i), 0.0] for i in range(10)])
    assert greedy_cover_count(pts, 0.4) == 10
    assert greedy_cover_count(pts, 20.0) == 1


def test_assouad_estimate_recovers_cantor_exponent():
    cset = ProductCantor(1.0 / 3.0, 8)
    pairs = [(3.0**-k, 1.0) for k in range(3, 7)]
    est = assouad_estimate(cset, pairs)
    assert est.exponent == pytest.approx(math.log(2.0) / math.log(3.0), abs=0.02)


def test_assouad_estimate_rejects_degenerate_pairs():
    with pytest.raises(ConfigInvalid):
        assouad_estimate(ProductCantor(1.0 / 3.0, 4), [(0.5, 0.5)])
