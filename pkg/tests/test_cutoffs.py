"""Cutoff families: plateau and support geometry, certified derivative
bounds, the capacity test sequence, and descriptor round trips."""

import math
from fractions import Fraction

import numpy as np
import pytest

from fraclab.cutoffs import (
    capacity_sequence,
    cutoff_from_descriptor,
    manifold_cutoff,
    point_cutoff,
    tube_bump,
    tube_cutoff,
)
from fraclab.errors import ConfigInvalid, EpsTooLarge, ReachTooSmall, SigmaTooLarge
from fraclab.sets import CircleInR3, FinitePoints


def test_point_annulus_plateau_and_support():
    eps, outer = 0.1, 2.0
    eta = point_cutoff(eps, outer, dim=1)
    r = np.array([0.0, 0.05, 0.1])
    assert eta.eval_radial(r) == pytest.approx(np.zeros(3), abs=1e-15)
    plateau = np.array([2 * eps, 0.5, outer / 2])
    assert eta.eval_radial(plateau) == pytest.approx(np.ones(3), abs=1e-15)
    assert eta.eval_radial(np.array([outer, 3.0])) == pytest.approx(np.zeros(2), abs=1e-15)


def test_point_annulus_needs_scale_separation():
    with pytest.raises(EpsTooLarge):
        point_cutoff(0.6, 2.0, dim=1)


def test_point_annulus_deriv_bound_certified(rng):
    eps = 0.125
    eta = point_cutoff(eps, 2.0, dim=1)
    bound = eta.deriv_bound(1)
    r = np.sort(rng.uniform(0.0, 2.2, size=4001))
    vals = eta.eval_radial(r)
    slopes = np.abs(np.diff(vals) / np.diff(r))
    assert slopes.max() <= bound
    # the bound must reflect the eps scale, not just a global constant
    assert bound >= 1.0 / (2.0 * eps)


def test_fermi_cutoff_bands():
    circle = CircleInR3(10.0)
    eps, rho = 0.01, 1.0
    eta = manifold_cutoff(circle, eps, rho)
    on_plateau = np.array([10.0 + 2 * eps, 0.0, 0.0])
    assert eta.eval(on_plateau) == pytest.approx(1.0, abs=1e-15)
    near = np.array([10.0 + eps / 2, 0.0, 0.0])
    assert eta.eval(near) == 0.0
    far = np.array([10.0 + 3.5 * rho, 0.0, 0.0])
    assert eta.eval(far) == 0.0


def test_fermi_cutoff_enforces_reach():
    # the unit circle's reach is its radius (the axis is equidistant), so the
    # outer band has to fit inside it
    with pytest.raises(ReachTooSmall):
        manifold_cutoff(CircleInR3(1.0), 0.01, 0.5)


def test_fermi_cutoff_enforces_scale_separation():
    with pytest.raises(EpsTooLarge):
        manifold_cutoff(CircleInR3(10.0), 0.3, 1.0)


def test_fermi_deriv_bounds_scale_with_eps():
    circle = CircleInR3(10.0)
    b_coarse = manifold_cutoff(circle, 0.02, 1.0).deriv_bound(2)
    b_fine = manifold_cutoff(circle, 0.005, 1.0).deriv_bound(2)
    assert b_fine > b_coarse
    assert b_fine >= b_coarse * 4.0  # second derivative scales like eps^-2


def test_mollified_tube_exact_plateaus():
    s = FinitePoints([[0.0]])
    eps = 0.125
    eta = tube_cutoff(s, eps)
    inside = np.array([[0.0], [0.5 * eps], [-eps]])
    assert [eta.eval(x) for x in inside] == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)
    outside = np.array([[3.0 * eps], [-4.0 * eps], [1.0]])
    assert [eta.eval(x) for x in outside] == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)
    mid = eta.eval(np.array([2.0 * eps]))
    assert 0.0 < mid < 1.0


def test_tube_bump_is_complement():
    s = FinitePoints([[0.0]])
    eps = 0.125
    eta = tube_cutoff(s, eps)
    chi = tube_bump(s, eps)
    xs = np.linspace(-1.0, 1.0, 41).reshape(-1, 1)
    vals = np.array([eta.eval(x) + chi.eval(x) for x in xs])
    assert vals == pytest.approx(np.ones(41), abs=1e-12)


def test_tube_cutoff_deriv_bounds_monotone_in_order():
    s = FinitePoints([[0.0]])
    eta = tube_cutoff(s, 0.125)
    bounds = [eta.deriv_bound(j) for j in (1, 2, 3)]
    assert all(b > 0 for b in bounds)
    assert bounds[0] < bounds[1] < bounds[2]


# -- capacity sequence -------------------------------------------------------


def test_capacity_schedule_and_harmonic_sums():
    seq = capacity_sequence(FinitePoints([[0.0]]), 0.5, 4, eps0=0.05)
    assert seq.eps_schedule == pytest.approx([0.05 / math.factorial(k) for k in (1, 2, 3, 4)])
    assert seq.s_fractions == [
        Fraction(1),
        Fraction(3, 2),
        Fraction(11, 6),
        Fraction(25, 12),
    ]
    assert len(seq.psi) == 4
    assert len(seq.members) == 4


def test_capacity_schedule_realizes_ratio_condition():
    seq = capacity_sequence(FinitePoints([[0.0]]), 0.5, 5)
    eps = seq.eps_schedule
    for l in range(1, 6):
        for m in range(l + 1, 6):
            ratio = min(eps[l - 1] / eps[m - 1], eps[m - 1] / eps[l - 1])
            assert ratio <= min(1.0 / l, 1.0 / m) + 1e-12


def test_capacity_members_localize_near_set():
    seq = capacity_sequence(FinitePoints([[0.0]]), 0.5, 3)
    psi = seq.psi[2]
    assert psi.eval(np.array([0.0])) == pytest.approx(1.0, abs=1e-12)
    assert psi.eval(np.array([1.0])) == pytest.approx(0.0, abs=1e-12)
    vals = [psi.eval(np.array([x])) for x in np.linspace(0.0, 0.5, 21)]
    assert all(-1e-12 <= v <= 1.0 + 1e-12 for v in vals)


def test_capacity_sequence_enforces_feasibility_window():
    # a sphere in R^3 has lambda = 2, so any sigma above 1/2 is out of range
    from fraclab.sets import Sphere

    with pytest.raises(SigmaTooLarge):
        capacity_sequence(Sphere(1.0, dim=3), 0.9, 3)


def test_capacity_sequence_rejects_bad_k():
    with pytest.raises(ConfigInvalid):
        capacity_sequence(FinitePoints([[0.0]]), 0.5, 0)


# -- descriptors -------------------------------------------------------------


def test_cutoff_descriptor_round_trips():
    cutoffs = [
        point_cutoff(0.1, 2.0, dim=1),
        manifold_cutoff(CircleInR3(10.0), 0.01, 1.0),
        tube_cutoff(FinitePoints([[0.0]]), 0.125),
        tube_bump(FinitePoints([[0.0]]), 0.125),
    ]
    for eta in cutoffs:
        clone = cutoff_from_descriptor(eta.descriptor())
        assert clone.dim == eta.dim
        xs = np.linspace(-0.9, 0.9, 7).reshape(-1, 1) if eta.dim == 1 else None
        if xs is None:
            xs = np.linspace(-0.9, 0.9, 7)[:, None] * np.ones(eta.dim) + np.array(
                [10.0, 0.0, 0.0]
            )
        for x in xs:
            assert clone.eval(x) == pytest.approx(eta.eval(x), abs=1e-12)


def test_cutoff_descriptor_rejects_unknown_kind():
    with pytest.raises(ConfigInvalid):
        cutoff_from_descriptor({"kind": "mystery"})
