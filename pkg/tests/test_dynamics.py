#############################################################################
##
## Copyright (C) 2025 Killian-W.
## All rights reserved.
##
## This file is part of the Qtraj project.
##
## Licensed under the MIT License.
## You may obtain a copy of the License at:
##     https://opensource.org/licenses/MIT
##
## This software is provided "as is," without warranty of any kind.
##
#############################################################################

import math

import numpy as np
import pytest
from core.exceptions import AmbiguousMatch, DegenerateSpectrum, NodeOfPsi, NonPositivePsi
from core.models import Inadmissible, SignAssignment
from core.physics.catalog import parse_state_spec
from core.physics.dynamics import (
    TrajectoryIntegrator,
    admissible,
    einstein_velocity,
    flat_velocity,
    grommer_velocity,
    integrate,
    termination_reason,
)
from core.plugins.laws import get_law
from numpy.testing import assert_allclose


def kinetic_energy(state, v):
    return 0.5 * float(np.sum(np.asarray(state.masses) * v**2))


def test_einstein_admissibility(two_oscillators):
    v = einstein_velocity(two_oscillators, None, np.array([0.5, 0.5]), [1, 1])
    assert not isinstance(v, Inadmissible)
    outside = einstein_velocity(two_oscillators, None, np.array([1.2, 1.2]), [1, 1])
    assert isinstance(outside, Inadmissible)
    assert not outside
    assert outside.modes == (1,)


def test_admissibility_report_on_a_stack(two_oscillators):
    points = np.array([[0.5, 0.5], [1.2, 1.2], [0.0, 0.0]])
    report = admissible("einstein", two_oscillators, None, points)
    assert report.radicands.shape == (3, 2)
    assert report.admissible.tolist() == [True, False, True]
    assert report.degenerate.tolist() == [False, False, True]


def test_oscillator_speed_at_the_origin(ground):
    assert_allclose(flat_velocity(ground, np.zeros(1), [1]), [1.0])
    assert_allclose(einstein_velocity(ground, None, np.zeros(1), [-1]), [-1.0])


def test_grommer_speeds(two_oscillators):
    v = grommer_velocity(two_oscillators, None, np.array([0.5, 0.5]), [1, -1])
    assert_allclose(np.abs(v), [math.sqrt(0.75)] * 2, atol=1e-12)
    assert np.sign(v).tolist() == [1.0, -1.0]


def test_grommer_on_a_ground_state_node_fails():
    excited = parse_state_spec("ho:k=1")
    with pytest.raises(NonPositivePsi):
        grommer_velocity(excited, None, np.array([-0.5]), [1])
    with pytest.raises(NodeOfPsi):
        flat_velocity(excited, np.zeros(1), [1])


def test_flat_law_in_a_box():
    state = parse_state_spec("box:k=1,L=2")
    v = flat_velocity(state, np.array([0.3]), [1])
    assert_allclose(v, [math.pi / 2.0])


@pytest.mark.parametrize("law", ["einstein", "grommer", "flat"])
def test_kinetic_energy_identity(law, two_oscillators):
    q = np.array([0.5, 0.5])
    v = get_law(law).velocity(two_oscillators, two_oscillators.chart(), q, SignAssignment.of([1], 2))
    potential = float(two_oscillators.potential(q))
    assert kinetic_energy(two_oscillators, v) == pytest.approx(two_oscillators.energy - potential)


def test_flat_law_oscillates_like_a_classical_orbit(ground):
    trajectory = integrate("flat", ground, None, [0.0], [1], 1e-3, 2.0 * math.pi)
    assert trajectory.completed
    assert_allclose(trajectory.points[:, 0], np.sin(trajectory.times), atol=1e-5)
    assert [tp.time for tp in trajectory.turning_points] == pytest.approx(
        [0.5 * math.pi, 1.5 * math.pi], abs=1e-4
    )
    assert [tp.mode for tp in trajectory.turning_points] == [0, 0]
    assert trajectory.signs[0, 0] == 1.0
    assert trajectory.signs[-1, 0] == 1.0
    energy = [
        kinetic_energy(ground, v) + float(ground.potential(q))
        for q, v in zip(trajectory.points, trajectory.velocities)
    ]
    assert_allclose(energy, ground.energy, atol=1e-3)


def test_records_sit_on_the_output_grid(ground):
    trajectory = integrate("flat", ground, None, [0.2], [-1], 0.01, 1.0)
    assert trajectory.times.size == 101
    assert_allclose(np.diff(trajectory.times), 0.01)
    assert trajectory.points.shape == (101, 1)
    assert trajectory.velocities.shape == (101, 1)


def test_grommer_particles_move_independently(two_oscillators):
    trajectory = integrate("grommer", two_oscillators, None, [0.0, 0.0], [1, 1], 1e-3, math.pi)
    assert trajectory.completed
    assert_allclose(trajectory.points[:, 0], np.sin(trajectory.times), atol=1e-5)
    assert_allclose(trajectory.points[:, 1], trajectory.points[:, 0], atol=1e-8)


def test_einstein_start_outside_the_domain(two_oscillators):
    trajectory = integrate("einstein", two_oscillators, None, [1.2, 1.2], [1, 1], 1e-3, 1.0)
    assert trajectory.reason == "left_admissible_domain"
    assert not trajectory.completed
    assert trajectory.times.size == 0


def test_einstein_start_on_a_degenerate_point(two_oscillators):
    trajectory = integrate("einstein", two_oscillators, None, [0.0, 0.0], [1, 1], 1e-3, 1.0)
    assert trajectory.reason == "degenerate_spectrum"


def test_termination_reasons():
    assert termination_reason(DegenerateSpectrum("x")) == "degenerate_spectrum"
    assert termination_reason(AmbiguousMatch("x")) == "ambiguous_match"
    assert termination_reason(NodeOfPsi("x")) == "node_of_psi"
    assert termination_reason(NonPositivePsi("x")) == "node_of_psi"
    assert termination_reason(ValueError("x")) == "left_admissible_domain"


def test_integrator_needs_a_positive_step(ground):
    with pytest.raises(ValueError):
        TrajectoryIntegrator(get_law("flat"), ground, ground.chart(), 0.0)


def test_unknown_law():
    with pytest.raises(ValueError):
        get_law("bohm")


ADMISSIBLE_POINTS = [[0.5, 0.3], [-0.2, 0.4], [0.1, -0.6], [0.6, 0.6], [-0.7, -0.1]]
SIGN_CHOICES = [[1, 1], [1, -1], [-1, 1], [-1, -1]]


@pytest.mark.parametrize("law", ["einstein", "grommer", "flat"])
@pytest.mark.parametrize("point", ADMISSIBLE_POINTS)
def test_kinetic_energy_identity_for_every_sign_choice(law, point, two_oscillators):
    q = np.array(point)
    potential = float(two_oscillators.potential(q))
    speeds = []
    for signs in SIGN_CHOICES:
        v = get_law(law).velocity(two_oscillators, two_oscillators.chart(), q, SignAssignment.of(signs, 2))
        assert kinetic_energy(two_oscillators, v) == pytest.approx(two_oscillators.energy - potential, rel=1e-10)
        speeds.append(float(np.linalg.norm(v)))
    assert_allclose(speeds, speeds[0], rtol=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("law", ["flat", "grommer"])
def test_three_periods_follow_the_classical_orbit(law, ground, two_oscillators):
    state = ground if law == "flat" else two_oscillators
    start = [0.0] * state.n
    trajectory = integrate(law, state, None, start, [1] * state.n, 1e-3, 6.0 * math.pi)
    assert trajectory.completed
    expected = np.sin(trajectory.times)
    for coordinate in range(state.n):
        assert np.max(np.abs(trajectory.points[:, coordinate] - expected)) < 1e-6
    assert len(trajectory.turning_points) == 6 * state.n


@pytest.mark.slow
def test_einstein_trajectory_from_an_admissible_start(two_oscillators):
    trajectory = integrate("einstein", two_oscillators, None, [0.5, 0.3], [1, 1], 1e-3, 10.0)
    assert trajectory.completed
    assert trajectory.times.size == 10001
    assert len(trajectory.turning_points) == 3
    assert np.all(np.sum(trajectory.points**2, axis=-1) < 1.0)
    energy = [
        kinetic_energy(two_oscillators, v) + float(two_oscillators.potential(q))
        for q, v in zip(trajectory.points, trajectory.velocities)
    ]
    assert_allclose(energy, two_oscillators.energy, atol=1e-12)
