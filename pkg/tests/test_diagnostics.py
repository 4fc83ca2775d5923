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
from core.exceptions import BoundaryTooClose, NodeOfRho
from core.models import GridSpec
from core.physics import diagnostics
from core.physics.catalog import parse_state_spec
from core.physics.geometry import CartesianChart, PolarChart
from core.physics.holland import angular_average_velocity
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid
from scipy.special import erf

POINTS = [np.array([0.5, 0.3]), np.array([-0.2, 0.4]), np.array([0.1, -0.6])]
COVERAGE_GRID = GridSpec(bounds=((-4.0, 4.0), (-4.0, 4.0)), resolution=200, subsamples=4)


@pytest.mark.parametrize("point", POINTS)
def test_einstein_couples_particles_of_a_product_state(two_oscillators, point):
    report = diagnostics.coupling_matrix("einstein", two_oscillators, None, point)
    assert report.verdict == "coupled"
    assert report.verdicts == {"1-2": "coupled", "2-1": "coupled"}
    assert report.norms.shape == (2, 2)
    assert report.point == pytest.approx(tuple(point))


@pytest.mark.parametrize("law", ["grommer", "flat"])
@pytest.mark.parametrize("point", POINTS)
def test_grommer_and_flat_keep_particles_independent(two_oscillators, law, point):
    report = diagnostics.coupling_matrix(law, two_oscillators, None, point)
    assert report.verdict == "uncoupled"
    assert report.norms[0, 1] < 1e-6
    assert report.norms[0, 0] > 1e-3


def test_separation_scan(two_oscillators):
    results = diagnostics.separation_scan(
        "einstein", two_oscillators, None, POINTS[0], [0.0, 0.25, 2.0]
    )
    assert [r["separation"] for r in results] == [0.0, 0.25, 2.0]
    assert results[0]["verdict"] == "coupled"
    assert results[1]["cross_norm"] > 1e-3
    assert results[2]["verdict"] == "inadmissible"


def test_flat_divergence_of_an_oscillator(ground):
    for q in (0.5, -0.3, 0.8):
        psi_sq = float(ground.psi(np.array([q]))) ** 2
        root = math.sqrt(1.0 - q * q)
        expected = psi_sq * (-q / root - 2.0 * q * root)
        value = diagnostics.divergence("flat", ground, None, np.array([q]))
        assert value == pytest.approx(expected, rel=1e-6, abs=1e-9)


def test_uniform_flow_has_no_divergence(uniform_law, flat_plane):
    value = diagnostics.divergence(uniform_law, flat_plane, None, np.array([0.2, -0.1]))
    assert value == pytest.approx(0.0, abs=1e-10)


def test_divergence_near_the_boundary(ground):
    with pytest.raises(BoundaryTooClose):
        diagnostics.divergence("flat", ground, None, np.array([1.0 - 1e-5]))


def test_einstein_coverage(two_oscillators):
    report = diagnostics.domain_coverage("einstein", two_oscillators, grid=COVERAGE_GRID)
    assert report.weight_fraction == pytest.approx(1.0 - math.exp(-1.0), abs=1e-3)
    assert report.admissible_fraction == pytest.approx(math.pi / 64.0, abs=1e-3)


def test_grommer_coverage(two_oscillators):
    report = diagnostics.domain_coverage("grommer", two_oscillators, grid=COVERAGE_GRID, probes=3)
    assert report.weight_fraction == pytest.approx(erf(1.0) ** 2, abs=1e-3)
    assert report.admissible_fraction == pytest.approx(4.0 / 64.0, abs=1e-3)
    assert 1 <= len(report.divergences) <= 3
    for entry in report.divergences:
        assert set(entry) == {"point", "divergence", "density"}


def test_covariance_between_charts(two_oscillators):
    cartesian, polar = CartesianChart((1.0, 1.0)), PolarChart()
    x = np.array([0.5, 0.3])
    assert diagnostics.covariance_check("einstein", two_oscillators, cartesian, polar, x) < 1e-6
    bare = diagnostics.covariance_check(
        "einstein", two_oscillators, cartesian, polar, x, connection=False
    )
    assert bare > 1e-2


def test_grommer_covariance_with_distinct_frequencies():
    state = parse_state_spec("product(ho:k=0, ho:k=0,omega=2)")
    x = np.array([0.4, -0.2])
    assert diagnostics.covariance_check("grommer", state, state.chart(), PolarChart(), x) < 1e-6


def test_chart_agreement(two_oscillators):
    differences = diagnostics.chart_agreement(
        two_oscillators, CartesianChart((1.0, 1.0)), PolarChart(), np.array([0.5, 0.3])
    )
    assert differences["laplacian"] < 1e-8
    assert differences["eigenvalues"] < 1e-8


def test_dbb_baseline_is_the_angular_average(superposition):
    x = np.array([[0.4], [-0.9]])
    assert_allclose(
        diagnostics.dbb_baseline(superposition, x, 0.6),
        angular_average_velocity(superposition, x, 0.6),
        atol=1e-6,
    )
    with pytest.raises(NodeOfRho):
        diagnostics.dbb_baseline(parse_state_spec("rot(ho:k=1)"), np.zeros(1))


def test_marginal_density_integrates_to_one(two_oscillators, composed):
    grid = np.linspace(-6.0, 6.0, 2001)
    for state, t in ((two_oscillators, 0.0), (composed, 0.4)):
        marginal = diagnostics.marginal_density(state, t, coordinate=1)
        assert trapezoid(marginal(grid), grid) == pytest.approx(1.0, abs=1e-4)


def test_sample_density_is_seeded(ground):
    first = diagnostics.sample_density(ground, 2000, seed=3)
    assert first.shape == (2000, 1)
    assert_allclose(first, diagnostics.sample_density(ground, 2000, seed=3))
    assert abs(float(np.mean(first))) < 0.1
    assert float(np.var(first)) == pytest.approx(0.5, abs=0.1)


def test_ensemble_needs_enough_members(ground):
    source = diagnostics.law_source("flat", "ho:k=0")
    with pytest.raises(ValueError):
        diagnostics.ensemble_compare(source, diagnostics.marginal_density(ground), (-6.0, 6.0), count=10)


@pytest.mark.slow
def test_flat_ensemble_is_rejected(ground):
    source = diagnostics.law_source("flat", "ho:k=0,omega=1", t_max=1.0, dt=1e-2)
    summary = diagnostics.ensemble_compare(
        source, diagnostics.marginal_density(ground), ground.box[0], bins=20, count=1000, seed=7
    )
    assert summary.lost > 0
    assert summary.z_score > 5.0


@pytest.mark.slow
def test_internal_angle_transport_preserves_the_density(superposition):
    source = diagnostics.holland_source("sup:levels=0|1,weights=1|1", t_max=1.0, dt=5e-3)
    summary = diagnostics.ensemble_compare(
        source,
        diagnostics.marginal_density(superposition, 1.0),
        superposition.box[0],
        bins=20,
        count=100000,
        seed=11,
    )
    assert summary.consistent(3.0)
    assert summary.lost < 1000


def admissible_disk_points(seed, count=10, low=0.1, high=0.9):
    rng = np.random.default_rng(seed)
    radius = rng.uniform(low, high, count)
    angle = rng.uniform(0.0, 2.0 * math.pi, count)
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


def test_coupling_verdicts_at_random_admissible_points(two_oscillators):
    for point in admissible_disk_points(101):
        assert diagnostics.coupling_matrix("einstein", two_oscillators, None, point).verdict == "coupled"
        assert diagnostics.coupling_matrix("grommer", two_oscillators, None, point).verdict == "uncoupled"
        assert diagnostics.coupling_matrix("flat", two_oscillators, None, point).verdict == "uncoupled"


@pytest.mark.parametrize("law", ["einstein", "grommer", "flat"])
def test_coupling_verdicts_survive_a_halved_step(law, two_oscillators):
    for point in POINTS:
        report = diagnostics.coupling_matrix(law, two_oscillators, None, point)
        halved = diagnostics.coupling_matrix(law, two_oscillators, None, point, step=0.5 * report.step)
        assert halved.verdicts == report.verdicts
        assert_allclose(halved.norms, report.norms, rtol=1e-3, atol=1e-8)


def test_flat_divergence_at_interior_points(ground, two_oscillators):
    rng = np.random.default_rng(41)
    q = rng.uniform(0.15, 0.9, 10) * rng.choice([-1.0, 1.0], 10)
    for value in q:
        point = np.array([value])
        psi_sq = float(ground.psi(point)) ** 2
        root = math.sqrt(1.0 - value * value)
        expected = psi_sq * (-value / root - 2.0 * value * root)
        measured = diagnostics.divergence("flat", ground, None, point)
        assert abs(measured) > 0.1 * psi_sq
        assert measured == pytest.approx(expected, rel=1e-6, abs=1e-9)

    for point in rng.uniform(-0.9, 0.9, size=(10, 2)):
        roots = np.sqrt(1.0 - point**2)
        expected = float(two_oscillators.psi(point)) ** 2 * float(np.sum(-point / roots - 2.0 * point * roots))
        measured = diagnostics.divergence("flat", two_oscillators, None, point)
        assert measured == pytest.approx(expected, rel=1e-6, abs=1e-9)


def polar_test_grid(radii, angles=6):
    theta = 2.0 * math.pi * (np.arange(angles) + 0.25) / angles
    return [np.array([r * math.cos(t), r * math.sin(t)]) for r in radii for t in theta]


def test_chart_covariance_on_a_grid(two_oscillators):
    cartesian, polar = CartesianChart((1.0, 1.0)), PolarChart()
    distinct = parse_state_spec("product(ho:k=0, ho:k=0,omega=2)")
    for x in polar_test_grid([0.2, 0.45, 0.7, 0.9]):
        assert diagnostics.covariance_check("einstein", two_oscillators, cartesian, polar, x) < 1e-6
        differences = diagnostics.chart_agreement(two_oscillators, cartesian, polar, x)
        assert differences["laplacian"] < 1e-6
        assert differences["eigenvalues"] < 1e-6
    for x in polar_test_grid([0.2, 0.4, 0.6]):
        assert diagnostics.covariance_check("grommer", distinct, distinct.chart(), polar, x) < 1e-6


def test_coverage_converges_with_resolution(two_oscillators):
    bounds = ((-4.0, 4.0), (-4.0, 4.0))
    errors = []
    for resolution in (50, 100, 200):
        grid = GridSpec(bounds=bounds, resolution=resolution, subsamples=4)
        report = diagnostics.domain_coverage("einstein", two_oscillators, grid=grid)
        errors.append(abs(report.weight_fraction - (1.0 - math.exp(-1.0))))
    assert errors[0] < 1e-2
    assert errors[1] < 4e-3
    assert errors[2] < 1e-3
