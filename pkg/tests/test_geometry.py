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

import dataclasses
import math

import numpy as np
import pytest
from core.exceptions import ChartError, SingularMetric
from core.physics.geometry import (
    CartesianChart,
    PolarChart,
    ScalarField,
    christoffel,
    covariant_hessian,
    laplacian,
    pullback,
    pushforward,
    schroedinger_residual,
)
from numpy.testing import assert_allclose

PSI0 = 1.0 / math.sqrt(math.pi)


def radius_squared():
    return ScalarField(
        n=2,
        value=lambda x: np.sum(np.asarray(x) ** 2, axis=-1),
        gradient=lambda x: 2.0 * np.asarray(x),
        hessian=lambda x: np.broadcast_to(2.0 * np.eye(2), np.shape(x)[:-1] + (2, 2)),
    )


def test_polar_christoffel_symbols():
    gamma = christoffel(PolarChart(), np.array([2.0, 0.7]))
    assert gamma[0, 1, 1] == pytest.approx(-2.0)
    assert gamma[1, 0, 1] == pytest.approx(0.5)
    assert gamma[1, 1, 0] == pytest.approx(0.5)
    assert gamma[0, 0, 0] == pytest.approx(0.0, abs=1e-12)


def test_cartesian_christoffel_vanishes():
    gamma = christoffel(CartesianChart((1.0, 2.0)), np.zeros((3, 2)))
    assert gamma.shape == (3, 2, 2, 2)
    assert_allclose(gamma, 0.0)


def test_invalid_charts():
    with pytest.raises(ChartError):
        CartesianChart((1.0, -1.0))
    with pytest.raises(ChartError):
        PolarChart(mass=0.0)


def test_polar_metric_singular_at_origin():
    with pytest.raises(SingularMetric):
        christoffel(PolarChart(), np.array([0.0, 0.3]))


def test_covariant_hessian_of_ground_state_at_origin(two_oscillators):
    chart = two_oscillators.chart()
    origin = np.zeros(2)
    assert_allclose(covariant_hessian(two_oscillators.field, chart, origin), -PSI0 * np.eye(2), atol=1e-12)
    assert_allclose(covariant_hessian(two_oscillators.log_field, chart, origin), -np.eye(2), atol=1e-12)


def test_covariant_hessian_transforms_as_a_tensor(two_oscillators):
    polar = PolarChart()
    q = np.array([0.8, 0.6])
    x = polar.to_cartesian(q)
    jac = polar.jacobian(q)
    cartesian = covariant_hessian(two_oscillators.field, two_oscillators.chart(), x)
    in_polar = covariant_hessian(pullback(two_oscillators.field, polar), polar, q)
    assert_allclose(in_polar, jac.T @ cartesian @ jac, atol=1e-8)


def test_dropping_the_connection_breaks_the_tensor(two_oscillators):
    polar = PolarChart()
    q = np.array([0.8, 0.6])
    field = pullback(two_oscillators.field, polar)
    with_connection = covariant_hessian(field, polar, q)
    bare = covariant_hessian(field, polar, q, connection=False)
    assert np.max(np.abs(with_connection - bare)) > 1e-2


def test_laplacian_of_radius_squared_in_both_charts():
    field = radius_squared()
    polar = PolarChart()
    q = np.array([[1.5, 0.2], [0.4, -2.0]])
    assert_allclose(laplacian(field, CartesianChart((1.0, 1.0)), polar.to_cartesian(q)), 4.0)
    assert_allclose(laplacian(pullback(field, polar), polar, q), 4.0, rtol=1e-8)


def test_laplacian_of_ground_state(two_oscillators):
    cartesian = two_oscillators.chart()
    assert float(laplacian(two_oscillators.field, cartesian, np.zeros(2))) / PSI0 == pytest.approx(-2.0)

    polar = PolarChart()
    x = np.array([0.3, 0.4])
    q = polar.from_cartesian(x)
    expected = float(two_oscillators.psi(x)) * (0.25 - 2.0)
    assert float(laplacian(two_oscillators.field, cartesian, x)) == pytest.approx(expected)
    assert float(laplacian(pullback(two_oscillators.field, polar), polar, q)) == pytest.approx(
        expected, rel=1e-8
    )


def test_pushforward_of_polar_directions():
    q = np.array([2.0, 0.5 * math.pi])
    assert_allclose(pushforward(PolarChart(), q, np.array([1.0, 0.0])), [0.0, 1.0], atol=1e-12)
    assert_allclose(pushforward(PolarChart(), q, np.array([0.0, 1.0])), [-2.0, 0.0], atol=1e-12)


def test_polar_round_trip():
    polar = PolarChart()
    x = np.array([[0.3, -0.4], [-1.0, 2.0]])
    assert_allclose(polar.to_cartesian(polar.from_cartesian(x)), x)


def test_schroedinger_residual_vanishes_for_eigenstates(ground, two_oscillators):
    q = np.linspace(-2.0, 2.0, 9)[:, None]
    assert_allclose(schroedinger_residual(ground, None, q), 0.0, atol=1e-12)

    polar = PolarChart()
    points = np.array([[0.5, 0.1], [1.3, 2.0], [2.0, -1.0]])
    assert_allclose(schroedinger_residual(two_oscillators, polar, points), 0.0, atol=1e-8)


def test_schroedinger_residual_detects_a_wrong_energy(ground):
    delta = 0.25
    shifted = dataclasses.replace(ground, energy=ground.energy + delta)
    q = np.array([[0.0], [0.7], [-1.1]])
    assert_allclose(schroedinger_residual(shifted, None, q), delta * ground.psi(q), atol=1e-12)
