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

import numpy as np
import pytest
from core.exceptions import AmbiguousMatch, DegenerateSpectrum, SingularMetric
from core.physics.eigenframe import (
    align_frame,
    jacobi_eigh,
    match_frames,
    principal_directions,
    spectrum,
)
from core.physics.geometry import covariant_hessian
from numpy.testing import assert_allclose


def test_diagonal_tensor():
    frame = principal_directions(np.diag([2.0, 5.0]), np.eye(2), np.zeros(2))
    assert_allclose(frame.eigenvalues, [2.0, 5.0])
    assert_allclose(frame.vectors, np.eye(2), atol=1e-14)


def test_jacobi_matches_numpy_on_random_matrices():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(50, 4, 4))
    a = a + np.swapaxes(a, -1, -2)
    values, vectors = jacobi_eigh(a)
    assert_allclose(np.sort(values, axis=-1), np.linalg.eigvalsh(a), atol=1e-10)
    reconstructed = vectors @ (values[..., None] * np.swapaxes(vectors, -1, -2))
    assert_allclose(reconstructed, a, atol=1e-10)


def test_generalized_problem_is_metric_orthonormal():
    t = np.array([[2.0, 0.5], [0.5, 1.0]])
    g = np.array([[2.0, 0.3], [0.3, 1.5]])
    frame = principal_directions(t, g, np.zeros(2))
    assert_allclose(frame.vectors.T @ g @ frame.vectors, np.eye(2), atol=1e-12)
    assert_allclose(t @ frame.vectors, g @ frame.vectors * frame.eigenvalues, atol=1e-12)
    assert frame.eigenvalues[0] < frame.eigenvalues[1]


def test_ground_state_hessian_spectrum(two_oscillators):
    psi = float(two_oscillators.psi(np.ones(2)))
    tensor = covariant_hessian(two_oscillators.field, two_oscillators.chart(), np.ones(2))
    frame = principal_directions(tensor, np.eye(2), np.ones(2))
    assert_allclose(frame.eigenvalues, [-psi, psi], atol=1e-12)


def test_degenerate_spectrum_raises(two_oscillators):
    tensor = covariant_hessian(two_oscillators.field, two_oscillators.chart(), np.zeros(2))
    with pytest.raises(DegenerateSpectrum):
        principal_directions(tensor, np.eye(2), np.zeros(2))


def test_blocks_lift_degeneracy_checks(two_oscillators):
    tensor = covariant_hessian(two_oscillators.log_field, two_oscillators.chart(), np.zeros(2))
    frame = principal_directions(tensor, np.eye(2), np.zeros(2), blocks=((0,), (1,)))
    assert_allclose(frame.eigenvalues, [-1.0, -1.0])
    assert_allclose(np.abs(frame.vectors), np.eye(2), atol=1e-14)


def test_batched_spectrum_reports_degeneracy():
    tensors = np.stack([np.diag([1.0, 2.0]), np.eye(2), np.zeros((2, 2))])
    values, vectors, degenerate = spectrum(tensors, np.eye(2))
    assert values.shape == (3, 2)
    assert vectors.shape == (3, 2, 2)
    assert degenerate.tolist() == [False, True, True]


def test_singular_metric_raises():
    with pytest.raises(SingularMetric):
        spectrum(np.eye(2), np.diag([1.0, 0.0]))


def test_align_frame_undoes_sign_and_order_changes():
    previous = principal_directions(np.diag([1.0, 3.0]), np.eye(2), np.zeros(2))
    current = principal_directions(
        np.array([[1.0, 0.01], [0.01, 3.0]]), np.eye(2), np.zeros(2)
    )
    flipped = type(current)(
        eigenvalues=current.eigenvalues[::-1],
        vectors=-current.vectors[:, ::-1],
        point=current.point,
        metric=current.metric,
    )
    aligned = align_frame(previous, flipped)
    assert np.all(np.diag(previous.vectors.T @ aligned.vectors) > 0.99)
    assert aligned.eigenvalues[0] == pytest.approx(1.0, abs=1e-3)
    assert aligned.eigenvalues[1] == pytest.approx(3.0, abs=1e-3)


def test_match_frames_rejects_weak_overlaps():
    previous = principal_directions(np.diag([1.0, 3.0]), np.eye(2), np.zeros(2))
    shrunk = type(previous)(
        eigenvalues=previous.eigenvalues,
        vectors=0.4 * previous.vectors,
        point=previous.point,
        metric=previous.metric,
    )
    with pytest.raises(AmbiguousMatch):
        match_frames(previous, shrunk)


def unit_disk_grid(points=20):
    axis = np.linspace(-1.0, 1.0, points)
    q = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    return q[np.sum(q**2, axis=-1) < 1.0]


def test_ground_state_spectrum_on_the_unit_disk(two_oscillators):
    q = unit_disk_grid()
    psi = two_oscillators.psi(q)
    tensor = covariant_hessian(two_oscillators.field, two_oscillators.chart(), q)
    values, _, degenerate = spectrum(tensor, np.eye(2))
    assert not np.any(degenerate)
    assert_allclose(values[:, 0], -psi, rtol=1e-9)
    assert_allclose(values[:, 1], psi * (np.sum(q**2, axis=-1) - 1.0), rtol=1e-9)


def test_upper_eigenvector_is_radial(two_oscillators):
    for point in ([1.0, 1.0], [0.3, -0.8], [-1.4, 0.2], [0.05, 0.6]):
        q = np.array(point)
        tensor = covariant_hessian(two_oscillators.field, two_oscillators.chart(), q)
        frame = principal_directions(tensor, np.eye(2), q)
        radial = frame.vectors[:, 1]
        assert abs(radial[0] * q[1] - radial[1] * q[0]) < 1e-9 * np.linalg.norm(q)
        assert abs(float(frame.vectors[:, 0] @ q)) < 1e-9 * np.linalg.norm(q)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_random_generalized_problems(n):
    rng = np.random.default_rng(10 + n)
    for _ in range(20):
        t = rng.normal(size=(n, n))
        t = t + t.T
        root = rng.normal(size=(n, n))
        g = root @ root.T + n * np.eye(n)
        values, vectors, _ = spectrum(t, g)
        assert np.all(np.diff(values) >= 0.0)
        assert_allclose(vectors.T @ g @ vectors, np.eye(n), atol=1e-10)
        residual = t @ vectors - g @ vectors * values
        assert np.linalg.norm(residual, axis=0).max() <= 1e-9 * np.linalg.norm(t)


def test_two_by_two_matches_the_characteristic_polynomial():
    rng = np.random.default_rng(21)
    for _ in range(25):
        t = rng.normal(size=(2, 2))
        t = t + t.T
        root = rng.normal(size=(2, 2))
        g = root @ root.T + 0.5 * np.eye(2)
        # det(T - lambda g) = a lambda^2 + b lambda + c
        a = np.linalg.det(g)
        b = -(t[0, 0] * g[1, 1] + t[1, 1] * g[0, 0] - 2.0 * t[0, 1] * g[0, 1])
        c = np.linalg.det(t)
        expected = np.sort(np.roots([a, b, c]).real)
        values, _, _ = spectrum(t, g)
        assert_allclose(values, expected, rtol=1e-9, atol=1e-12)


def test_alignment_keeps_the_branch_of_each_mode(two_oscillators):
    chart = two_oscillators.chart()
    start, moved = np.array([1.0, 1.0]), np.array([1.01, 1.0])
    previous = principal_directions(covariant_hessian(two_oscillators.field, chart, start), np.eye(2), start)
    current = principal_directions(covariant_hessian(two_oscillators.field, chart, moved), np.eye(2), moved)
    aligned = align_frame(previous, current)
    psi = float(two_oscillators.psi(moved))
    assert aligned.eigenvalues[0] == pytest.approx(-psi, rel=1e-9)
    assert aligned.eigenvalues[1] == pytest.approx(psi * (float(moved @ moved) - 1.0), rel=1e-9)
    assert np.all(np.diag(previous.vectors.T @ aligned.vectors) > 0.99)
