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

"""
Coordinate charts, metrics and the covariant derivatives built from them.

Every operation accepts stacked points of shape (..., n) and returns arrays
with the same leading shape, so grid sweeps run without Python loops.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from core.constants import METRIC_FD_STEP, SINGULAR_CONDITION
from core.exceptions import ChartError, SingularMetric

logger = logging.getLogger("Geometry")

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScalarField:
    n: int  # Dimension of the domain
    value: ArrayFn  # (..., n) -> (...)
    gradient: ArrayFn  # (..., n) -> (..., n)
    hessian: ArrayFn  # (..., n) -> (..., n, n), partial derivatives


class Chart:
    """
    Base class for coordinate charts on configuration space.

    Subclasses must provide `metric()` and the transition maps to the
    reference Cartesian chart. Metric derivatives and the second derivatives
    of the forward map fall back to central differences when a subclass does
    not supply them in closed form.
    """

    name = "chart"

    def __init__(self, dimension: int):
        if dimension < 0:
            raise ChartError(f"Chart dimension must be non-negative, got {dimension}")
        self.dimension = dimension

    @property
    def is_reference(self) -> bool:
        """True when the chart coordinates are the reference Cartesian ones."""
        return False

    def reference(self) -> "Chart":
        raise NotImplementedError

    def metric(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def metric_derivatives(self, q: np.ndarray) -> np.ndarray:
        """dg[..., mu, nu, sigma] = d g_{mu nu} / d q^sigma"""
        return _central_difference(self.metric, q, METRIC_FD_STEP)

    def to_cartesian(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def from_cartesian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        """J[..., i, mu] = d x^i / d q^mu"""
        return _central_difference(self.to_cartesian, q, METRIC_FD_STEP)

    def map_hessian(self, q: np.ndarray) -> np.ndarray:
        """K[..., i, mu, nu] = d^2 x^i / d q^mu d q^nu"""
        return _central_difference(self.jacobian, q, METRIC_FD_STEP)


class CartesianChart(Chart):
    """Global Cartesian coordinates with a constant, mass-weighted metric."""

    name = "cartesian"

    def __init__(self, masses: Sequence[float] = (1.0,)):
        masses = np.asarray(masses, dtype=float).reshape(-1)
        if np.any(masses <= 0):
            raise ChartError(f"Masses must be positive, got {masses.tolist()}")
        super().__init__(masses.size)
        self.masses = masses

    @property
    def is_reference(self) -> bool:
        return True

    def reference(self) -> "Chart":
        return self

    def metric(self, q):
        q = np.asarray(q, dtype=float)
        return np.broadcast_to(np.diag(self.masses), q.shape[:-1] + (self.dimension,) * 2)

    def metric_derivatives(self, q):
        q = np.asarray(q, dtype=float)
        return np.zeros(q.shape[:-1] + (self.dimension,) * 3)

    def to_cartesian(self, q):
        return np.asarray(q, dtype=float)

    def from_cartesian(self, x):
        return np.asarray(x, dtype=float)

    def jacobian(self, q):
        q = np.asarray(q, dtype=float)
        return np.broadcast_to(np.eye(self.dimension), q.shape[:-1] + (self.dimension,) * 2)

    def map_hessian(self, q):
        q = np.asarray(q, dtype=float)
        return np.zeros(q.shape[:-1] + (self.dimension,) * 3)


class PolarChart(Chart):
    """Plane polar coordinates (r, theta) for a single particle of given mass."""

    name = "polar"

    def __init__(self, mass: float = 1.0):
        if mass <= 0:
            raise ChartError(f"Mass must be positive, got {mass}")
        super().__init__(2)
        self.mass = float(mass)

    def reference(self) -> "Chart":
        return CartesianChart((self.mass, self.mass))

    def metric(self, q):
        q = np.asarray(q, dtype=float)
        g = np.zeros(q.shape[:-1] + (2, 2))
        g[..., 0, 0] = self.mass
        g[..., 1, 1] = self.mass * q[..., 0] ** 2
        return g

    def metric_derivatives(self, q):
        q = np.asarray(q, dtype=float)
        dg = np.zeros(q.shape[:-1] + (2, 2, 2))
        dg[..., 1, 1, 0] = 2.0 * self.mass * q[..., 0]
        return dg

    def to_cartesian(self, q):
        q = np.asarray(q, dtype=float)
        r, theta = q[..., 0], q[..., 1]
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def from_cartesian(self, x):
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        theta = np.arctan2(x[..., 1], x[..., 0])
        return np.stack([r, theta], axis=-1)

    def jacobian(self, q):
        q = np.asarray(q, dtype=float)
        r, theta = q[..., 0], q[..., 1]
        c, s = np.cos(theta), np.sin(theta)
        jac = np.empty(q.shape[:-1] + (2, 2))
        jac[..., 0, 0], jac[..., 0, 1] = c, -r * s
        jac[..., 1, 0], jac[..., 1, 1] = s, r * c
        return jac

    def map_hessian(self, q):
        q = np.asarray(q, dtype=float)
        r, theta = q[..., 0], q[..., 1]
        c, s = np.cos(theta), np.sin(theta)
        k = np.zeros(q.shape[:-1] + (2, 2, 2))
        k[..., 0, 0, 1] = k[..., 0, 1, 0] = -s
        k[..., 0, 1, 1] = -r * c
        k[..., 1, 0, 1] = k[..., 1, 1, 0] = c
        k[..., 1, 1, 1] = -r * s
        return k


def _central_difference(fn: ArrayFn, q: np.ndarray, step: float) -> np.ndarray:
    """Stack d fn / d q^sigma on a new trailing axis."""
    q = np.asarray(q, dtype=float)
    columns = []
    for sigma in range(q.shape[-1]):
        offset = np.zeros(q.shape[-1])
        offset[sigma] = step
        columns.append((fn(q + offset) - fn(q - offset)) / (2.0 * step))
    return np.stack(columns, axis=-1)


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2))


def inverse_metric(chart: Chart, q: np.ndarray) -> np.ndarray:
    g = chart.metric(q)
    if g.shape[-1] == 0:
        return np.array(g)
    condition = np.linalg.cond(g)
    if np.any(~np.isfinite(condition)) or np.any(condition > SINGULAR_CONDITION):
        raise SingularMetric(
            f"Metric of chart '{chart.name}' is singular "
            f"(condition number {np.max(condition):.3e})"
        )
    return np.linalg.inv(g)


def christoffel(chart: Chart, q: np.ndarray) -> np.ndarray:
    """
    Christoffel symbols of the second kind.

    Returns gamma[..., sigma, mu, nu], symmetric in (mu, nu).
    """
    q = np.asarray(q, dtype=float)
    g_inv = inverse_metric(chart, q)
    dg = chart.metric_derivatives(q)
    # lowered[rho, mu, nu] = 1/2 (d_mu g_{rho nu} + d_nu g_{rho mu} - d_rho g_{mu nu})
    lowered = 0.5 * (
        np.swapaxes(dg, -1, -2)
        + dg
        - np.moveaxis(dg, -1, -3)
    )
    gamma = np.einsum("...sr,...rmn->...smn", g_inv, lowered)
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def covariant_hessian(
    f: ScalarField, chart: Chart, q: np.ndarray, connection: bool = True
) -> np.ndarray:
    """
    Covariant Hessian f_{;mu nu} of a scalar given in chart coordinates.

    `connection=False` drops the Christoffel term and returns the bare
    partial Hessian; charts with a non-constant metric then give a result
    that is no longer a tensor.
    """
    q = np.asarray(q, dtype=float)
    hess = np.asarray(f.hessian(q), dtype=float)
    if connection and not chart.is_reference:
        gamma = christoffel(chart, q)
        hess = hess - np.einsum("...smn,...s->...mn", gamma, f.gradient(q))
    return symmetrize(hess)


def laplacian(f: ScalarField, chart: Chart, q: np.ndarray) -> np.ndarray:
    g_inv = inverse_metric(chart, q)
    return np.einsum("...mn,...mn->...", g_inv, covariant_hessian(f, chart, q))


def pullback(field: ScalarField, chart: Chart) -> ScalarField:
    """
    Express a scalar field given in the reference Cartesian coordinates of
    `chart` as a field of the chart coordinates (chain rule).
    """
    if chart.is_reference:
        return field

    def value(y):
        return field.value(chart.to_cartesian(y))

    def gradient(y):
        jac = chart.jacobian(y)
        return np.einsum("...im,...i->...m", jac, field.gradient(chart.to_cartesian(y)))

    def hessian(y):
        x = chart.to_cartesian(y)
        jac = chart.jacobian(y)
        inner = np.einsum("...im,...ij,...jn->...mn", jac, field.hessian(x), jac)
        curvature = np.einsum("...i,...imn->...mn", field.gradient(x), chart.map_hessian(y))
        return symmetrize(inner + curvature)

    return ScalarField(n=chart.dimension, value=value, gradient=gradient, hessian=hessian)


def pushforward(chart: Chart, q: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Map contravariant components at q into the reference Cartesian chart."""
    return np.einsum("...im,...m->...i", chart.jacobian(q), vector)


def schroedinger_residual(state, chart: Optional[Chart], q: np.ndarray) -> np.ndarray:
    """E psi + (hbar^2 / 2) laplacian(psi) - V psi, zero for an eigenstate."""
    chart = chart if chart is not None else state.chart()
    q = np.asarray(q, dtype=float)
    field = pullback(state.field, chart)
    x = chart.to_cartesian(q)
    psi = field.value(q)
    return (
        state.energy * psi
        + 0.5 * state.hbar**2 * laplacian(field, chart, q)
        - state.potential(x) * psi
    )
