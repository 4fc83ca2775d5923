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
Continuous-angle representation of two-vector states.

The internal index of (psi_1, psi_2) is traded for dependence on Euler
angles a = (alpha, beta, gamma) through

    xi(x, a, t) = psi_1(x, t) u_1(a) + psi_2(x, t) u_2(a)
    u_1 = c cos(alpha/2) exp(-i(gamma + beta)/2)
    u_2 = -i c sin(alpha/2) exp(i(beta - gamma)/2),   c = 1 / (2 sqrt(2) pi)

with measure sin(alpha) dalpha dbeta dgamma over [0, pi] x [0, 2pi) x [0, 4pi).
On span{u_1, u_2} the operators M_k act as (hbar/2) sigma_k on the
coefficient pair; M_2 is also available as the angular differential operator
-i hbar (sin b d_a + cos b cot a d_b - cos b csc a d_g), which drives the
angle dynamics. Configuration points move with v_i and the angles with
omega_2 times the kinematic row of M_2.

Functions take x of shape (..., n) and angles of shape (..., 3) (or an
AngularPoint); leading shapes broadcast against each other.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from core.constants import (
    ALPHA_POINTS,
    ANGULAR_FD_STEP,
    ANGULAR_REFINEMENT,
    BETA_PERIOD,
    BETA_POINTS,
    COUPLING_FD_STEP,
    GAMMA_PERIOD,
    GAMMA_POINTS,
    MAX_SUBSTEPS,
    MIN_SUBSTEP,
    POLE_HALT,
    POLE_SAMPLE_GUARD,
    SPATIAL_REFINEMENT,
    XI_THRESHOLD,
)
from core.exceptions import XiNode
from core.models import AngularPoint, EnsembleState, InternalPath
from numpy.polynomial.legendre import leggauss

from .states import TwoVectorState, compose_states, quadrature_grid

logger = logging.getLogger("Holland")

BASIS_NORMALIZATION = 1.0 / (2.0 * math.sqrt(2.0) * math.pi)
DENSITY_FACTOR = BASIS_NORMALIZATION**2  # 1 / (8 pi^2)

SIGMA = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1j], [1j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=complex,
)

Angles = Union[AngularPoint, np.ndarray, Sequence[float]]


def _angles(a: Angles) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(a, AngularPoint):
        a = a.as_array()
    a = np.asarray(a, dtype=float)
    return a[..., 0], a[..., 1], a[..., 2]


def basis(a: Angles) -> Tuple[np.ndarray, np.ndarray]:
    alpha, beta, gamma = _angles(a)
    u1 = BASIS_NORMALIZATION * np.cos(0.5 * alpha) * np.exp(-0.5j * (gamma + beta))
    u2 = -1j * BASIS_NORMALIZATION * np.sin(0.5 * alpha) * np.exp(0.5j * (beta - gamma))
    return u1, u2


def _pair_density(p, q, alpha, beta):
    """c^2 [p^2 cos^2(a/2) + q^2 sin^2(a/2) + p q sin a sin b] for the pair (p, q)."""
    return DENSITY_FACTOR * (
        p**2 * np.cos(0.5 * alpha) ** 2
        + q**2 * np.sin(0.5 * alpha) ** 2
        + p * q * np.sin(alpha) * np.sin(beta)
    )


def xi(state: TwoVectorState, x, a: Angles, t=0.0):
    psi1, psi2 = state.components(x, t)
    u1, u2 = basis(a)
    return psi1 * u1 + psi2 * u2


def xi_density(state: TwoVectorState, x, a: Angles, t=0.0):
    """|xi|^2 in closed form."""
    psi1, psi2 = state.components(x, t)
    alpha, beta, _ = _angles(a)
    return _pair_density(psi1, psi2, alpha, beta)


def m_apply(k: int, c, hbar: float = 1.0, conjugate: bool = False) -> np.ndarray:
    """
    Coefficient action of M_k on span{u_1, u_2}: (hbar/2) sigma_k c.

    With `conjugate=True` the pair holds coefficients on {u_1*, u_2*}, where
    the action is -(hbar/2) conj(sigma_k).
    """
    if k not in (1, 2, 3):
        raise ValueError(f"M_k is defined for k = 1, 2, 3, got {k}")
    sigma = SIGMA[k - 1]
    if conjugate:
        sigma = -np.conj(sigma)
    c = np.asarray(c, dtype=complex)
    return 0.5 * hbar * np.einsum("ij,j...->i...", sigma, c)


def angular_kinematics(a: Angles) -> np.ndarray:
    """(sin b, cos b cot a, -cos b csc a) stacked on a trailing axis."""
    alpha, beta, _ = _angles(a)
    sin_alpha = np.sin(alpha)
    return np.stack(
        [np.sin(beta), np.cos(beta) * np.cos(alpha) / sin_alpha, -np.cos(beta) / sin_alpha],
        axis=-1,
    )


def angular_derivative(f: Callable, a: Angles, step: float = ANGULAR_FD_STEP):
    """(sin b d_alpha + cos b cot a d_beta - cos b csc a d_gamma) f by central differences."""
    if isinstance(a, AngularPoint):
        a = a.as_array()
    a = np.asarray(a, dtype=float)
    row = angular_kinematics(a)
    total = 0.0
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = step
        partial = (f(a + offset) - f(a - offset)) / (2.0 * step)
        total = total + row[..., axis] * partial
    return total


def m2_differential(f: Callable, a: Angles, hbar: float = 1.0, step: float = ANGULAR_FD_STEP):
    """Explicit M_2 = -i hbar (angular derivative) applied to an angle function."""
    return -1j * hbar * angular_derivative(f, a, step)


def xi_equation_residual(state: TwoVectorState, x, a: Angles, t=0.0, explicit: bool = False):
    """
    i hbar d_t xi + (2/hbar) H M_2 xi, zero for a solution.

    The default route applies M_2 through its coefficient action; with
    `explicit=True` the angular differential operator is used instead.
    """
    hbar = state.hbar
    rate1, rate2 = state.rates(x, t)
    h_psi = state.hamiltonian_amplitude(x, t)
    u1, u2 = basis(a)
    time_part = 1j * hbar * (rate1 * u1 + rate2 * u2)
    if explicit:

        def h_xi(angles):
            v1, v2 = basis(angles)
            return h_psi.real * v1 + h_psi.imag * v2

        operator_part = m2_differential(h_xi, a, hbar)
    else:
        coefficients = m_apply(2, np.stack([h_psi.real, h_psi.imag]), hbar)
        operator_part = coefficients[0] * u1 + coefficients[1] * u2
    return time_part + (2.0 / hbar) * operator_part


def velocity_flux(state: TwoVectorState, x, a: Angles, t=0.0):
    """|xi|^2 v_i, per coordinate, in closed form (no division by |xi|^2)."""
    psi1, psi2 = state.components(x, t)
    grad1, grad2 = state.gradients(x, t)
    alpha, beta, _ = _angles(a)
    psi1, psi2 = np.asarray(psi1)[..., None], np.asarray(psi2)[..., None]
    mixing = (np.sin(alpha) * np.sin(beta))[..., None]
    sin_sq = (2.0 * np.sin(0.5 * alpha) ** 2)[..., None]
    cos_sq = (2.0 * np.cos(0.5 * alpha) ** 2)[..., None]
    bracket = (psi1 * grad1 - psi2 * grad2) * mixing + psi2 * grad1 * sin_sq - psi1 * grad2 * cos_sq
    return -state.hbar * DENSITY_FACTOR * bracket / (2.0 * np.asarray(state.masses))


def velocity_numerator(state: TwoVectorState, x, a: Angles, t=0.0):
    """
    i (xi* M_2 grad xi + xi M_2 grad xi*) per coordinate, with M_2 applied
    through its coefficient action; equals m_i |xi|^2 v_i.
    """
    psi1, psi2 = state.components(x, t)
    grad1, grad2 = state.gradients(x, t)
    u1, u2 = basis(a)
    acted = m_apply(2, np.stack([grad1, grad2]), state.hbar)
    image = acted[0] * u1[..., None] + acted[1] * u2[..., None]
    field = (psi1 * u1 + psi2 * u2)[..., None]
    # M_2 f* = -(M_2 f)* on the conjugate expansion
    return np.real(1j * (np.conj(field) * image - field * np.conj(image)))


def _checked_density(state, x, a, t):
    weight = xi_density(state, x, a, t)
    if np.any(weight <= XI_THRESHOLD):
        raise XiNode(f"|xi|^2 = {float(np.min(weight)):.3e} is below {XI_THRESHOLD:g}")
    return weight


def velocity_field(state: TwoVectorState, x, a: Angles, t=0.0):
    weight = _checked_density(state, x, a, t)
    return velocity_flux(state, x, a, t) / np.asarray(weight)[..., None]


def omega2_weighted(state: TwoVectorState, x, a: Angles, t=0.0):
    """|xi|^2 omega_2 = -(2/hbar)[sum_i (hbar^2 / 2 m_i)|d_i xi|^2 + V |xi|^2]."""
    psi1, psi2 = state.components(x, t)
    grad1, grad2 = state.gradients(x, t)
    alpha, beta, _ = _angles(a)
    gradient_sq = _pair_density(grad1, grad2, np.asarray(alpha)[..., None], np.asarray(beta)[..., None])
    kinetic = np.sum(0.5 * state.hbar**2 * gradient_sq / np.asarray(state.masses), axis=-1)
    potential = state.potential(np.asarray(x, dtype=float)) * _pair_density(psi1, psi2, alpha, beta)
    return -(2.0 / state.hbar) * (kinetic + potential)


def omega2(state: TwoVectorState, x, a: Angles, t=0.0):
    """Angular speed; |grad log xi|^2 is the squared complex modulus."""
    weight = _checked_density(state, x, a, t)
    return omega2_weighted(state, x, a, t) / weight


class AngularQuadrature:
    """Gauss-Legendre in alpha (with sin alpha), trapezoid in beta and gamma."""

    def __init__(
        self,
        alpha_points: int = ALPHA_POINTS,
        beta_points: int = BETA_POINTS,
        gamma_points: int = GAMMA_POINTS,
    ):
        nodes, weights = leggauss(alpha_points)
        self.alpha = 0.5 * math.pi * (nodes + 1.0)
        self.alpha_weights = 0.5 * math.pi * weights * np.sin(self.alpha)
        self.beta = BETA_PERIOD * np.arange(beta_points) / beta_points
        self.beta_weight = BETA_PERIOD / beta_points
        self.gamma = GAMMA_PERIOD * np.arange(gamma_points) / gamma_points
        self.gamma_weight = GAMMA_PERIOD / gamma_points

    def nodes(self, gamma_dependent: bool = False):
        """Flattened angle nodes (Q, 3) and weights (Q,)."""
        gamma = self.gamma if gamma_dependent else np.zeros(1)
        mesh = np.stack(np.meshgrid(self.alpha, self.beta, gamma, indexing="ij"), axis=-1)
        weights = self.alpha_weights[:, None, None] * self.beta_weight * np.ones(mesh.shape[:-1])
        weights = weights * (self.gamma_weight if gamma_dependent else GAMMA_PERIOD)
        return mesh.reshape(-1, 3), weights.reshape(-1)

    def integrate(self, fn: Callable, gamma_dependent: bool = False, vector: bool = False):
        """
        Integrate fn(angles) over the sphere measure. `fn` receives angles of
        shape (Q, 3); for vector-valued integrands pass `vector=True` so the
        node axis is taken as the second to last.
        """
        angles, weights = self.nodes(gamma_dependent)
        values = fn(angles)
        if vector:
            return np.sum(values * weights[:, None], axis=-2)
        return np.sum(values * weights, axis=-1)


_DEFAULT_QUADRATURE: Optional[AngularQuadrature] = None


def default_quadrature() -> AngularQuadrature:
    global _DEFAULT_QUADRATURE
    if _DEFAULT_QUADRATURE is None:
        _DEFAULT_QUADRATURE = AngularQuadrature()
    return _DEFAULT_QUADRATURE


def _expand(x):
    return np.asarray(x, dtype=float)[..., None, :]


def angular_average_density(state: TwoVectorState, x, t=0.0, quadrature=None):
    quadrature = quadrature or default_quadrature()
    x = _expand(x)
    return quadrature.integrate(lambda angles: xi_density(state, x, angles, t))


def angular_average_velocity(state: TwoVectorState, x, t=0.0, quadrature=None):
    """Integral of v_i |xi|^2 over angles divided by the averaged density."""
    quadrature = quadrature or default_quadrature()
    flux = quadrature.integrate(
        lambda angles: velocity_flux(state, _expand(x), angles, t), vector=True
    )
    weight = angular_average_density(state, x, t, quadrature)
    return flux / np.asarray(weight)[..., None]


def continuity_residual(state: TwoVectorState, x, a: Angles, t=0.0, step: float = ANGULAR_FD_STEP):
    """
    d|xi|^2/dt + sum_i d_i(|xi|^2 v_i) + D(|xi|^2 omega_2) with D the angular
    part of M_2 / (-i hbar). Returns (residual, scale) where scale is the sum
    of the magnitudes of the three terms.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(a, AngularPoint):
        a = a.as_array()
    a = np.asarray(a, dtype=float)
    _checked_density(state, x, a, t)

    psi1, psi2 = state.components(x, t)
    rate1, rate2 = state.rates(x, t)
    alpha, beta, _ = _angles(a)
    time_term = DENSITY_FACTOR * (
        2.0 * psi1 * rate1 * np.cos(0.5 * alpha) ** 2
        + 2.0 * psi2 * rate2 * np.sin(0.5 * alpha) ** 2
        + (rate1 * psi2 + psi1 * rate2) * np.sin(alpha) * np.sin(beta)
    )

    spatial_term = 0.0
    spatial_scale = 0.0
    for i in range(state.n):
        offset = np.zeros(state.n)
        offset[i] = step
        forward = velocity_flux(state, x + offset, a, t)[..., i]
        backward = velocity_flux(state, x - offset, a, t)[..., i]
        partial = (forward - backward) / (2.0 * step)
        spatial_term = spatial_term + partial
        spatial_scale = spatial_scale + np.abs(partial)

    angular_term = angular_derivative(lambda angles: omega2_weighted(state, x, angles, t), a, step)
    residual = time_term + spatial_term + angular_term
    scale = np.abs(time_term) + spatial_scale + np.abs(angular_term)
    return residual, scale


def compose(a: TwoVectorState, b: TwoVectorState) -> TwoVectorState:
    """Product state in the two-vector formalism (complex multiplication of the pairs)."""
    return compose_states(a, b)


def integral_composition(
    a: TwoVectorState, b: TwoVectorState, x_a, x_b, t=0.0, quadrature=None
) -> np.ndarray:
    """
    Coefficients of the composed state from angular integrals:
    (int xi_a* M_3 xi_b dOmega, int xi_a* M_1 xi_b dOmega).
    They agree with the coefficient rule up to one overall constant.
    """
    quadrature = quadrature or default_quadrature()
    pair_b = np.stack(b.components(x_b, t))

    def projected(k):
        acted = m_apply(k, pair_b, b.hbar)

        def integrand(angles):
            u1, u2 = basis(angles)
            return np.conj(xi(a, x_a, angles, t)) * (acted[0] * u1 + acted[1] * u2)

        return quadrature.integrate(integrand, gamma_dependent=True)

    return np.array([projected(3), projected(1)])


def composition_constant(a: TwoVectorState, b: TwoVectorState, x_a, x_b, t=0.0, quadrature=None):
    """Ratio of the integral composition to the coefficient rule (real part, per component)."""
    integrals = integral_composition(a, b, x_a, x_b, t, quadrature)
    combined = compose(a, b)
    x = np.concatenate([np.atleast_1d(x_a), np.atleast_1d(x_b)])
    coefficients = np.array(combined.components(x, t))
    if np.any(np.abs(coefficients) < XI_THRESHOLD):
        raise ValueError(
            f"The composed coefficients {np.array2string(coefficients, precision=6)} vanish at "
            f"x = {np.array2string(x, precision=6)}, t = {t:g}; pick a point where both are nonzero"
        )
    return integrals / coefficients


def relative_autonomy(
    state: TwoVectorState, x, a: Angles, t=0.0, step: float = COUPLING_FD_STEP, averaged: bool = False
) -> np.ndarray:
    """
    Frobenius norms of dv_P/dx_Q per particle pair (P, Q). Reports the
    sensitivities only; it does not classify a state as autonomous.
    With `averaged=True` the angular-average velocity is differentiated.
    """
    x = np.asarray(x, dtype=float)

    def velocity(point):
        if averaged:
            return angular_average_velocity(state, point, t)
        return velocity_field(state, point, a, t)

    columns = []
    for j in range(state.n):
        offset = np.zeros(state.n)
        offset[j] = step
        columns.append((velocity(x + offset) - velocity(x - offset)) / (2.0 * step))
    jacobian = np.stack(columns, axis=-1)
    blocks = state.blocks or tuple((i,) for i in range(state.n))
    norms = np.zeros((len(blocks), len(blocks)))
    for p, rows in enumerate(blocks):
        for q, cols in enumerate(blocks):
            norms[p, q] = np.linalg.norm(jacobian[np.ix_(list(rows), list(cols))])
    return norms


def density_bound(state: TwoVectorState, t=0.0, points: int = 64) -> float:
    """Upper estimate of psi_1^2 + psi_2^2 over the declared box."""
    mesh, _ = quadrature_grid(state.box, points)
    lows = np.array([lo for lo, _ in state.box])
    highs = np.array([hi for _, hi in state.box])
    corners = np.stack([lows, highs, 0.5 * (lows + highs)])
    psi1, psi2 = state.components(np.concatenate([mesh.reshape(-1, state.n), corners]), t)
    return float(np.max(psi1**2 + psi2**2))


def sample_initial(
    state: TwoVectorState, t0: float, count: int, seed: int, batch: int = 65536
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rejection sampling of (x, a) from |xi(x, a, t0)|^2 over the box times the
    angle ranges. Returns x of shape (count, n) and angles of shape (count, 3).
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in state.box])
    widths = np.array([hi - lo for lo, hi in state.box])
    envelope = 1.05 * DENSITY_FACTOR * density_bound(state, t0)

    xs, angles, total = [], [], 0
    while total < count:
        x = lows + widths * rng.random((batch, state.n))
        a = np.stack(
            [
                math.pi * rng.random(batch),
                BETA_PERIOD * rng.random(batch),
                GAMMA_PERIOD * rng.random(batch),
            ],
            axis=-1,
        )
        u = rng.random(batch)
        weight = xi_density(state, x, a, t0) * np.sin(a[:, 0])
        if np.any(weight > envelope):
            logger.warning("Sampling envelope exceeded; the density bound is too tight")
        keep = (
            (u * envelope < weight)
            & (a[:, 0] > POLE_SAMPLE_GUARD)
            & (a[:, 0] < math.pi - POLE_SAMPLE_GUARD)
        )
        xs.append(x[keep])
        angles.append(a[keep])
        total += int(np.count_nonzero(keep))
    logger.debug(f"Drew {count} samples of {state.label} with seed {seed}")
    return np.concatenate(xs)[:count], np.concatenate(angles)[:count]


def _rhs(state, x, a, t):
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = xi_density(state, x, a, t)
        v = velocity_flux(state, x, a, t) / weight[..., None]
        spin = omega2_weighted(state, x, a, t) / weight
        return v, spin[..., None] * angular_kinematics(a)


def _wrap(a):
    a = a.copy()
    a[..., 1] = np.mod(a[..., 1], BETA_PERIOD)
    a[..., 2] = np.mod(a[..., 2], GAMMA_PERIOD)
    return a


def _substep(x_rate, a_rate):
    """Largest step that moves each member by at most the refinement lengths."""
    with np.errstate(divide="ignore", invalid="ignore"):
        angular = np.max(np.abs(a_rate), axis=-1) / ANGULAR_REFINEMENT
        spatial = np.max(np.abs(x_rate), axis=-1) / SPATIAL_REFINEMENT
        limit = 1.0 / np.maximum(angular, spatial)
    return np.where(np.isfinite(limit), limit, np.inf)


def _run_members(state, x, a, dt, t_max, t0, record):
    x = np.array(x, dtype=float, copy=True).reshape(-1, state.n)
    a = np.array(a, dtype=float, copy=True).reshape(-1, 3)
    members = x.shape[0]
    steps = int(round((t_max - t0) / dt))
    if steps < 0:
        raise ValueError(f"dt = {dt} does not lead from t0 = {t0} to t_max = {t_max}")
    times = t0 + dt * np.arange(steps + 1)
    direction = math.copysign(1.0, dt)

    reasons = np.full(members, "completed", dtype=object)
    halted_at = np.full(members, times[-1])
    active = np.ones(members, dtype=bool)

    start_weight = xi_density(state, x, a, t0)
    node = start_weight <= XI_THRESHOLD
    pole = (a[:, 0] < POLE_HALT) | (a[:, 0] > math.pi - POLE_HALT)
    reasons[pole] = "pole_encounter"
    reasons[node] = "xi_node"
    halted_at[pole | node] = t0
    active &= ~(pole | node)

    history = [(x.copy(), a.copy())] if record else None
    for k in range(steps):
        index = np.flatnonzero(active)
        remaining = np.full(index.size, abs(dt))
        clock = np.full(index.size, times[k])
        substeps = 0
        # Each member sub-steps on its own near poles and nodes of xi
        while index.size:
            xs, angs = x[index], a[index]
            k1x, k1a = _rhs(state, xs, angs, clock)
            h = np.maximum(np.minimum(remaining, _substep(k1x, k1a)), MIN_SUBSTEP)
            step = direction * h
            half = 0.5 * step
            k2x, k2a = _rhs(state, xs + half[:, None] * k1x, angs + half[:, None] * k1a, clock + half)
            k3x, k3a = _rhs(state, xs + half[:, None] * k2x, angs + half[:, None] * k2a, clock + half)
            k4x, k4a = _rhs(state, xs + step[:, None] * k3x, angs + step[:, None] * k3a, clock + step)
            sixth = (step / 6.0)[:, None]
            new_x = xs + sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            new_a = _wrap(angs + sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a))

            finite = np.all(np.isfinite(new_x), axis=-1) & np.all(np.isfinite(new_a), axis=-1)
            x[index[finite]] = new_x[finite]
            a[index[finite]] = new_a[finite]
            clock = clock + step
            remaining = remaining - h
            substeps += 1

            weight = xi_density(state, x[index], a[index], clock)
            node = ~finite | (weight <= XI_THRESHOLD)
            pole = (a[index, 0] < POLE_HALT) | (a[index, 0] > math.pi - POLE_HALT)
            if substeps >= MAX_SUBSTEPS:
                collapsed = ~(node | pole) & (remaining > 1e-12 * abs(dt))
                near_pole = np.sin(a[index, 0]) < POLE_SAMPLE_GUARD
                pole |= collapsed & near_pole
                node |= collapsed & ~near_pole
            stopped = node | pole
            reasons[index[pole]] = "pole_encounter"
            reasons[index[node]] = "xi_node"
            halted_at[index[stopped]] = times[k + 1]
            active[index[stopped]] = False

            pending = ~stopped & (remaining > 1e-12 * abs(dt))
            index, remaining, clock = index[pending], remaining[pending], clock[pending]
        if record:
            history.append((x.copy(), a.copy()))

    return times, x, a, reasons, halted_at, history


def evolve(state: TwoVectorState, x0, a0: Angles, dt: float, t_max: float, t0: float = 0.0) -> InternalPath:
    """Coupled RK4 for (x, alpha, beta, gamma); halts on poles and nodes of xi."""
    if isinstance(a0, AngularPoint):
        a0 = a0.as_array()
    times, _, _, reasons, halted_at, history = _run_members(state, x0, a0, dt, t_max, t0, True)
    reached = times <= halted_at[0] + 1e-12 * abs(dt) if dt > 0 else times >= halted_at[0] - 1e-12 * abs(dt)
    points = np.array([h[0][0] for h in history])[reached]
    angles = np.array([h[1][0] for h in history])[reached]
    weights = xi_density(state, points, angles, times[reached])
    return InternalPath(
        times=times[reached],
        points=points,
        angles=angles,
        weights=weights,
        reason=str(reasons[0]),
    )


def evolve_ensemble(
    state: TwoVectorState, x, angles, dt: float, t_max: float, t0: float = 0.0
) -> EnsembleState:
    """Vectorised RK4 over members; halted members keep their last state."""
    times, x, a, reasons, halted_at, _ = _run_members(state, x, angles, dt, t_max, t0, False)
    result = EnsembleState(
        times=times, points=x, angles=a, reasons=reasons.astype(str), halted_at=halted_at
    )
    logger.info(f"Evolved {result.members} members of {state.label}: {result.counts()}")
    return result
