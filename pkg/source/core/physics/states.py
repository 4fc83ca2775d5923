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
Analytic wavefunction catalog.

Real stationary states feed the principal-direction, Grommer and flat laws;
time-dependent two-vector states (psi_1 + i psi_2) feed the internal-angle
model. Every state carries closed-form derivatives, its Planck constant,
the per-coordinate masses, the particle partition (`blocks`) and a declared
domain box used for quadrature and sampling.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from core.constants import FD_CHECK_STEP, HO_BOX_WIDTHS, MAX_HO_LEVEL
from core.exceptions import StateError, UnsupportedLevel
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_hermite

from .geometry import CartesianChart, ScalarField

logger = logging.getLogger("States")

Blocks = Tuple[Tuple[int, ...], ...]
Box = Tuple[Tuple[float, float], ...]


@dataclass(frozen=True)
class RealStationaryState:
    n: int  # Configuration-space dimension
    psi: Callable  # (..., n) -> (...)
    grad: Callable  # (..., n) -> (..., n)
    hess: Callable  # (..., n) -> (..., n, n)
    energy: float  # Eigenvalue E
    potential: Callable  # (..., n) -> (...)
    hbar: float = 1.0
    masses: Tuple[float, ...] = ()  # Per coordinate, sets the Cartesian metric
    blocks: Blocks = ()  # Coordinate indices per particle
    box: Box = ()  # Declared domain, one interval per coordinate
    peak: float = 1.0  # max |psi| over the box
    label: str = ""

    @property
    def field(self) -> ScalarField:
        return ScalarField(n=self.n, value=self.psi, gradient=self.grad, hessian=self.hess)

    @property
    def log_field(self) -> ScalarField:
        """log psi and its derivatives, defined where psi > 0."""

        def value(q):
            return np.log(self.psi(q))

        def gradient(q):
            return self.grad(q) / self.psi(q)[..., None]

        def hessian(q):
            psi = self.psi(q)[..., None, None]
            grad = self.grad(q)
            return self.hess(q) / psi - np.einsum("...i,...j->...ij", grad, grad) / psi**2

        return ScalarField(n=self.n, value=value, gradient=gradient, hessian=hessian)

    def chart(self) -> CartesianChart:
        return CartesianChart(self.masses)


@dataclass(frozen=True)
class TwoVectorState:
    """
    psi = psi_1 + i psi_2 as a function of (x, t).

    The callables return the complex amplitude and its closed-form spatial
    gradient, Hessian and time derivative; the real pair is read off from
    the real and imaginary parts.
    """

    n: int
    amplitude: Callable  # (x, t) -> complex (...)
    amplitude_gradient: Callable  # (x, t) -> complex (..., n)
    amplitude_hessian: Callable  # (x, t) -> complex (..., n, n)
    amplitude_rate: Callable  # (x, t) -> complex (...), d psi / dt
    potential: Callable  # (x) -> (...)
    hbar: float = 1.0
    masses: Tuple[float, ...] = ()
    blocks: Blocks = ()
    box: Box = ()
    label: str = ""

    def components(self, x, t=0.0):
        amp = self.amplitude(np.asarray(x, dtype=float), t)
        return amp.real, amp.imag

    def gradients(self, x, t=0.0):
        grad = self.amplitude_gradient(np.asarray(x, dtype=float), t)
        return grad.real, grad.imag

    def hessians(self, x, t=0.0):
        hess = self.amplitude_hessian(np.asarray(x, dtype=float), t)
        return hess.real, hess.imag

    def rates(self, x, t=0.0):
        rate = self.amplitude_rate(np.asarray(x, dtype=float), t)
        return rate.real, rate.imag

    def psi1(self, x, t=0.0):
        return self.components(x, t)[0]

    def psi2(self, x, t=0.0):
        return self.components(x, t)[1]

    def hamiltonian_amplitude(self, x, t=0.0):
        """H psi with H = -sum_i (hbar^2 / 2 m_i) d_i^2 + V, complex."""
        x = np.asarray(x, dtype=float)
        hess = self.amplitude_hessian(x, t)
        diagonal = np.diagonal(hess, axis1=-2, axis2=-1)
        kinetic = -0.5 * self.hbar**2 * np.sum(diagonal / np.asarray(self.masses), axis=-1)
        return kinetic + self.potential(x) * self.amplitude(x, t)


State = Union[RealStationaryState, TwoVectorState]


def _coordinate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 1:
        raise StateError(f"Expected one coordinate per point, got shape {q.shape}")
    return q[..., 0]


def _peak_on_box(psi: Callable, box: Box, samples: int = 4001) -> float:
    lo, hi = box[0]
    grid = np.linspace(lo, hi, samples)[:, None]
    return float(np.max(np.abs(psi(grid))))


def ho_eigenstate(
    k: int, omega: float = 1.0, mass: float = 1.0, hbar: float = 1.0
) -> RealStationaryState:
    """Harmonic-oscillator eigenfunction phi_k with E = (k + 1/2) hbar omega."""
    if int(k) != k or k < 0:
        raise StateError(f"Oscillator level must be a non-negative integer, got {k}")
    if k > MAX_HO_LEVEL:
        raise UnsupportedLevel(f"Oscillator level {k} exceeds the supported maximum {MAX_HO_LEVEL}")
    if omega <= 0 or mass <= 0 or hbar <= 0:
        raise StateError("omega, mass and hbar must be positive")
    k = int(k)
    s = math.sqrt(mass * omega / hbar)
    norm = math.sqrt(s / math.sqrt(math.pi) / (2.0**k * math.factorial(k)))

    def parts(q):
        xi = s * _coordinate(q)
        envelope = np.exp(-0.5 * xi**2)
        h = eval_hermite(k, xi)
        dh = 2.0 * k * eval_hermite(k - 1, xi) if k > 0 else np.zeros_like(xi)
        return xi, envelope, h, dh

    def psi(q):
        _, envelope, h, _ = parts(q)
        return norm * h * envelope

    def grad(q):
        xi, envelope, h, dh = parts(q)
        return (norm * s * (dh - xi * h) * envelope)[..., None]

    def hess(q):
        xi, envelope, h, _ = parts(q)
        return (s**2 * (xi**2 - 2 * k - 1) * norm * h * envelope)[..., None, None]

    def potential(q):
        return 0.5 * mass * omega**2 * _coordinate(q) ** 2

    half_width = HO_BOX_WIDTHS * math.sqrt(hbar / (mass * omega))
    box = ((-half_width, half_width),)
    return RealStationaryState(
        n=1,
        psi=psi,
        grad=grad,
        hess=hess,
        energy=(k + 0.5) * hbar * omega,
        potential=potential,
        hbar=hbar,
        masses=(float(mass),),
        blocks=((0,),),
        box=box,
        peak=_peak_on_box(psi, box),
        label=f"ho:k={k},omega={omega:g},mass={mass:g}",
    )


def box_state(k: int, L: float, hbar: float = 1.0, mass: float = 1.0) -> RealStationaryState:
    """Particle-in-a-box eigenfunction on [0, L] with hard walls."""
    if int(k) != k or k < 1:
        raise StateError(f"Box level must be a positive integer, got {k}")
    if L <= 0:
        raise StateError(f"Box width must be positive, got {L}")
    k = int(k)
    wavenumber = k * math.pi / L
    amplitude = math.sqrt(2.0 / L)

    def psi(q):
        return amplitude * np.sin(wavenumber * _coordinate(q))

    def grad(q):
        return (amplitude * wavenumber * np.cos(wavenumber * _coordinate(q)))[..., None]

    def hess(q):
        return (-(wavenumber**2) * psi(q))[..., None, None]

    def potential(q):
        return np.zeros_like(_coordinate(q))

    return RealStationaryState(
        n=1,
        psi=psi,
        grad=grad,
        hess=hess,
        energy=(hbar * wavenumber) ** 2 / (2.0 * mass),
        potential=potential,
        hbar=hbar,
        masses=(float(mass),),
        blocks=((0,),),
        box=((0.0, float(L)),),
        peak=amplitude,
        label=f"box:k={k},L={L:g}",
    )


def constant_state(
    n: int = 0,
    value: float = 1.0,
    potential: float = 0.0,
    hbar: float = 1.0,
    masses: Optional[Sequence[float]] = None,
    half_width: float = 1.0,
) -> RealStationaryState:
    """psi = value everywhere; an eigenstate of the constant potential with E = V."""
    masses = tuple(float(m) for m in masses) if masses is not None else (1.0,) * n
    if len(masses) != n:
        raise StateError(f"Expected {n} masses, got {len(masses)}")

    def psi(q):
        q = np.asarray(q, dtype=float)
        return np.full(q.shape[:-1], float(value))

    def grad(q):
        return np.zeros(np.shape(q), dtype=float)

    def hess(q):
        q = np.asarray(q, dtype=float)
        return np.zeros(q.shape + (n,))

    def potential_fn(q):
        q = np.asarray(q, dtype=float)
        return np.full(q.shape[:-1], float(potential))

    return RealStationaryState(
        n=n,
        psi=psi,
        grad=grad,
        hess=hess,
        energy=float(potential),
        potential=potential_fn,
        hbar=hbar,
        masses=masses,
        blocks=tuple((i,) for i in range(n)),
        box=((-half_width, half_width),) * n,
        peak=abs(float(value)),
        label=f"const:n={n},value={value:g},V={potential:g}",
    )


def _shift_blocks(blocks: Blocks, offset: int) -> Blocks:
    return tuple(tuple(i + offset for i in block) for block in blocks)


def _check_hbar(a: State, b: State) -> None:
    if not math.isclose(a.hbar, b.hbar):
        raise StateError(f"Cannot combine states with hbar {a.hbar} and {b.hbar}")


def product(a: RealStationaryState, b: RealStationaryState) -> RealStationaryState:
    """psi(q) = psi_a(q_A) psi_b(q_B) on the concatenated configuration space."""
    _check_hbar(a, b)
    na = a.n

    def split(q):
        q = np.asarray(q, dtype=float)
        return q[..., :na], q[..., na:]

    def psi(q):
        qa, qb = split(q)
        return a.psi(qa) * b.psi(qb)

    def grad(q):
        qa, qb = split(q)
        return np.concatenate(
            [a.grad(qa) * b.psi(qb)[..., None], a.psi(qa)[..., None] * b.grad(qb)], axis=-1
        )

    def hess(q):
        qa, qb = split(q)
        pa, pb = a.psi(qa)[..., None, None], b.psi(qb)[..., None, None]
        cross = np.einsum("...i,...j->...ij", a.grad(qa), b.grad(qb))
        top = np.concatenate([a.hess(qa) * pb, cross], axis=-1)
        bottom = np.concatenate([np.swapaxes(cross, -1, -2), pa * b.hess(qb)], axis=-1)
        return np.concatenate([top, bottom], axis=-2)

    def potential(q):
        qa, qb = split(q)
        return a.potential(qa) + b.potential(qb)

    return RealStationaryState(
        n=a.n + b.n,
        psi=psi,
        grad=grad,
        hess=hess,
        energy=a.energy + b.energy,
        potential=potential,
        hbar=a.hbar,
        masses=a.masses + b.masses,
        blocks=a.blocks + _shift_blocks(b.blocks, na),
        box=a.box + b.box,
        peak=a.peak * b.peak,
        label=f"product({a.label},{b.label})",
    )


def _phase(energy: float, hbar: float, t) -> np.ndarray:
    return np.exp(-1j * energy * np.asarray(t, dtype=float) / hbar)


def rotating_eigenstate(s: RealStationaryState) -> TwoVectorState:
    """psi(q) exp(-i E t / hbar): psi_1 = psi cos(Et/hbar), psi_2 = -psi sin(Et/hbar)."""

    def amplitude(x, t):
        return s.psi(x) * _phase(s.energy, s.hbar, t)

    def amplitude_gradient(x, t):
        return s.grad(x) * _phase(s.energy, s.hbar, t)[..., None]

    def amplitude_hessian(x, t):
        return s.hess(x) * _phase(s.energy, s.hbar, t)[..., None, None]

    def amplitude_rate(x, t):
        return (-1j * s.energy / s.hbar) * amplitude(x, t)

    return TwoVectorState(
        n=s.n,
        amplitude=amplitude,
        amplitude_gradient=amplitude_gradient,
        amplitude_hessian=amplitude_hessian,
        amplitude_rate=amplitude_rate,
        potential=s.potential,
        hbar=s.hbar,
        masses=s.masses,
        blocks=s.blocks,
        box=s.box,
        label=f"rot({s.label})",
    )


def superpose(
    states: Sequence[RealStationaryState], weights: Sequence[complex], label: str = ""
) -> TwoVectorState:
    """Normalized sum of rotating eigenstates sharing one configuration space."""
    if len(states) != len(weights) or not states:
        raise StateError("Superposition needs one weight per state")
    weights = np.asarray(weights, dtype=complex)
    total = math.sqrt(float(np.sum(np.abs(weights) ** 2)))
    if total == 0.0:
        raise StateError("Superposition weights must not all vanish")
    weights = weights / total
    rotating = [rotating_eigenstate(s) for s in states]
    first = states[0]

    def combine(name):
        def fn(x, t):
            return sum(w * getattr(r, name)(x, t) for w, r in zip(weights, rotating))

        return fn

    return TwoVectorState(
        n=first.n,
        amplitude=combine("amplitude"),
        amplitude_gradient=combine("amplitude_gradient"),
        amplitude_hessian=combine("amplitude_hessian"),
        amplitude_rate=combine("amplitude_rate"),
        potential=first.potential,
        hbar=first.hbar,
        masses=first.masses,
        blocks=first.blocks,
        box=first.box,
        label=label or "sup(" + ",".join(s.label for s in states) + ")",
    )


def ho_superposition(
    levels: Sequence[int],
    weights: Optional[Sequence[complex]] = None,
    omega: float = 1.0,
    mass: float = 1.0,
    hbar: float = 1.0,
) -> TwoVectorState:
    levels = [int(k) for k in levels]
    if len(set(levels)) != len(levels) or len(levels) < 2:
        raise StateError(f"Superposition levels must be distinct, got {levels}")
    weights = list(weights) if weights is not None else [1.0] * len(levels)
    states = [ho_eigenstate(k, omega, mass, hbar) for k in levels]
    label = (
        "sup:levels=" + "|".join(str(k) for k in levels)
        + ",weights=" + "|".join(f"{w:g}" for w in weights)
        + f",omega={omega:g},mass={mass:g}"
    )
    return superpose(states, weights, label)


def compose_states(a: TwoVectorState, b: TwoVectorState) -> TwoVectorState:
    """
    Complex product psi_a(x_A) psi_b(x_B):
    phi_1 = psi_1 phi'_1 - psi_2 phi'_2, phi_2 = psi_1 phi'_2 + psi_2 phi'_1.
    """
    _check_hbar(a, b)
    na = a.n

    def split(x):
        x = np.asarray(x, dtype=float)
        return x[..., :na], x[..., na:]

    def amplitude(x, t):
        xa, xb = split(x)
        return a.amplitude(xa, t) * b.amplitude(xb, t)

    def amplitude_gradient(x, t):
        xa, xb = split(x)
        return np.concatenate(
            [
                a.amplitude_gradient(xa, t) * b.amplitude(xb, t)[..., None],
                a.amplitude(xa, t)[..., None] * b.amplitude_gradient(xb, t),
            ],
            axis=-1,
        )

    def amplitude_hessian(x, t):
        xa, xb = split(x)
        pa = a.amplitude(xa, t)[..., None, None]
        pb = b.amplitude(xb, t)[..., None, None]
        cross = np.einsum(
            "...i,...j->...ij", a.amplitude_gradient(xa, t), b.amplitude_gradient(xb, t)
        )
        top = np.concatenate([a.amplitude_hessian(xa, t) * pb, cross], axis=-1)
        bottom = np.concatenate(
            [np.swapaxes(cross, -1, -2), pa * b.amplitude_hessian(xb, t)], axis=-1
        )
        return np.concatenate([top, bottom], axis=-2)

    def amplitude_rate(x, t):
        xa, xb = split(x)
        return a.amplitude_rate(xa, t) * b.amplitude(xb, t) + a.amplitude(
            xa, t
        ) * b.amplitude_rate(xb, t)

    def potential(x):
        xa, xb = split(x)
        return a.potential(xa) + b.potential(xb)

    return TwoVectorState(
        n=a.n + b.n,
        amplitude=amplitude,
        amplitude_gradient=amplitude_gradient,
        amplitude_hessian=amplitude_hessian,
        amplitude_rate=amplitude_rate,
        potential=potential,
        hbar=a.hbar,
        masses=a.masses + b.masses,
        blocks=a.blocks + _shift_blocks(b.blocks, na),
        box=a.box + b.box,
        label=f"compose({a.label},{b.label})",
    )


def two_vector_residual(state: TwoVectorState, x, t=0.0):
    """(hbar d_t psi_1 - H psi_2, hbar d_t psi_2 + H psi_1), zero for a solution."""
    rate1, rate2 = state.rates(x, t)
    h_psi = state.hamiltonian_amplitude(x, t)
    return state.hbar * rate1 - h_psi.imag, state.hbar * rate2 + h_psi.real


def density(state: State, x, t=0.0):
    if isinstance(state, RealStationaryState):
        return state.psi(np.asarray(x, dtype=float)) ** 2
    psi1, psi2 = state.components(x, t)
    return psi1**2 + psi2**2


def current(state: TwoVectorState, x, t=0.0):
    """j_i = (hbar / m_i)(psi_1 grad_i psi_2 - psi_2 grad_i psi_1)."""
    psi1, psi2 = state.components(x, t)
    grad1, grad2 = state.gradients(x, t)
    flux = psi1[..., None] * grad2 - psi2[..., None] * grad1
    return state.hbar * flux / np.asarray(state.masses)


def probability_flow_residual(state: TwoVectorState, x, t=0.0):
    """d rho / dt + sum_i d_i j_i, closed form."""
    psi1, psi2 = state.components(x, t)
    rate1, rate2 = state.rates(x, t)
    hess1, hess2 = state.hessians(x, t)
    lap1 = np.diagonal(hess1, axis1=-2, axis2=-1)
    lap2 = np.diagonal(hess2, axis1=-2, axis2=-1)
    masses = np.asarray(state.masses)
    divergence = state.hbar * np.sum(
        (psi1[..., None] * lap2 - psi2[..., None] * lap1) / masses, axis=-1
    )
    return 2.0 * (psi1 * rate1 + psi2 * rate2) + divergence


def quadrature_grid(box: Box, points: int = 96):
    """Tensor Gauss-Legendre nodes (..., n) and weights (...) over the box."""
    if len(box) > 3:
        raise StateError(f"Box quadrature supports up to three coordinates, got {len(box)}")
    nodes, weights = leggauss(points)
    axes, axis_weights = [], []
    for lo, hi in box:
        half = 0.5 * (hi - lo)
        axes.append(lo + half * (nodes + 1.0))
        axis_weights.append(half * weights)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    weight = np.ones(mesh.shape[:-1])
    for axis, w in enumerate(axis_weights):
        shape = [1] * len(box)
        shape[axis] = w.size
        weight = weight * w.reshape(shape)
    return mesh, weight


def norm(state: State, t=0.0, points: int = 96) -> float:
    """Integral of rho over the declared box."""
    mesh, weight = quadrature_grid(state.box, points)
    return float(np.sum(weight * density(state, mesh, t)))


def _relative_error(analytic, estimate, scale) -> float:
    deviation = float(np.max(np.abs(np.asarray(analytic) - np.asarray(estimate)), initial=0.0))
    scale = max(scale, float(np.max(np.abs(analytic), initial=0.0)))
    if deviation == 0.0:
        return 0.0
    return deviation / scale if scale > 0.0 else math.inf


def fd_check(state: State, q, t: Optional[float] = None, step: float = FD_CHECK_STEP) -> float:
    """
    Worst relative deviation between closed-form derivatives and central
    differences. Each derivative is scaled by max(|psi|, max|derivative|).
    """
    q = np.asarray(q, dtype=float)
    t = 0.0 if t is None else t
    if isinstance(state, RealStationaryState):
        value, gradient, hessian = state.psi, state.grad, state.hess
    else:
        value = lambda x: state.amplitude(x, t)  # noqa: E731
        gradient = lambda x: state.amplitude_gradient(x, t)  # noqa: E731
        hessian = lambda x: state.amplitude_hessian(x, t)  # noqa: E731

    psi = value(q)
    scale = float(np.max(np.abs(psi), initial=0.0))
    fd_grad, fd_hess = [], []
    for i in range(state.n):
        offset = np.zeros(state.n)
        offset[i] = step
        fd_grad.append((value(q + offset) - value(q - offset)) / (2.0 * step))
        fd_hess.append((gradient(q + offset) - gradient(q - offset)) / (2.0 * step))
    worst = 0.0
    if state.n:
        worst = max(
            _relative_error(gradient(q), np.stack(fd_grad, axis=-1), scale),
            _relative_error(hessian(q), np.stack(fd_hess, axis=-1), scale),
        )
    if isinstance(state, TwoVectorState):
        fd_rate = (state.amplitude(q, t + step) - state.amplitude(q, t - step)) / (2.0 * step)
        worst = max(worst, _relative_error(state.amplitude_rate(q, t), fd_rate, scale))
    logger.debug(f"fd_check({state.label}) worst relative deviation {worst:.3e}")
    return worst
