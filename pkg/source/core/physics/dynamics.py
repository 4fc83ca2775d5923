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
Velocity laws for real stationary states and their integration.

The integrator is classical fixed-step RK4 on the output grid t_k = k dt.
Inside a step it sub-steps wherever a mode's radicand R_a is small compared
with its rate of change (step <= refinement * 2 R_a / |dR_a/dt|), so the
square-root turning points are approached and left geometrically. A mode
whose radicand falls to `tolerance` while decreasing is a turning point:
the mode is held at zero speed for the time 4 R_a / |dR_a/dt| the remaining
arc would have taken, then its sign is flipped. Eigenframes are matched to
the previous frame at every evaluation so eigenvector sign changes never
pass for reversals.
"""

import logging
from typing import List, Optional

import numpy as np
from core.api.law import ModeSet, TrajectoryLaw, compose_velocity
from core.constants import (
    MAX_SUBSTEPS,
    MIN_SUBSTEP,
    TURNING_REFINEMENT,
    TURNING_TOLERANCE,
)
from core.exceptions import (
    AmbiguousMatch,
    DegenerateSpectrum,
    NodeOfPsi,
    NonPositivePsi,
    QtrajError,
)
from core.models import AdmissibilityReport, SignAssignment, Trajectory, TurningPoint
from core.plugins.laws import get_law

from .geometry import Chart

logger = logging.getLogger("Dynamics")


def einstein_velocity(state, chart: Optional[Chart], q, signs):
    chart = chart if chart is not None else state.chart()
    return get_law("einstein").velocity(state, chart, q, SignAssignment.of(signs, state.n))


def grommer_velocity(state, chart: Optional[Chart], q, signs):
    chart = chart if chart is not None else state.chart()
    return get_law("grommer").velocity(state, chart, q, SignAssignment.of(signs, state.n))


def flat_velocity(state, q, signs):
    return get_law("flat").velocity(state, state.chart(), q, SignAssignment.of(signs, state.n))


def admissible(law, state, chart: Optional[Chart], q) -> AdmissibilityReport:
    """Per-mode admissibility on a stack of points; reports, never raises on R < 0."""
    law = get_law(law)
    chart = chart if chart is not None else state.chart()
    radicands, degenerate = law.radicands(state, chart, np.asarray(q, dtype=float))
    with np.errstate(invalid="ignore"):
        modes = np.isfinite(radicands) & (radicands >= 0.0)
    return AdmissibilityReport(
        law=law.get_law_name(),
        radicands=radicands,
        modes=modes,
        admissible=np.all(modes, axis=-1),
        degenerate=np.asarray(degenerate, dtype=bool),
    )


def termination_reason(error: Exception) -> str:
    if isinstance(error, DegenerateSpectrum):
        return "degenerate_spectrum"
    if isinstance(error, AmbiguousMatch):
        return "ambiguous_match"
    if isinstance(error, (NodeOfPsi, NonPositivePsi)):
        return "node_of_psi"
    return "left_admissible_domain"


class _StepFailed(Exception):
    def __init__(self, error: Optional[QtrajError] = None):
        super().__init__(str(error) if error else "stage left the admissible domain")
        self.error = error


class TrajectoryIntegrator:
    def __init__(
        self,
        law: TrajectoryLaw,
        state,
        chart: Chart,
        dt: float,
        refinement: float = TURNING_REFINEMENT,
        tolerance: float = TURNING_TOLERANCE,
    ):
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.law = law
        self.state = state
        self.chart = chart
        self.dt = float(dt)
        self.refinement = float(refinement)
        self.tolerance = float(tolerance)
        self.hbar = state.hbar

    def _modes(self, q, reference) -> ModeSet:
        frame = reference.frame if reference is not None else None
        return self.law.modes(self.state, self.chart, q, frame)

    def _velocity(self, mode_set, signs, moving):
        return compose_velocity(mode_set, signs, self.hbar, moving)

    def _rate(self, q, mode_set, signs, moving, epsilon):
        """dR_a/dt along the current motion, central difference in time."""
        v = self._velocity(mode_set, signs, moving)
        if not np.any(v):
            return np.zeros_like(mode_set.radicands)
        plus = self._modes(q + epsilon * v, mode_set).radicands
        minus = self._modes(q - epsilon * v, mode_set).radicands
        return (plus - minus) / (2.0 * epsilon)

    def _inward_signs(self, q, mode_set, signs):
        """Modes starting on a boundary move towards increasing radicand."""
        epsilon = 1e-6 * self.dt
        for a in np.flatnonzero(mode_set.radicands <= self.tolerance):
            direction = mode_set.directions[:, a]
            plus = self._modes(q + epsilon * direction, mode_set).radicands[a]
            minus = self._modes(q - epsilon * direction, mode_set).radicands[a]
            if plus != minus:
                signs[a] = 1.0 if plus > minus else -1.0
        return signs

    def _rk4(self, q, h, mode_set, signs, moving):
        try:
            k1 = self._velocity(mode_set, signs, moving)
            stage = self._modes(q + 0.5 * h * k1, mode_set)
            self._check_stage(stage, moving)
            k2 = self._velocity(stage, signs, moving)
            stage = self._modes(q + 0.5 * h * k2, mode_set)
            self._check_stage(stage, moving)
            k3 = self._velocity(stage, signs, moving)
            stage = self._modes(q + h * k3, mode_set)
            self._check_stage(stage, moving)
            k4 = self._velocity(stage, signs, moving)
            q_new = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            end = self._modes(q_new, mode_set)
            self._check_stage(end, moving)
        except QtrajError as e:
            raise _StepFailed(e) from e
        return q_new, end

    def _check_stage(self, mode_set, moving):
        if np.any(moving & (mode_set.radicands < -self.tolerance)):
            raise _StepFailed()

    def run(self, q0, signs0, t_max: float) -> Trajectory:
        law_name = self.law.get_law_name()
        n_modes = self.law.mode_count(self.state)
        signs = SignAssignment.of(signs0, n_modes).as_array()
        q = np.asarray(q0, dtype=float).copy()
        steps = int(round(t_max / self.dt))

        times: List[float] = []
        points, velocities, history = [], [], []
        turning: List[TurningPoint] = []

        def finish(reason: str, detail: str = "") -> Trajectory:
            if reason != "completed":
                logger.info(f"{law_name} trajectory stopped at t = {t:.6f}: {reason} {detail}")
            n = q.size
            return Trajectory(
                law=law_name,
                times=np.asarray(times, dtype=float),
                points=np.asarray(points, dtype=float).reshape(-1, n),
                velocities=np.asarray(velocities, dtype=float).reshape(-1, n),
                signs=np.asarray(history, dtype=float).reshape(-1, n_modes),
                reason=reason,
                turning_points=sorted(turning, key=lambda tp: (tp.time, tp.mode)),
                detail=detail,
            )

        t = 0.0
        try:
            current = self._modes(q, None)
        except QtrajError as e:
            return finish(termination_reason(e), str(e))
        if np.any(current.radicands < -self.tolerance):
            return finish(
                "left_admissible_domain",
                f"initial point has radicands {np.array2string(current.radicands, precision=4)}",
            )
        try:
            signs = self._inward_signs(q, current, signs)
        except QtrajError as e:
            return finish(termination_reason(e), str(e))

        frozen = np.zeros(n_modes, dtype=bool)
        dwell = np.zeros(n_modes)
        previous_radicands: Optional[np.ndarray] = None
        previous_step = 0.0

        def record(time: float):
            times.append(time)
            points.append(q.copy())
            velocities.append(self._velocity(current, signs, ~frozen))
            history.append(signs.copy())

        record(0.0)
        for k in range(1, steps + 1):
            t_target = k * self.dt
            substeps = 0
            while t_target - t > 1e-12 * self.dt:
                substeps += 1
                if substeps > MAX_SUBSTEPS:
                    return finish("left_admissible_domain", "step size collapsed")

                released = frozen & (dwell <= 1e-15 * max(1.0, t))
                for a in np.flatnonzero(released):
                    signs[a] = -signs[a]
                    frozen[a] = False
                    dwell[a] = 0.0
                if np.any(released):
                    previous_radicands = None

                moving = ~frozen
                try:
                    if previous_radicands is not None and previous_step > 0.0:
                        rate = (current.radicands - previous_radicands) / previous_step
                    else:
                        rate = self._rate(q, current, signs, moving, 1e-6 * self.dt)
                except QtrajError as e:
                    return finish(termination_reason(e), str(e))

                h = t_target - t
                varying = moving & (rate != 0.0) & (current.radicands > 0.0)
                if np.any(varying):
                    scale = 2.0 * current.radicands[varying] / np.abs(rate[varying])
                    h = min(h, self.refinement * float(np.min(scale)))
                if np.any(frozen):
                    h = min(h, float(np.min(dwell[frozen])))
                h = max(h, MIN_SUBSTEP)

                while True:
                    try:
                        q_new, end = self._rk4(q, h, current, signs, moving)
                        break
                    except _StepFailed as failure:
                        h *= 0.5
                        if h < MIN_SUBSTEP:
                            if failure.error is not None:
                                return finish(termination_reason(failure.error), str(failure.error))
                            return finish("left_admissible_domain", "no admissible step")

                previous_radicands = current.radicands
                previous_step = h
                q, current = q_new, end
                t = min(t + h, t_target) if t_target - (t + h) < 1e-12 * self.dt else t + h
                dwell[frozen] -= h

                hits = moving & (current.radicands <= self.tolerance)
                if np.any(hits):
                    try:
                        slope = (current.radicands - previous_radicands) / previous_step
                        horizon = np.clip(current.radicands[hits], 1e-300, None) / np.maximum(
                            np.abs(slope[hits]), 1e-300
                        )
                        epsilon = 2e-2 * float(np.min(horizon))
                        rate = self._rate(q, current, signs, moving, max(epsilon, 1e-15))
                    except QtrajError as e:
                        return finish(termination_reason(e), str(e))
                    for a in np.flatnonzero(hits & (rate < 0.0)):
                        remaining = 2.0 * max(current.radicands[a], 0.0) / abs(rate[a])
                        frozen[a] = True
                        dwell[a] = 2.0 * remaining
                        turning.append(
                            TurningPoint(time=t + remaining, mode=int(a), point=tuple(q.tolist()))
                        )
                        logger.debug(f"{law_name} mode {a} turning point at t = {t + remaining:.9f}")
                    previous_radicands = None

            t = t_target
            record(t)

        return finish("completed")


def integrate(
    law,
    state,
    chart: Optional[Chart],
    q0,
    signs0,
    dt: float,
    t_max: float,
    refinement: float = TURNING_REFINEMENT,
    tolerance: float = TURNING_TOLERANCE,
) -> Trajectory:
    law = get_law(law)
    chart = chart if chart is not None else state.chart()
    law.check_chart(chart)
    integrator = TrajectoryIntegrator(law, state, chart, dt, refinement, tolerance)
    trajectory = integrator.run(q0, signs0, t_max)
    logger.debug(
        f"{trajectory.law} trajectory: {trajectory.times.size} records, "
        f"{len(trajectory.turning_points)} turning points, reason {trajectory.reason}"
    )
    return trajectory
