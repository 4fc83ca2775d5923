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
from core.api.law import ModeSet, TrajectoryLaw, check_node
from core.constants import NODE_THRESHOLD
from core.exceptions import NonPositivePsi
from core.physics.eigenframe import align_frame, principal_directions, spectrum
from core.physics.geometry import covariant_hessian, pullback


class GrommerLaw(TrajectoryLaw):
    """
    Principal directions of the covariant Hessian of log psi.

    R_a = -(kappa_(a) + (log psi)_(a)^2) with (log psi)_(a) the component of
    grad log psi along B_(a). In the reference chart the particle partition
    of the state is handed to the eigensolver: a product state has a
    block-diagonal log-Hessian, so each particle's modes are solved alone.
    """

    def get_law_name(self) -> str:
        return "grommer"

    @staticmethod
    def _blocks(state, chart):
        return state.blocks if chart.is_reference and state.blocks else None

    def modes(self, state, chart, q, reference=None, connection=True) -> ModeSet:
        self.check_chart(chart)
        q = np.asarray(q, dtype=float)
        psi = pullback(state.field, chart).value(q)
        check_node(state, psi, NonPositivePsi)
        if np.any(psi <= 0.0):
            raise NonPositivePsi(f"log psi needs psi > 0, got {float(psi):.3e}")

        field = pullback(state.log_field, chart)
        tensor = covariant_hessian(field, chart, q, connection=connection)
        frame = principal_directions(tensor, chart.metric(q), q, self._blocks(state, chart))
        if reference is not None:
            frame = align_frame(reference, frame)
        projections = frame.vectors.T @ field.gradient(q)
        radicands = -(frame.eigenvalues + projections**2)
        return ModeSet(radicands=radicands, directions=frame.vectors, frame=frame)

    def radicands(self, state, chart, q):
        q = np.asarray(q, dtype=float)
        psi = pullback(state.field, chart).value(q)
        usable = psi > NODE_THRESHOLD * state.peak
        field = pullback(state.log_field, chart)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            tensor = covariant_hessian(field, chart, q)
            gradient = field.gradient(q)
        # Points without a logarithm get a zero tensor and are masked below.
        tensor = np.where(usable[..., None, None], tensor, 0.0)
        gradient = np.where(usable[..., None], gradient, 0.0)
        values, vectors, degenerate = spectrum(tensor, chart.metric(q), self._blocks(state, chart))
        projections = np.einsum("...ma,...m->...a", vectors, gradient)
        radicands = -(values + projections**2)
        return np.where(usable[..., None], radicands, np.nan), degenerate & usable
