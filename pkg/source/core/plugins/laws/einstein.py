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
from core.physics.eigenframe import align_frame, principal_directions, spectrum
from core.physics.geometry import covariant_hessian, pullback


class EinsteinLaw(TrajectoryLaw):
    """
    Principal directions of the covariant Hessian of psi.

    Modes are the g-orthonormal eigenvectors A_(a) of psi_{;mu nu}, and
    R_a = -lambda_(a) / psi. The spectrum is always solved as a whole, so
    equal eigenvalues (e.g. the two-oscillator ground state at the origin)
    raise DegenerateSpectrum.
    """

    def get_law_name(self) -> str:
        return "einstein"

    def modes(self, state, chart, q, reference=None, connection=True) -> ModeSet:
        self.check_chart(chart)
        q = np.asarray(q, dtype=float)
        field = pullback(state.field, chart)
        psi = field.value(q)
        check_node(state, psi)

        tensor = covariant_hessian(field, chart, q, connection=connection)
        frame = principal_directions(tensor, chart.metric(q), q)
        if reference is not None:
            frame = align_frame(reference, frame)
        return ModeSet(radicands=-frame.eigenvalues / psi, directions=frame.vectors, frame=frame)

    def radicands(self, state, chart, q):
        q = np.asarray(q, dtype=float)
        field = pullback(state.field, chart)
        psi = field.value(q)
        values, _, degenerate = spectrum(covariant_hessian(field, chart, q), chart.metric(q))
        node = np.abs(psi) <= NODE_THRESHOLD * state.peak
        with np.errstate(divide="ignore", invalid="ignore"):
            radicands = -values / psi[..., None]
        return np.where(node[..., None], np.nan, radicands), degenerate
