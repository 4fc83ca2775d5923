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
from core.exceptions import ChartError
from core.physics.geometry import CartesianChart


class FlatLaw(TrajectoryLaw):
    """
    Per-coordinate law in a global Cartesian chart:
    qdot^mu = s_mu hbar sqrt(-psi_{,mu mu} / (m_mu psi)) / sqrt(m_mu).
    No eigenproblem is solved.
    """

    def get_law_name(self) -> str:
        return "flat"

    def uses_frame(self) -> bool:
        return False

    def check_chart(self, chart) -> None:
        super().check_chart(chart)
        if not isinstance(chart, CartesianChart):
            raise ChartError(f"The flat law needs a Cartesian chart, got '{chart.name}'")

    def modes(self, state, chart, q, reference=None, connection=True) -> ModeSet:
        self.check_chart(chart)
        q = np.asarray(q, dtype=float)
        psi = state.psi(q)
        check_node(state, psi)
        masses = chart.masses
        curvature = np.diagonal(state.hess(q), axis1=-2, axis2=-1)
        return ModeSet(
            radicands=-curvature / (masses * psi),
            directions=np.diag(1.0 / np.sqrt(masses)),
        )

    def radicands(self, state, chart, q):
        self.check_chart(chart)
        q = np.asarray(q, dtype=float)
        psi = state.psi(q)
        node = np.abs(psi) <= NODE_THRESHOLD * state.peak
        curvature = np.diagonal(state.hess(q), axis1=-2, axis2=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            radicands = -curvature / (chart.masses * psi[..., None])
        return np.where(node[..., None], np.nan, radicands), np.zeros(psi.shape, dtype=bool)
