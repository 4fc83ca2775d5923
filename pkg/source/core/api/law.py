#############################################################################
##
## Copyright (C) 2025 Killian-W.
## All rights reserved.
##
## This file is part of the Qtraj project.
##
## Licensed under the Mozilla Public License, Version 2.0 (the "License");
## you may not use this file except in compliance with the License.
## You may obtain a copy of the License at:
##     https://www.mozilla.org/en-US/MPL/2.0/
##
## This software is provided "as is," without warranties or conditions
## of any kind, either express or implied. See the License for details.
##
#############################################################################

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from core.constants import NODE_THRESHOLD
from core.exceptions import ChartError, NodeOfPsi
from core.models import Inadmissible, PrincipalFrame, SignAssignment
from core.physics.geometry import Chart


@dataclass(frozen=True)
class ModeSet:
    radicands: np.ndarray  # (modes,) speed-squared factor of each mode
    directions: np.ndarray  # (n, modes) unit (metric-normalized) direction columns
    frame: Optional[PrincipalFrame] = None  # Matched frame, for laws built on one


class TrajectoryLaw:
    """
    Base class for deterministic trajectory laws of the form

        qdot^mu = sum_a s_a hbar sqrt(R_a) D_(a)^mu

    Subclasses decide what the modes are (principal directions of some
    tensor, or plain coordinate axes) and what the radicands R_a are. The
    base class turns a `ModeSet` into a velocity and an admissibility
    verdict, so laws never have to deal with sign bookkeeping.
    """

    def get_law_name(self) -> str:
        """
        [REQUIRED]

        Return the identifier used in scenario files.
        """
        raise NotImplementedError

    def modes(
        self,
        state,
        chart: Chart,
        q: np.ndarray,
        reference: Optional[PrincipalFrame] = None,
        connection: bool = True,
    ) -> ModeSet:
        """
        [REQUIRED]

        Return the radicands and mode directions at a single point `q`
        given in `chart` coordinates. When `reference` is given the frame
        must be matched to it so mode indices stay attached to the same
        branch. Raises the law's errors (NodeOfPsi, DegenerateSpectrum, ...).
        """
        raise NotImplementedError

    def radicands(self, state, chart: Chart, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        [REQUIRED]

        Stacked evaluation for grid sweeps. Return `(radicands, degenerate)`
        with shapes (..., modes) and (...). Points where the law is undefined
        (nodes of psi) carry NaN radicands. Must never raise on
        inadmissible points.
        """
        raise NotImplementedError

    def uses_frame(self) -> bool:
        """
        [OPTIONAL]

        Return `True` if the modes come from an eigenframe that must be
        matched step to step.
        """
        return True

    def mode_count(self, state) -> int:
        """
        [OPTIONAL]

        Number of modes, one per configuration coordinate by default.
        """
        return state.n

    def check_chart(self, chart: Chart) -> None:
        """
        [OPTIONAL]

        Raise ChartError if the law cannot be evaluated in `chart`.
        """
        if chart.dimension < 1:
            raise ChartError("Trajectory laws need at least one coordinate")

    def velocity(
        self,
        state,
        chart: Chart,
        q: np.ndarray,
        signs,
        reference: Optional[PrincipalFrame] = None,
        connection: bool = True,
    ) -> Union[np.ndarray, Inadmissible]:
        mode_set = self.modes(state, chart, q, reference, connection)
        negative = np.flatnonzero(mode_set.radicands < 0.0)
        if negative.size:
            return Inadmissible(modes=tuple(int(a) for a in negative), radicands=mode_set.radicands)
        return compose_velocity(mode_set, signs, state.hbar)


def compose_velocity(mode_set: ModeSet, signs, hbar: float, moving=None) -> np.ndarray:
    """hbar sum_a s_a sqrt(max(R_a, 0)) D_a, restricted to `moving` modes if given."""
    if isinstance(signs, SignAssignment):
        signs = signs.as_array()
    speeds = np.sqrt(np.clip(mode_set.radicands, 0.0, None))
    if moving is not None:
        speeds = np.where(moving, speeds, 0.0)
    return hbar * mode_set.directions @ (np.asarray(signs, dtype=float) * speeds)


def check_node(state, psi, error=NodeOfPsi) -> None:
    if not np.all(np.abs(psi) > NODE_THRESHOLD * state.peak):
        raise error(f"psi = {float(np.min(np.abs(psi))):.3e} is at a node of {state.label}")
