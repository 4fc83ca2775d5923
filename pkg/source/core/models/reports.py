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

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class AngularPoint:
    alpha: float  # [0, pi]
    beta: float  # [0, 2 pi)
    gamma: float  # [0, 4 pi)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma], dtype=float)


@dataclass(frozen=True)
class Inadmissible:
    modes: Tuple[int, ...]  # Modes whose radicand is negative
    radicands: np.ndarray  # All radicands at the point

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class AdmissibilityReport:
    law: str
    radicands: np.ndarray  # (..., modes), NaN at nodes of psi
    modes: np.ndarray  # (..., modes) per-mode pass/fail
    admissible: np.ndarray  # (...) all modes pass and psi is usable
    degenerate: np.ndarray  # (...) spectrum degenerate, directions undefined


@dataclass(frozen=True)
class CouplingReport:
    law: str
    blocks: Tuple[Tuple[int, ...], ...]  # Coordinate indices per particle
    norms: np.ndarray  # (particles, particles) Frobenius norms of the Jacobian blocks
    verdicts: Dict[str, str]  # "i-j" -> coupled | uncoupled | indeterminate
    point: Tuple[float, ...] = ()
    step: float = 0.0

    @property
    def verdict(self) -> str:
        values = set(self.verdicts.values())
        if "coupled" in values:
            return "coupled"
        if values <= {"uncoupled"}:
            return "uncoupled"
        return "indeterminate"


@dataclass(frozen=True)
class GridSpec:
    bounds: Tuple[Tuple[float, float], ...]  # One interval per coordinate
    resolution: int = 200  # Cells per axis
    subsamples: int = 4  # Points per cell per axis

    def axes(self) -> List[np.ndarray]:
        points = self.resolution * self.subsamples
        axes = []
        for lo, hi in self.bounds:
            spacing = (hi - lo) / points
            axes.append(lo + spacing * (np.arange(points) + 0.5))
        return axes


@dataclass(frozen=True)
class FlowReport:
    law: str
    grid: GridSpec
    admissible_fraction: float  # Share of the box area
    weight_fraction: float  # Share of the probability inside the admissible set
    divergences: List[Dict] = field(default_factory=list)  # Probed div(|psi|^2 qdot)


@dataclass(frozen=True)
class ChiSquareSummary:
    edges: np.ndarray
    counts: np.ndarray
    expected: np.ndarray
    statistic: float
    dof: int
    z_score: float
    p_value: float
    samples: int  # Samples that fell inside the binned range
    excluded: int = 0  # Samples outside the binned range
    lost: int = 0  # Ensemble members that never reached the target time
    notes: Optional[str] = None

    def consistent(self, sigmas: float = 3.0) -> bool:
        return self.z_score < sigmas
