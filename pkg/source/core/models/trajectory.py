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
from typing import Iterable, List, Tuple

import numpy as np


@dataclass(frozen=True)
class SignAssignment:
    values: Tuple[int, ...]  # One entry of +1 or -1 per mode

    def __post_init__(self):
        if any(v not in (1, -1) for v in self.values):
            raise ValueError(f"Signs must be +1 or -1, got {list(self.values)}")

    @classmethod
    def of(cls, signs: Iterable, n: int) -> "SignAssignment":
        values = tuple(int(s) for s in signs)
        if len(values) == 1 and n > 1:
            values = values * n
        if len(values) != n:
            raise ValueError(f"Expected {n} signs, got {len(values)}")
        return cls(values)

    def flipped(self, mode: int) -> "SignAssignment":
        values = list(self.values)
        values[mode] = -values[mode]
        return SignAssignment(tuple(values))

    def negated(self) -> "SignAssignment":
        return SignAssignment(tuple(-v for v in self.values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TurningPoint:
    time: float  # When the mode's radicand reached zero
    mode: int  # Mode index after frame matching
    point: Tuple[float, ...]


@dataclass(frozen=True)
class Trajectory:
    law: str
    times: np.ndarray  # (k,) strictly increasing
    points: np.ndarray  # (k, n)
    velocities: np.ndarray  # (k, n)
    signs: np.ndarray  # (k, n) sign assignment in force at each record
    reason: str = "completed"  # See core.constants.TERMINATION_REASONS
    turning_points: List[TurningPoint] = field(default_factory=list)
    detail: str = ""  # Message of the error that ended the run, if any

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1]) if self.points.ndim == 2 else 0

    @property
    def completed(self) -> bool:
        return self.reason == "completed"


@dataclass(frozen=True)
class InternalPath:
    times: np.ndarray  # (k,)
    points: np.ndarray  # (k, n) configuration x_i(t)
    angles: np.ndarray  # (k, 3) alpha, beta, gamma
    weights: np.ndarray  # (k,) |xi|^2 along the path
    reason: str = "completed"


@dataclass(frozen=True)
class EnsembleState:
    times: np.ndarray  # (k,) shared time grid
    points: np.ndarray  # (members, n) final configuration
    angles: np.ndarray  # (members, 3) final angles
    reasons: np.ndarray  # (members,) termination reason per member
    halted_at: np.ndarray  # (members,) time each member stopped

    @property
    def members(self) -> int:
        return int(self.points.shape[0])

    def counts(self) -> dict:
        labels, totals = np.unique(self.reasons, return_counts=True)
        return {str(k): int(v) for k, v in zip(labels, totals)}
