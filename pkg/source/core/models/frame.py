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

import numpy as np


@dataclass(frozen=True)
class PrincipalFrame:
    eigenvalues: np.ndarray  # (n,) lambda_(a), ascending unless re-matched
    vectors: np.ndarray  # (n, n), column a holds A_(a)^mu
    point: np.ndarray  # (n,) where the frame was computed
    metric: np.ndarray = field(repr=False, default=None)  # g_{mu nu} at the point

    @property
    def dimension(self) -> int:
        return int(self.eigenvalues.shape[0])

    def overlaps(self, other: "PrincipalFrame") -> np.ndarray:
        """O[a, b] = g(A_(a) of self, A_(b) of other), using other's metric."""
        metric = other.metric if other.metric is not None else np.eye(self.dimension)
        return self.vectors.T @ metric @ other.vectors
