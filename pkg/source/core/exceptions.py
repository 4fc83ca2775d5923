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


class QtrajError(Exception):
    """Base class for every error raised by the trajectory library."""


class ChartError(QtrajError, ValueError):
    pass


class SingularMetric(ChartError):
    pass


class SpectrumError(QtrajError, ArithmeticError):
    pass


class DegenerateSpectrum(SpectrumError):
    pass


class AmbiguousMatch(SpectrumError):
    pass


class StateError(QtrajError, ValueError):
    pass


class UnsupportedLevel(StateError):
    pass


class StateSpecError(StateError):
    pass


class NodeOfPsi(StateError):
    pass


class NonPositivePsi(StateError):
    pass


class NodeOfRho(StateError):
    pass


class XiNode(StateError):
    pass


class BoundaryTooClose(QtrajError, ValueError):
    pass


class ScenarioError(QtrajError, ValueError):
    """Raised when a scenario file fails validation."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
