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

from core.api.law import TrajectoryLaw

from .einstein import EinsteinLaw
from .flat import FlatLaw
from .grommer import GrommerLaw

LAWS = {
    "einstein": EinsteinLaw,
    "grommer": GrommerLaw,
    "flat": FlatLaw,
}


def get_law(law) -> TrajectoryLaw:
    """Resolve a law instance from its scenario identifier (or pass one through)."""
    if isinstance(law, TrajectoryLaw):
        return law
    try:
        return LAWS[str(law).lower()]()
    except KeyError as e:
        raise ValueError(f"Unknown trajectory law '{law}', expected one of {sorted(LAWS)}") from e


__all__ = ["EinsteinLaw", "FlatLaw", "GrommerLaw", "LAWS", "get_law"]
