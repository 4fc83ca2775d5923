from .frame import PrincipalFrame
from .reports import (
    AdmissibilityReport,
    AngularPoint,
    ChiSquareSummary,
    CouplingReport,
    FlowReport,
    GridSpec,
    Inadmissible,
)
from .trajectory import (
    EnsembleState,
    InternalPath,
    SignAssignment,
    Trajectory,
    TurningPoint,
)

__all__ = [
    "AdmissibilityReport",
    "AngularPoint",
    "ChiSquareSummary",
    "CouplingReport",
    "EnsembleState",
    "FlowReport",
    "GridSpec",
    "Inadmissible",
    "InternalPath",
    "PrincipalFrame",
    "SignAssignment",
    "Trajectory",
    "TurningPoint",
]
