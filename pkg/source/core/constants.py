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

import math

DEVELOPER = "Killian W (krosseye)"  # Do not change this line

APP_TITLE = "Qtraj"
APP_VERSION = "0.1.0-Alpha.1"
MAINTAINER = DEVELOPER  # Set to the active maintainer

LAW_OPTIONS = ["einstein", "grommer", "flat", "holland"]
CHART_OPTIONS = ["cartesian", "polar"]
DIAGNOSTIC_OPTIONS = [
    "coupling",
    "divergence",
    "coverage",
    "covariance",
    "separation",
    "ensemble",
    "dbb",
]
LOG_LEVEL_OPTIONS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}

# Geometry
SINGULAR_CONDITION = 1e12
METRIC_FD_STEP = 1e-5

# Eigenframe
DEGENERACY_TOLERANCE = 1e-8
BLOCK_TOLERANCE = 1e-10
MATCH_THRESHOLD = 0.5
JACOBI_MAX_SWEEPS = 50

# Dynamics
NODE_THRESHOLD = 1e-12
TURNING_TOLERANCE = 1e-10
TURNING_REFINEMENT = 1.0 / 32.0
MIN_SUBSTEP = 1e-14

# States
MAX_HO_LEVEL = 10
HO_BOX_WIDTHS = 6.0
FD_CHECK_STEP = 1e-5

# Internal-angle model
GAMMA_PERIOD = 4.0 * math.pi
BETA_PERIOD = 2.0 * math.pi
XI_THRESHOLD = 1e-14
POLE_HALT = 1e-3
POLE_SAMPLE_GUARD = 1e-2
ANGULAR_REFINEMENT = 0.05  # radians per sub-step
SPATIAL_REFINEMENT = 0.05  # configuration units per sub-step
ALPHA_POINTS = 32
BETA_POINTS = 32
GAMMA_POINTS = 16
ANGULAR_FD_STEP = 1e-4

# Diagnostics
COUPLING_FD_STEP = 1e-5
UNCOUPLED_BELOW = 1e-6
COUPLED_ABOVE = 1e-3
COVERAGE_SUBSAMPLES = 4
HISTOGRAM_QUANTILES = (1e-3, 1.0 - 1e-3)
MIN_ENSEMBLE_SIZE = 1000

DEFAULT_SCENARIO = {
    "name": "scenario",
    "state": "ho:k=0,omega=1",
    "hbar": 1.0,
    "chart": "cartesian",
    "law": "flat",
    "initial": {},
    "integrator": {"dt": 1e-3, "t_max": 1.0},
    "ensemble": None,
    "diagnostics": [],
    "diagnostic_options": {},
    "output": "output",
    "seed": 0,
}

TERMINATION_REASONS = [
    "completed",
    "left_admissible_domain",
    "degenerate_spectrum",
    "ambiguous_match",
    "node_of_psi",
    "pole_encounter",
    "xi_node",
]
MAX_SUBSTEPS = 100000
