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

import copy
import json
import logging
import math
import numbers
from typing import Any, Dict, Optional

from core.constants import (
    CHART_OPTIONS,
    DEFAULT_SCENARIO,
    DIAGNOSTIC_OPTIONS,
    LAW_OPTIONS,
    MIN_ENSEMBLE_SIZE,
)
from core.exceptions import ScenarioError, StateSpecError
from core.physics.catalog import parse_state_spec
from core.physics.geometry import CartesianChart, Chart, PolarChart
from core.physics.states import RealStationaryState, TwoVectorState
from utilities.helpers import load_json, write_json

logger = logging.getLogger("ScenarioConfig")

INITIAL_KEYS = {"q0", "signs", "x0", "angles", "t0"}
INTEGRATOR_KEYS = {"dt", "t_max"}
ENSEMBLE_KEYS = {"count", "bins", "dt", "t0", "coordinate", "refinement"}
DIAGNOSTIC_OPTION_KEYS = {"points", "angles", "separations", "grid", "probes", "signs", "step"}
GRID_KEYS = {"bounds", "resolution", "subsamples"}


class ScenarioConfig:
    """
    One scenario file: defaults from DEFAULT_SCENARIO overridden by the
    file's keys. Unknown keys are rejected and every value is validated
    before anything runs.
    """

    def __init__(self, overrides: Optional[Dict[str, Any]] = None):
        self.default_config = DEFAULT_SCENARIO
        self.config_path = None
        self.scenario_config: Dict[str, Any] = dict(overrides or {})
        self._state = None

    def has_config(self):
        return self.config_path is not None

    def set_config_file(self, config_file_path):
        self.config_path = config_file_path
        self.scenario_config = self._load_scenario_config()
        self._state = None

    def _load_scenario_config(self) -> Dict[str, Any]:
        try:
            return load_json(self.config_path)
        except FileNotFoundError as e:
            raise ScenarioError("file", f"Scenario file '{self.config_path}' does not exist") from e
        except json.JSONDecodeError as e:
            raise ScenarioError("file", f"Scenario file is not valid JSON: {e}") from e
        except ValueError as e:
            raise ScenarioError("file", str(e)) from e

    def get(self, key: str) -> Any:
        """Get a scenario value, falling back to the default"""
        return self.scenario_config.get(key, self.default_config.get(key))

    def set(self, key: str, value: Any):
        self.scenario_config[key] = value
        if key in ("state", "hbar"):
            self._state = None

    def save(self, file_path: str):
        """Write the effective scenario (defaults applied)"""
        write_json(file_path, self.copy())

    def __getitem__(self, key: str) -> Any:
        return self.get(key)

    def __setitem__(self, key: str, value: Any):
        self.set(key, value)

    def copy(self) -> Dict[str, Any]:
        """Return the effective scenario combining defaults with overrides"""
        combined = copy.deepcopy(self.default_config)
        for key, value in copy.deepcopy(self.scenario_config).items():
            default = combined.get(key)
            if isinstance(default, dict) and isinstance(value, dict):
                value = {**default, **value}
            combined[key] = value
        return combined

    # Derived objects

    def state(self):
        if self._state is None:
            try:
                self._state = parse_state_spec(str(self["state"]), float(self["hbar"]))
            except StateSpecError as e:
                raise ScenarioError("state", str(e)) from e
        return self._state

    def chart(self) -> Chart:
        state = self.state()
        if self["chart"] == "polar":
            return PolarChart(state.masses[0])
        return CartesianChart(state.masses)

    def integrator(self) -> Dict[str, Any]:
        return self.copy()["integrator"]

    def initial(self) -> Dict[str, Any]:
        return dict(self["initial"] or {})

    def ensemble(self) -> Optional[Dict[str, Any]]:
        block = self["ensemble"]
        return dict(block) if block is not None else None

    def diagnostic_options(self) -> Dict[str, Any]:
        return dict(self["diagnostic_options"] or {})

    # Validation

    def validate(self) -> Dict[str, Any]:
        """Check every field; return the effective scenario or raise ScenarioError."""
        unknown = sorted(set(self.scenario_config) - set(self.default_config))
        if unknown:
            raise ScenarioError(unknown[0], "unknown key")

        self._validate_choice(self["law"], LAW_OPTIONS, "law")
        self._validate_choice(self["chart"], CHART_OPTIONS, "chart")
        self._positive(self["hbar"], "hbar")
        if not isinstance(self["name"], str) or not self["name"]:
            raise ScenarioError("name", "must be a non-empty string")
        if not isinstance(self["output"], str) or not self["output"]:
            raise ScenarioError("output", "must be a non-empty string")
        if not isinstance(self["seed"], int) or isinstance(self["seed"], bool) or self["seed"] < 0:
            raise ScenarioError("seed", f"must be a non-negative integer, got {self['seed']!r}")

        state = self.state()
        self._validate_state_kind(state)
        self._validate_chart(state)
        self._validate_integrator()
        self._validate_initial(state)
        self._validate_ensemble(state)
        self._validate_diagnostics(state)
        logger.debug(f"Scenario '{self['name']}' is valid")
        return self.copy()

    def _validate_choice(self, value, allowed, field: str):
        if value not in allowed:
            raise ScenarioError(field, f"must be one of {allowed}, got {value!r}")
        return value

    @staticmethod
    def _positive(value, field: str):
        if not isinstance(value, numbers.Real) or isinstance(value, bool) or not value > 0:
            raise ScenarioError(field, f"must be a positive number, got {value!r}")
        return float(value)

    @staticmethod
    def _keys(block, allowed, field: str) -> Dict[str, Any]:
        if not isinstance(block, dict):
            raise ScenarioError(field, "must be an object")
        unknown = sorted(set(block) - allowed)
        if unknown:
            raise ScenarioError(f"{field}.{unknown[0]}", "unknown key")
        return block

    @staticmethod
    def _vector(value, length: int, field: str):
        if (
            not isinstance(value, list)
            or len(value) != length
            or not all(isinstance(v, numbers.Real) and not isinstance(v, bool) for v in value)
        ):
            raise ScenarioError(field, f"must be a list of {length} numbers, got {value!r}")
        return [float(v) for v in value]

    def _validate_state_kind(self, state):
        if self["law"] == "holland":
            if not isinstance(state, TwoVectorState):
                raise ScenarioError("state", "the holland law needs a two-vector state (rot, sup, compose)")
        elif not isinstance(state, RealStationaryState):
            raise ScenarioError("state", f"the {self['law']} law needs a real stationary state")

    def _validate_chart(self, state):
        if self["chart"] != "polar":
            return
        if self["law"] in ("flat", "holland"):
            raise ScenarioError("chart", f"the {self['law']} law runs in Cartesian coordinates only")
        if state.n != 2 or state.masses[0] != state.masses[1]:
            raise ScenarioError("chart", "polar coordinates need two coordinates with equal masses")

    def _validate_integrator(self):
        block = self._keys(self["integrator"], INTEGRATOR_KEYS, "integrator")
        self._positive(block.get("dt", 1e-3), "integrator.dt")
        t_max = block.get("t_max", 1.0)
        if not isinstance(t_max, numbers.Real) or isinstance(t_max, bool) or t_max < 0:
            raise ScenarioError("integrator.t_max", f"must be a non-negative number, got {t_max!r}")

    def _validate_initial(self, state):
        block = self._keys(self["initial"] or {}, INITIAL_KEYS, "initial")
        if self["law"] == "holland":
            for key in ("q0", "signs"):
                if key in block:
                    raise ScenarioError(f"initial.{key}", "not used by the holland law")
            if "x0" in block:
                self._vector(block["x0"], state.n, "initial.x0")
            if "angles" in block:
                alpha, _, _ = self._vector(block["angles"], 3, "initial.angles")
                if not 0.0 < alpha < math.pi:
                    raise ScenarioError("initial.angles", "alpha must lie strictly between 0 and pi")
            if "t0" in block and not isinstance(block["t0"], numbers.Real):
                raise ScenarioError("initial.t0", "must be a number")
            return
        for key in ("x0", "angles", "t0"):
            if key in block:
                raise ScenarioError(f"initial.{key}", f"not used by the {self['law']} law")
        if "q0" in block:
            self._vector(block["q0"], state.n, "initial.q0")
        if "signs" in block:
            signs = self._vector(block["signs"], state.n, "initial.signs")
            if any(s not in (1.0, -1.0) for s in signs):
                raise ScenarioError("initial.signs", "entries must be +1 or -1")

    def _validate_ensemble(self, state):
        block = self["ensemble"]
        if block is None:
            return
        self._keys(block, ENSEMBLE_KEYS, "ensemble")
        count = block.get("count", MIN_ENSEMBLE_SIZE)
        if not isinstance(count, int) or count < MIN_ENSEMBLE_SIZE:
            raise ScenarioError("ensemble.count", f"must be an integer of at least {MIN_ENSEMBLE_SIZE}")
        bins = block.get("bins", 20)
        if not isinstance(bins, int) or bins < 1:
            raise ScenarioError("ensemble.bins", "must be a positive integer")
        if "dt" in block:
            self._positive(block["dt"], "ensemble.dt")
        if "refinement" in block:
            self._positive(block["refinement"], "ensemble.refinement")
        coordinate = block.get("coordinate", 0)
        if not isinstance(coordinate, int) or not 0 <= coordinate < state.n:
            raise ScenarioError("ensemble.coordinate", f"must index one of the {state.n} coordinates")
        if self["chart"] != "cartesian":
            raise ScenarioError("chart", "ensembles run in Cartesian coordinates")

    def _validate_diagnostics(self, state):
        diagnostics = self["diagnostics"]
        if not isinstance(diagnostics, list):
            raise ScenarioError("diagnostics", "must be a list")
        for name in diagnostics:
            self._validate_choice(name, DIAGNOSTIC_OPTIONS, "diagnostics")
        options = self._keys(
            self["diagnostic_options"] or {}, DIAGNOSTIC_OPTION_KEYS, "diagnostic_options"
        )
        for i, point in enumerate(options.get("points", [])):
            self._vector(point, state.n, f"diagnostic_options.points[{i}]")
        if "angles" in options:
            self._vector(options["angles"], 3, "diagnostic_options.angles")
        if "grid" in options:
            grid = self._keys(options["grid"], GRID_KEYS, "diagnostic_options.grid")
            bounds = grid.get("bounds", [list(b) for b in state.box])
            if not isinstance(bounds, list) or len(bounds) != state.n:
                raise ScenarioError("diagnostic_options.grid.bounds", f"needs {state.n} intervals")
            for i, interval in enumerate(bounds):
                lo, hi = self._vector(interval, 2, f"diagnostic_options.grid.bounds[{i}]")
                if not lo < hi:
                    raise ScenarioError(f"diagnostic_options.grid.bounds[{i}]", "must be increasing")
            for key in ("resolution", "subsamples"):
                if key in grid and (not isinstance(grid[key], int) or grid[key] < 1):
                    raise ScenarioError(f"diagnostic_options.grid.{key}", "must be a positive integer")
        if "covariance" in diagnostics and state.n != 2:
            raise ScenarioError("diagnostics", "covariance compares Cartesian and polar charts in 2D")
        if "dbb" in diagnostics and self["law"] != "holland":
            raise ScenarioError("diagnostics", "dbb compares against the holland law")
        if "ensemble" in diagnostics and self.ensemble() is None:
            raise ScenarioError("ensemble", "the ensemble diagnostic needs an ensemble block")
