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

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List

import numpy as np
from core.config import ScenarioConfig
from core.constants import COUPLING_FD_STEP, COVERAGE_SUBSAMPLES, MIN_ENSEMBLE_SIZE
from core.exceptions import QtrajError
from core.models import GridSpec
from core.physics import diagnostics
from core.physics.dynamics import integrate
from core.physics.geometry import CartesianChart, PolarChart
from core.physics.holland import angular_average_velocity, evolve, relative_autonomy

from .output_writer import OutputWriter, report_dict

logger = logging.getLogger("ScenarioRunner")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_TERMINATED = 3

DEFAULT_ANGLES = [0.5 * math.pi, 0.5 * math.pi, 0.0]
DEFAULT_SEPARATIONS = [0.0, 0.25, 0.5]


class ScenarioRunner:
    def __init__(self, config: ScenarioConfig, workers: int = 1):
        self.config = config
        self.workers = max(1, int(workers))
        self._writer = None

    @property
    def writer(self) -> OutputWriter:
        if self._writer is None:
            self._writer = OutputWriter(self.config["output"])
        return self._writer

    @property
    def name(self) -> str:
        return self.config["name"]

    def validate(self) -> Dict[str, Any]:
        """Dry run: validate and echo the effective scenario."""
        scenario = self.config.validate()
        return {"valid": True, "scenario": scenario}

    def run(self) -> int:
        self.config.validate()
        if self.config.ensemble() is not None:
            return self.run_ensemble()
        return self.run_trajectory()

    # Trajectories

    def _start(self) -> Dict[str, Any]:
        state = self.config.state()
        initial = self.config.initial()
        if self.config["law"] == "holland":
            return {
                "x0": initial.get("x0", [0.0] * state.n),
                "angles": initial.get("angles", DEFAULT_ANGLES),
                "t0": float(initial.get("t0", 0.0)),
            }
        return {
            "q0": initial.get("q0", [0.0] * state.n),
            "signs": initial.get("signs", [1] * state.n),
        }

    def run_trajectory(self) -> int:
        scenario = self.config.validate()
        state = self.config.state()
        integrator = self.config.integrator()
        start = self._start()
        logger.info(f"Running trajectory '{self.name}' ({self.config['law']}, {state.label})")

        if self.config["law"] == "holland":
            result = evolve(
                state, start["x0"], start["angles"], integrator["dt"], integrator["t_max"], start["t0"]
            )
            self.writer.write_path(self.name, result, scenario)
        else:
            result = integrate(
                self.config["law"],
                state,
                self.config.chart(),
                start["q0"],
                start["signs"],
                integrator["dt"],
                integrator["t_max"],
            )
            self.writer.write_trajectory(self.name, result, scenario)

        logger.info(f"Trajectory '{self.name}' finished: {result.reason}")
        return EXIT_OK if result.reason == "completed" else EXIT_TERMINATED

    # Ensembles

    def _compare(self):
        state = self.config.state()
        block = self.config.ensemble()
        integrator = self.config.integrator()
        spec, hbar = self.config["state"], self.config["hbar"]
        coordinate = int(block.get("coordinate", 0))
        count = int(block.get("count", MIN_ENSEMBLE_SIZE))
        bins = int(block.get("bins", 20))
        t_max = integrator["t_max"]

        def compare(source: Callable, target: Callable, notes: str):
            return diagnostics.ensemble_compare(
                source, target, state.box[coordinate], bins, count, self.config["seed"], notes
            )

        if self.config["law"] == "holland":
            t0 = float(block.get("t0", 0.0))
            source = diagnostics.holland_source(
                spec, hbar, t0, t_max, float(block.get("dt", 5e-3)), coordinate
            )
            target = diagnostics.marginal_density(state, t_max, coordinate)
            return compare(source, target, f"holland ensemble evolved from t = {t0:g} to {t_max:g}")

        target = diagnostics.marginal_density(state, 0.0, coordinate)
        notes = f"{self.config['law']} ensemble evolved to t = {t_max:g}"
        options = dict(
            t_max=t_max,
            dt=float(block.get("dt", 1e-2)),
            coordinate=coordinate,
            refinement=float(block.get("refinement", 0.25)),
        )
        if self.workers == 1:
            source = diagnostics.law_source(self.config["law"], spec, hbar, **options)
            return compare(source, target, notes)
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            chunk = max(1, count // (4 * self.workers))

            def mapper(fn, jobs):
                return pool.map(fn, jobs, chunksize=chunk)

            source = diagnostics.law_source(self.config["law"], spec, hbar, mapper=mapper, **options)
            return compare(source, target, notes)

    def run_ensemble(self) -> int:
        scenario = self.config.validate()
        logger.info(f"Running ensemble '{self.name}' with {self.workers} worker(s)")
        summary = self._compare()
        self.writer.write_report(
            f"{self.name}-ensemble.json",
            {
                "scenario": scenario,
                "law": self.config["law"],
                "state": self.config["state"],
                "statistics": report_dict(summary),
                "consistent": summary.consistent(),
            },
        )
        logger.info(f"Ensemble '{self.name}' finished: z = {summary.z_score:.2f}")
        return EXIT_OK

    # Diagnostics

    def _points(self) -> List[List[float]]:
        options = self.config.diagnostic_options()
        if options.get("points"):
            return options["points"]
        start = self._start()
        return [start["x0"] if "x0" in start else start["q0"]]

    def _signs(self):
        options = self.config.diagnostic_options()
        return options.get("signs", self.config.initial().get("signs"))

    def run_diagnose(self) -> int:
        scenario = self.config.validate()
        report: Dict[str, Any] = {
            "scenario": scenario,
            "law": self.config["law"],
            "state": self.config["state"],
            "grid": None,
            "verdicts": {},
            "fractions": {},
            "statistics": {},
            "details": {},
        }
        for name in scenario["diagnostics"]:
            logger.info(f"Diagnostic '{name}' for '{self.name}'")
            handler = getattr(self, f"_diagnose_{name}")
            try:
                handler(report)
            except QtrajError as e:
                logger.warning(f"Diagnostic '{name}' failed: {e}")
                report["details"][name] = {"error": str(e)}
        self.writer.write_report(f"{self.name}-report.json", report)
        failed = _recorded_errors(report["details"])
        if failed:
            logger.warning(f"'{self.name}' recorded {failed} diagnostic error(s)")
            return EXIT_TERMINATED
        return EXIT_OK

    def _diagnose_coupling(self, report):
        state = self.config.state()
        options = self.config.diagnostic_options()
        details = []
        if self.config["law"] == "holland":
            angles = options.get("angles", DEFAULT_ANGLES)
            t0 = self._start()["t0"]
            for point in self._points():
                details.append(
                    {
                        "point": point,
                        "angles": angles,
                        "norms": relative_autonomy(state, point, angles, t0),
                        "averaged_norms": relative_autonomy(state, point, angles, t0, averaged=True),
                    }
                )
            report["details"]["coupling"] = details
            return
        step = float(options.get("step", COUPLING_FD_STEP))
        for i, point in enumerate(self._points()):
            try:
                coupling = diagnostics.coupling_matrix(
                    self.config["law"], state, self.config.chart(), point, self._signs(), step
                )
            except QtrajError as e:
                details.append({"point": point, "error": str(e)})
                continue
            report["verdicts"][f"coupling@{i}"] = coupling.verdict
            details.append(report_dict(coupling))
        report["details"]["coupling"] = details

    def _diagnose_divergence(self, report):
        state = self.config.state()
        details = []
        for point in self._points():
            try:
                value = diagnostics.divergence(
                    self.config["law"], state, self.config.chart(), point, self._signs()
                )
            except QtrajError as e:
                details.append({"point": point, "error": str(e)})
                continue
            details.append({"point": point, "divergence": value})
        report["details"]["divergence"] = details

    def _diagnose_coverage(self, report):
        state = self.config.state()
        options = self.config.diagnostic_options()
        grid_options = options.get("grid", {})
        grid = GridSpec(
            bounds=tuple(tuple(b) for b in grid_options.get("bounds", state.box)),
            resolution=int(grid_options.get("resolution", 200)),
            subsamples=int(grid_options.get("subsamples", COVERAGE_SUBSAMPLES)),
        )
        flow = diagnostics.domain_coverage(
            self.config["law"],
            state,
            self.config.chart(),
            grid,
            int(options.get("probes", 0)),
            self._signs(),
        )
        report["grid"] = report_dict(grid)
        report["fractions"]["admissible"] = flow.admissible_fraction
        report["fractions"]["weight"] = flow.weight_fraction
        report["details"]["coverage"] = {"divergences": flow.divergences}

    def _diagnose_covariance(self, report):
        state = self.config.state()
        cartesian = CartesianChart(state.masses)
        polar = PolarChart(state.masses[0])
        details = []
        worst = 0.0
        for point in self._points():
            entry: Dict[str, Any] = {"point": point}
            try:
                entry["discrepancy"] = diagnostics.covariance_check(
                    self.config["law"], state, cartesian, polar, point, self._signs()
                )
                entry["without_connection"] = diagnostics.covariance_check(
                    self.config["law"], state, cartesian, polar, point, self._signs(), connection=False
                )
                entry.update(diagnostics.chart_agreement(state, cartesian, polar, point))
                worst = max(worst, entry["discrepancy"])
            except QtrajError as e:
                entry["error"] = str(e)
            details.append(entry)
        report["verdicts"]["covariance"] = "consistent" if worst < 1e-6 else "inconsistent"
        report["details"]["covariance"] = details

    def _diagnose_separation(self, report):
        options = self.config.diagnostic_options()
        report["details"]["separation"] = diagnostics.separation_scan(
            self.config["law"],
            self.config.state(),
            self.config.chart(),
            self._points()[0],
            options.get("separations", DEFAULT_SEPARATIONS),
            self._signs(),
        )

    def _diagnose_ensemble(self, report):
        summary = self._compare()
        report["statistics"] = report_dict(summary)
        report["verdicts"]["ensemble"] = "consistent" if summary.consistent() else "rejected"

    def _diagnose_dbb(self, report):
        state = self.config.state()
        t0 = self._start()["t0"]
        details = []
        for point in self._points():
            baseline = diagnostics.dbb_baseline(state, point, t0)
            averaged = angular_average_velocity(state, point, t0)
            details.append(
                {
                    "point": point,
                    "dbb": baseline,
                    "angular_average": averaged,
                    "difference": float(np.max(np.abs(baseline - averaged))),
                }
            )
        report["details"]["dbb"] = details


def _recorded_errors(details) -> int:
    if isinstance(details, dict):
        return int("error" in details) + sum(_recorded_errors(v) for v in details.values())
    if isinstance(details, list):
        return sum(_recorded_errors(v) for v in details)
    return 0
