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

import dataclasses
import logging
import os
from typing import Any, Dict, List

import numpy as np
from core.models import InternalPath, Trajectory
from utilities.helpers import to_jsonable, write_json

logger = logging.getLogger("OutputWriter")

CSV_FORMAT = "%.12e"


def report_dict(report) -> Dict[str, Any]:
    """Plain JSON types for a report dataclass."""
    return to_jsonable(dataclasses.asdict(report))


class OutputWriter:
    """Single owner of the files written into one output directory."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir

    def _path(self, file_name: str) -> str:
        return os.path.join(self.out_dir, file_name)

    def _write_csv(self, file_name: str, header: List[str], rows: np.ndarray) -> str:
        file_path = self._path(file_name)
        try:
            os.makedirs(self.out_dir, exist_ok=True)
            rows = np.asarray(rows, dtype=float).reshape(-1, len(header))
            np.savetxt(
                file_path, rows, fmt=CSV_FORMAT, delimiter=",", header=",".join(header), comments=""
            )
        except OSError:
            logger.exception(f"Could not write {file_path}")
            raise
        logger.debug(f"Wrote {rows.shape[0]} rows to {file_path}")
        return file_path

    def write_report(self, file_name: str, data: Dict[str, Any]) -> str:
        file_path = self._path(file_name)
        try:
            write_json(file_path, data)
        except OSError:
            logger.exception(f"Could not write {file_path}")
            raise
        return file_path

    def write_trajectory(self, name: str, trajectory: Trajectory, scenario: Dict[str, Any]) -> List[str]:
        """`<name>.csv` with t,q1..,v1..,s1.. and a `<name>.json` sidecar."""
        n = trajectory.dimension
        modes = trajectory.signs.shape[1] if trajectory.signs.ndim == 2 else n
        header = (
            ["t"]
            + [f"q{i + 1}" for i in range(n)]
            + [f"v{i + 1}" for i in range(n)]
            + [f"s{a + 1}" for a in range(modes)]
        )
        rows = np.column_stack(
            [trajectory.times, trajectory.points, trajectory.velocities, trajectory.signs]
        )
        sidecar = {
            "scenario": scenario,
            "law": trajectory.law,
            "reason": trajectory.reason,
            "detail": trajectory.detail,
            "records": int(trajectory.times.size),
            "turning_points": [
                {"time": tp.time, "mode": tp.mode + 1, "point": list(tp.point)}
                for tp in trajectory.turning_points
            ],
        }
        return [
            self._write_csv(f"{name}.csv", header, rows),
            self.write_report(f"{name}.json", sidecar),
        ]

    def write_path(self, name: str, path: InternalPath, scenario: Dict[str, Any]) -> List[str]:
        """`<name>.csv` with t,x1..,alpha,beta,gamma and a `<name>.json` sidecar."""
        n = path.points.shape[1] if path.points.ndim == 2 else 0
        header = ["t"] + [f"x{i + 1}" for i in range(n)] + ["alpha", "beta", "gamma"]
        rows = np.column_stack([path.times, path.points, path.angles])
        sidecar = {
            "scenario": scenario,
            "law": "holland",
            "reason": path.reason,
            "records": int(path.times.size),
            "weights": path.weights,
        }
        return [
            self._write_csv(f"{name}.csv", header, rows),
            self.write_report(f"{name}.json", sidecar),
        ]
