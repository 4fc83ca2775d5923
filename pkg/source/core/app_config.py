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

import logging
import os
import threading
from typing import Dict

import core.constants as constants  # type: ignore
import psutil
from utilities.helpers import load_json


class AppConfig:
    _instance = None
    _lock = threading.Lock()

    def __new__(cls):
        with cls._lock:
            if cls._instance is None:
                cls._instance = super().__new__(cls)
                cls._instance._initialize()
        return cls._instance

    def _initialize(self) -> None:
        config_path = os.path.join(
            os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
            "app_config.json",
        )
        try:
            self._config_file: Dict = load_json(config_path)
        except FileNotFoundError:
            self._config_file = {}

        self.APP_TITLE = str(constants.APP_TITLE)
        self.APP_VERSION = str(constants.APP_VERSION)
        self.DEVELOPER = str(constants.DEVELOPER)

        self.LOG_FILE_NAME = str(self._config_file.get("LOG_FILE_NAME", "qtraj.log"))

        _log_level_str = self._validate_choice(
            str(self._config_file.get("LOG_LEVEL", "WARNING")).upper(),
            constants.LOG_LEVEL_OPTIONS,
            "LOG_LEVEL",
        )
        self.LOG_LEVEL = getattr(logging, _log_level_str, logging.WARNING)

        self.WORKERS = self._resolve_workers(self._config_file.get("WORKERS", "auto"))

    def _resolve_workers(self, value) -> int:
        if isinstance(value, str):
            self._validate_choice(value.lower(), {"auto"}, "WORKERS")
            return max(1, psutil.cpu_count(logical=False) or 1)
        if not isinstance(value, int) or value < 1:
            raise ValueError(f"WORKERS must be 'auto' or a positive integer, got '{value}'")
        return value

    def _validate_choice(self, value: str, allowed: set, field: str) -> str:
        if value not in allowed:
            raise ValueError(f"{field} must be one of {allowed}, got '{value}'")
        return value


app_config = AppConfig()
