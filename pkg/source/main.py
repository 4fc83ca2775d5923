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

import argparse
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

import core.constants as constants  # type: ignore
from core.app_config import app_config
from core.config import ScenarioConfig
from core.exceptions import ScenarioError
from core.services import EXIT_INVALID, EXIT_OK, ScenarioRunner
from utilities.helpers import SystemInfo, dump_json

logger = logging.getLogger("Main")


def configure_logging(config, out_dir: Optional[str] = None, quiet: bool = False):
    stream = logging.StreamHandler(sys.stderr)
    if quiet:
        stream.setLevel(logging.ERROR)
    handlers: List[logging.Handler] = [stream]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        handlers.insert(
            0,
            RotatingFileHandler(
                str(Path(os.path.join(out_dir, config.LOG_FILE_NAME)).resolve()),
                maxBytes=5 * 1024 * 1024,
                backupCount=3,
            ),
        )
    logging.basicConfig(
        level=config.LOG_LEVEL,
        format="%(asctime)s | %(levelname)s | %(name)s - %(message)s",
        datefmt="%Y/%m/%d %H:%M:%S",
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=constants.APP_TITLE.lower(),
        description="Deterministic trajectory laws for quantum states: integration and diagnostics.",
    )
    parser.add_argument("--version", action="version", version=constants.APP_VERSION)
    commands = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "integrate a trajectory, or an ensemble when the scenario has one"),
        ("diagnose", "run the diagnostics listed in the scenario"),
        ("validate", "check a scenario without running it"),
    ):
        command = commands.add_parser(name, help=help_text)
        command.add_argument("scenario", help="scenario JSON file")
        command.add_argument("--out", help="output directory (overrides the scenario)")
        command.add_argument("--seed", type=int, help="random seed (overrides the scenario)")
        command.add_argument("--quiet", action="store_true", help="only log errors to stderr")
    commands.add_parser("info", help="print an environment report")
    return parser


def load_scenario(args) -> ScenarioConfig:
    config = ScenarioConfig()
    config.set_config_file(args.scenario)
    if args.out is not None:
        config["output"] = args.out
    if args.seed is not None:
        config["seed"] = args.seed
    return config


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "info":
        configure_logging(app_config)
        sys.stdout.write(dump_json(SystemInfo().get_system_info(app_config.WORKERS)))
        return EXIT_OK

    try:
        config = load_scenario(args)
        runner = ScenarioRunner(config, app_config.WORKERS)
        if args.command == "validate":
            configure_logging(app_config, quiet=args.quiet)
            sys.stdout.write(dump_json(runner.validate()))
            return EXIT_OK
        config.validate()
        configure_logging(app_config, config["output"], args.quiet)
        if args.command == "diagnose":
            return runner.run_diagnose()
        return runner.run()
    except ScenarioError as e:
        sys.stderr.write(f"{constants.APP_TITLE.lower()}: invalid scenario: {e}\n")
        return EXIT_INVALID
    except Exception:
        logger.exception(f"'{args.command}' failed")
        raise


if __name__ == "__main__":
    sys.exit(main())
