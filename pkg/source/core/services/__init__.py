from .output_writer import OutputWriter
from .scenario_runner import EXIT_INVALID, EXIT_OK, EXIT_TERMINATED, ScenarioRunner

__all__ = ["EXIT_INVALID", "EXIT_OK", "EXIT_TERMINATED", "OutputWriter", "ScenarioRunner"]
