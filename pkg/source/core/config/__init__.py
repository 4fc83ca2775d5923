from .scenario_config import ScenarioConfig

__all__ = ["ScenarioConfig"]
