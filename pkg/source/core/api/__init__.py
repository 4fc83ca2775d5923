from .law import ModeSet, TrajectoryLaw, check_node, compose_velocity

__all__ = ["ModeSet", "TrajectoryLaw", "check_node", "compose_velocity"]
