"""UAV-mounted reflecting surface serving high-speed trains: channel model,
max-min reflector assignment, trajectory environment, SAC training and
benchmarks."""
from .assignment import AssignmentSolution, evaluate, solve_brute_force, solve_exact, solve_greedy
from .channel import IrsPanel, cascaded_link, compute_geometry, radiation_pattern, rate
from .config import ScenarioConfig, load_scenario
from .env import HstEnv, run_algorithm1
from .exceptions import (ConfigError, DegenerateGeometryError, DomainError, InstanceTooLargeError,
                         TrainingDivergenceError)

__version__ = "0.1.0"

__all__ = [
    "AssignmentSolution", "ConfigError", "DegenerateGeometryError", "DomainError", "HstEnv",
    "InstanceTooLargeError", "IrsPanel", "ScenarioConfig", "TrainingDivergenceError", "cascaded_link",
    "compute_geometry", "evaluate", "load_scenario", "radiation_pattern", "rate", "run_algorithm1",
    "solve_brute_force", "solve_exact", "solve_greedy",
]
