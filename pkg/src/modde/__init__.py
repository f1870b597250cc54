"""Modular differential evolution: a configurable DE engine, benchmark suite,
anytime-performance metrics and a racing-based configuration tuner."""

from .config import Configuration, load_configuration, parse_configuration, save_configuration
from .engine import ModularDE, RunResult, run, step_generation
from .exceptions import (
    ConfigurationError,
    DegenerateCovarianceError,
    InfeasibleOperatorError,
    LogParseError,
)
from .metrics import RunLog, aoc, ecdf, read_log, target_grid, write_log
from .presets import common_variant, single_module_variants
from .problems import ProblemInstance, make_instance

__all__ = [
    "Configuration",
    "ConfigurationError",
    "DegenerateCovarianceError",
    "InfeasibleOperatorError",
    "LogParseError",
    "ModularDE",
    "ProblemInstance",
    "RunLog",
    "RunResult",
    "aoc",
    "common_variant",
    "ecdf",
    "load_configuration",
    "make_instance",
    "parse_configuration",
    "read_log",
    "run",
    "save_configuration",
    "single_module_variants",
    "step_generation",
    "target_grid",
    "write_log",
]
