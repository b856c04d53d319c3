"""Experiment orchestration, configuration and the ``roughlab`` CLI."""

from .config import ExperimentConfig, from_dict, load, loads
from .experiments import (run_contraction, run_integrate, run_lift, run_rates, run_solve,
                          run_stability)

__all__ = ["ExperimentConfig", "from_dict", "load", "loads", "run_contraction",
           "run_integrate", "run_lift", "run_rates", "run_solve", "run_stability"]
