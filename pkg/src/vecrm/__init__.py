"""Regret-matching task assignment for vehicular edge computing."""
from .baselines import exhaustive_search, run_trm
from .config import ExperimentConfig, load_config, preset
from .game import JointDistribution, MatrixGame, TaskAssignmentGame, is_correlated_equilibrium
from .learner import RegretMatchingLearner, RegretState
from .metrics import convergence_iteration, jain_fairness
from .scenario import build_scenario

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig", "JointDistribution", "MatrixGame", "RegretMatchingLearner", "RegretState",
    "TaskAssignmentGame", "build_scenario", "convergence_iteration", "exhaustive_search",
    "is_correlated_equilibrium", "jain_fairness", "load_config", "preset", "run_trm",
]
