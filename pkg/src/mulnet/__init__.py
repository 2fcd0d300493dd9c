"""Multiplicative-relation learning with a symmetric log/exp activation pair."""
from .activations import PROPOSED_PAIR, get_activation, symexp, symlog
from .datagen import Dataset, TargetFunction, generate
from .metrics import evaluate, percent_error
from .network import Network, NetworkSpec, forward, init_network
from .sweep import SweepPlan, rank_results, run_sweep
from .training import TrainConfig, train

__all__ = [
    "PROPOSED_PAIR", "Dataset", "Network", "NetworkSpec", "SweepPlan", "TargetFunction", "TrainConfig",
    "evaluate", "forward", "generate", "get_activation", "init_network", "percent_error",
    "rank_results", "run_sweep", "symexp", "symlog", "train",
]
