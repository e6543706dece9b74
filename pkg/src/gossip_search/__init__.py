"""Gossip-based file search on complete graphs: analytic models and simulation."""

__version__ = "0.1.0"

from .core_math import SearchConfig, SearchMetrics, RoundPmf  # noqa: E402
from .analytic_blind import blind_metrics, blind_round_pmf  # noqa: E402
from .analytic_smart import smart_metrics, build_transition_matrix  # noqa: E402
from .exact_blind import exact_metrics, relative_accuracy  # noqa: E402
from .simulator import BehaviorProfile, run_experiment, simulate_search  # noqa: E402

__all__ = [
    "SearchConfig",
    "SearchMetrics",
    "RoundPmf",
    "blind_metrics",
    "blind_round_pmf",
    "smart_metrics",
    "build_transition_matrix",
    "exact_metrics",
    "relative_accuracy",
    "BehaviorProfile",
    "run_experiment",
    "simulate_search",
]
