from .archive import BehaviorGrid, Elite, OutcomeArchive, OutcomeRecord, behavior_bounds
from .engine import LogRecord, QDConfig, RunResult, run_cma_mae, run_map_elites, run_random

__all__ = [
    "BehaviorGrid",
    "Elite",
    "OutcomeArchive",
    "OutcomeRecord",
    "behavior_bounds",
    "LogRecord",
    "QDConfig",
    "RunResult",
    "run_cma_mae",
    "run_map_elites",
    "run_random",
]
