"""CMA-ES and the Stage-2 co-design driver."""

from .cmaes import CmaesConfig, CmaesError, ask, init_state, minimize, tell
from .codesign import CodesignOptimizer, CodesignResult, cost, decode, evaluate, optimize_case

__all__ = [
    "CmaesConfig",
    "CmaesError",
    "ask",
    "init_state",
    "minimize",
    "tell",
    "CodesignOptimizer",
    "CodesignResult",
    "cost",
    "decode",
    "evaluate",
    "optimize_case",
]
