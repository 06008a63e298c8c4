"""Independent numerical oracle: discretized moment LPs on our own simplex."""

from .lp import (
    GridConfig,
    OracleResult,
    dominance_tolerance,
    lp_expectation,
    lp_worst_case,
    lp_worst_case_1d,
    max_prob_below,
    max_prob_below_result,
    shifting_bound,
    sum_scale,
)
from .simplex import LpResult, solve_lp

__all__ = [
    "GridConfig",
    "LpResult",
    "OracleResult",
    "dominance_tolerance",
    "lp_expectation",
    "lp_worst_case",
    "lp_worst_case_1d",
    "max_prob_below",
    "max_prob_below_result",
    "shifting_bound",
    "solve_lp",
    "sum_scale",
]
