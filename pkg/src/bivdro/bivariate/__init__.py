"""Exact bivariate worst-case excess bound: partition, values, laws, duals."""

from .closed_form import (
    WorstCase,
    WorstCaseValue,
    check_distribution,
    value_on_line,
    worst_case,
    worst_case_distribution,
    worst_case_value,
)
from .conditions import (
    Aux,
    Condition,
    ConditionReport,
    Interval,
    ThetaCase,
    aux_quantities,
    branch_quantities,
    classify_condition,
    condition_intervals,
    direct_flags,
    theta_case,
)
from .duality import (
    DualCertificate,
    GapReport,
    dual_certificate,
    quadrant_min,
    verify_duality,
)
from .reduction import (
    LossReduction,
    reduce_loss,
    two_piece,
    two_piece_decomposed,
    worst_case_two_piece,
)

__all__ = [
    "Aux",
    "Condition",
    "ConditionReport",
    "DualCertificate",
    "GapReport",
    "Interval",
    "LossReduction",
    "ThetaCase",
    "WorstCase",
    "WorstCaseValue",
    "aux_quantities",
    "branch_quantities",
    "check_distribution",
    "classify_condition",
    "condition_intervals",
    "direct_flags",
    "dual_certificate",
    "quadrant_min",
    "reduce_loss",
    "theta_case",
    "two_piece",
    "two_piece_decomposed",
    "value_on_line",
    "verify_duality",
    "worst_case",
    "worst_case_distribution",
    "worst_case_two_piece",
    "worst_case_value",
]
