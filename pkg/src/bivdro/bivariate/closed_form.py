"""Closed-form worst-case value of E[(X1 + X2 - q)+] and the extremal laws."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..distributions import DiscreteDistribution
from ..errors import ConsistencyError
from ..moments import MomentSpec, pooled_moments
from ..scarf import UnivariateSpec, scarf_bound
from .conditions import (
    Condition,
    ConditionReport,
    ThetaCase,
    branch_quantities,
    classify_condition,
)

MERGE_TOL = 1e-12
GUARD_TOL = 1e-12


class WorstCaseValue(NamedTuple):
    value: float
    condition: Condition


def _branch_value(spec: MomentSpec, q: float, rep: ConditionReport) -> float:
    mu1, mu2, a, b, c = spec.mu1, spec.mu2, spec.a, spec.b, spec.c
    cond = rep.condition
    if rep.case_label is ThetaCase.POOLED:
        mu_bar, sigma_bar = pooled_moments(spec)
        return scarf_bound(UnivariateSpec(mu_bar, sigma_bar), q).value
    if rep.case_label is ThetaCase.COLLINEAR:
        return max(mu1 + mu2 - q, 0.0)
    if cond is Condition.C1:
        return mu1 + mu2 - q * (a + b - 2.0 * c) / (a * b - c * c)
    if cond is Condition.C2:
        beta = (b - c) * mu1 / (b - 1.0)
        return (b - 1.0) / (2.0 * b) * (q + rep.q_b - beta) + mu1 + mu2 - q
    if cond is Condition.C3:
        beta = (a - c) * mu2 / (a - 1.0)
        return (a - 1.0) / (2.0 * a) * (q + rep.q_a - beta) + mu1 + mu2 - q
    if cond is Condition.C4:
        beta = (b - c) * mu1 / (b - 1.0)
        return (b - 1.0) / (2.0 * b) * (beta - q + rep.q_b)
    if cond is Condition.C5:
        beta = (a - c) * mu2 / (a - 1.0)
        return (a - 1.0) / (2.0 * a) * (beta - q + rep.q_a)
    return 0.5 * (rep.q_c - q + mu1 + mu2)


def worst_case_value(spec: MomentSpec, q: float) -> WorstCaseValue:
    """sup E[(X1 + X2 - q)+] over nonnegative laws with the given moments."""
    rep = classify_condition(spec, q)
    return WorstCaseValue(_branch_value(spec, q, rep), rep.condition)


@dataclass(frozen=True)
class WorstCase:
    """Value, classification and extremal law bundled together."""

    value: float
    report: ConditionReport
    distribution: DiscreteDistribution
    degenerate: bool = False
    warnings: tuple[str, ...] = field(default=())

    @property
    def condition(self) -> Condition:
        return self.report.condition


# --- extremal distributions -------------------------------------------------


def _three_point_c1(spec: MomentSpec) -> DiscreteDistribution:
    """Atoms at the origin, on the x1-axis and at (c mu1, b mu2); needs b > c."""
    mu1, mu2, a, b, c = spec.mu1, spec.mu2, spec.a, spec.b, spec.c
    det_ab = a * b - c * c
    det_m = (a - 1.0) * (b - 1.0) - (c - 1.0) ** 2
    pts = [[0.0, 0.0], [det_ab * mu1 / (b - c), 0.0], [c * mu1, b * mu2]]
    probs = [det_m / det_ab, (b - c) ** 2 / (det_ab * b), 1.0 / b]
    return DiscreteDistribution(pts, probs)


def _c1_distribution(spec: MomentSpec, q: float) -> DiscreteDistribution:
    a, b, c = spec.a, spec.b, spec.c
    variants = []
    if b > c:
        variants.append(lambda: _three_point_c1(spec))
    if a > c:
        variants.append(lambda: _three_point_c1(spec.swapped()).swapped())
    if b < a:
        variants.reverse()
    # a variant attains the bound only if its two non-origin atoms sit at or beyond q
    tol = MERGE_TOL * max(1.0, q)
    built = [make() for make in variants]
    for dist in built:
        if np.all(dist.points[1:].sum(axis=1) >= q - tol):
            return dist
    return built[0]


def _line_distribution(
    spec: MomentSpec, q: float, q_b: float
) -> tuple[DiscreteDistribution, bool]:
    """Two atoms on the x1-axis around q plus (c mu1, b mu2)."""
    mu1, mu2, b, c = spec.mu1, spec.mu2, spec.b, spec.c
    top = (c * mu1, b * mu2)
    if q_b <= MERGE_TOL * max(1.0, q, mu1 + mu2):
        pts = [[q, 0.0], list(top)]
        return DiscreteDistribution(pts, [(b - 1.0) / b, 1.0 / b]), True
    beta = (b - c) * mu1 / (b - 1.0)
    w = (b - 1.0) / (2.0 * b * q_b)
    pts = [[q - q_b, 0.0], [q + q_b, 0.0], list(top)]
    probs = [w * (q_b + q - beta), w * (q_b - q + beta), 1.0 / b]
    return DiscreteDistribution(pts, probs), False


def _c6_distribution(
    spec: MomentSpec, q: float, q_c: float
) -> tuple[DiscreteDistribution | None, str]:
    """Four atoms on the two lines x1 + x2 = q -/+ Q_c, or a reason it failed."""
    mu1, mu2, a, b, c = spec.mu1, spec.mu2, spec.a, spec.b, spec.c
    ua = q + q_c - (a * mu1 + c * mu2)
    va = a * mu1 + c * mu2 - q + q_c
    ub = q + q_c - (b * mu2 + c * mu1)
    vb = b * mu2 + c * mu1 - q + q_c
    uc = q + q_c - mu1 - mu2
    vc = mu1 + mu2 - q + q_c
    scale = max(1.0, q, mu1 + mu2, q_c)
    guard = GUARD_TOL * scale
    if uc <= guard or vc <= guard:
        return None, f"C6 guard: U_c={uc:.3g}, V_c={vc:.3g}"

    det_m = (a - 1.0) * (b - 1.0) * (mu1 * mu2) ** 2 - ((c - 1.0) * mu1 * mu2) ** 2
    det_m = max(det_m, 0.0)
    den = det_m + c * mu1 * mu2 * uc * vc
    t0 = det_m / den if den > 0.0 else 0.0
    t1 = ub * mu2 / uc + t0 * ua * mu1 / uc
    t2 = va * mu1 / vc + t0 * vb * mu2 / vc
    if t1 <= guard or t2 <= guard:
        return None, f"C6 guard: t1={t1:.3g}, t2={t2:.3g}"

    two_q = 2.0 * q_c
    pts = [
        [(1.0 - t0) * ua * mu1 / uc, t1],
        [q - q_c, 0.0],
        [0.0, q + q_c],
        [t2, (1.0 - t0) * vb * mu2 / vc],
    ]
    probs = [
        ub * mu2 / (two_q * t1),
        t0 * ua * mu1 / (two_q * t1),
        t0 * vb * mu2 / (two_q * t2),
        va * mu1 / (two_q * t2),
    ]
    return DiscreteDistribution(pts, probs), ""


def _pooled_distribution(spec: MomentSpec, q: float) -> DiscreteDistribution:
    mu_bar, sigma_bar = pooled_moments(spec)
    res = scarf_bound(UnivariateSpec(mu_bar, sigma_bar), q)
    s = res.distribution.points[:, 0]
    w = np.array([spec.mu1, spec.mu2]) / mu_bar
    return DiscreteDistribution(np.outer(s, w), res.distribution.probs)


def _collinear_distribution(spec: MomentSpec) -> DiscreteDistribution:
    total = spec.mu1 + spec.mu2
    top = spec.a * spec.mu1  # second point of the two-point X1 marginal
    pts = [[0.0, total], [top, total - top]]
    return DiscreteDistribution(pts, [1.0 - 1.0 / spec.a, 1.0 / spec.a])


def _oracle_fallback(spec: MomentSpec, q: float) -> DiscreteDistribution:
    from ..oracle import GridConfig, lp_worst_case

    res = lp_worst_case(spec, q, GridConfig(n_per_axis=120, inject_analytic=False))
    return res.distribution


def worst_case(spec: MomentSpec, q: float) -> WorstCase:
    rep = classify_condition(spec, q)
    value = _branch_value(spec, q, rep)
    cond = rep.condition
    notes: list[str] = []
    degenerate = rep.clamped

    if rep.case_label is ThetaCase.POOLED:
        dist = _pooled_distribution(spec, q)
    elif rep.case_label is ThetaCase.COLLINEAR:
        dist = _collinear_distribution(spec)
    elif cond is Condition.C1:
        dist = _c1_distribution(spec, q)
    elif cond in (Condition.C2, Condition.C4):
        dist, merged = _line_distribution(spec, q, rep.q_b)
        degenerate |= merged
    elif cond in (Condition.C3, Condition.C5):
        sw = spec.swapped()
        dist, merged = _line_distribution(sw, q, rep.q_a)
        dist = dist.swapped()
        degenerate |= merged
    else:
        dist, reason = _c6_distribution(spec, q, rep.q_c)
        if dist is None:
            degenerate = True
            notes.append(reason)
            warnings.warn(f"{reason}; extremal law taken from the LP oracle")
            dist = _oracle_fallback(spec, q)

    dist = DiscreteDistribution(dist.points, dist.probs, tuple(notes))
    return WorstCase(value, rep, dist, degenerate, tuple(notes))


def worst_case_distribution(spec: MomentSpec, q: float) -> DiscreteDistribution:
    return worst_case(spec, q).distribution


def check_distribution(
    spec: MomentSpec, q: float, dist: DiscreteDistribution, value: float, rtol=1e-9
) -> None:
    """Raise :class:`ConsistencyError` unless ``dist`` is feasible and attains ``value``."""
    if np.any(dist.probs < -1e-12) or np.any(dist.probs > 1.0 + 1e-12):
        raise ConsistencyError(f"probabilities outside [0, 1]: {dist.probs}")
    res = dist.moment_residuals(spec.moment_vector())
    if res.max() > rtol:
        raise ConsistencyError(f"moment residual {res.max():.3g} exceeds {rtol}")
    got = dist.expected_excess(q)
    if abs(got - value) > rtol * max(1.0, abs(value)):
        raise ConsistencyError(f"distribution attains {got!r}, closed form {value!r}")


def value_on_line(spec: MomentSpec, q: float) -> float:
    """Univariate bound on the pooled moments (the C6 value by another route)."""
    mu_bar, sigma_bar = pooled_moments(spec)
    return scarf_bound(UnivariateSpec(mu_bar, sigma_bar), q).value


__all__ = [
    "WorstCase",
    "WorstCaseValue",
    "branch_quantities",
    "check_distribution",
    "value_on_line",
    "worst_case",
    "worst_case_distribution",
    "worst_case_value",
]
