"""Robust newsvendor models built on the bivariate and univariate bounds.

All three models minimize ``worst-case E[(demand - order)+] + (1 - eta) * order``:

* BCM orders one quantity against the joint bivariate ambiguity set;
* BDM orders each product separately against its marginal moments;
* UCM orders one quantity against the moments of the pooled demand only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .bivariate import (
    Condition,
    ConditionReport,
    ThetaCase,
    classify_condition,
    condition_intervals,
    reduce_loss,
    worst_case_value,
)
from .bivariate.conditions import aux_quantities, theta_case
from .errors import DomainError
from .moments import MomentSpec, from_correlation, pooled_moments, require_valid
from .scarf import UnivariateSpec, scarf_bound, scarf_objective, scarf_order

TIE_RTOL = 1e-12


class Model(str, enum.Enum):
    BCM = "BCM"
    BDM = "BDM"
    UCM = "UCM"


@dataclass(frozen=True)
class Candidate:
    q: float
    objective: float
    condition: Condition
    kind: str  # "zero" | "endpoint" | "stationary"

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "objective": self.objective,
            "condition": f"C{int(self.condition)}",
            "kind": self.kind,
        }


@dataclass(frozen=True)
class NewsvendorSolution:
    model: Model
    q_star: float | tuple[float, float]
    objective: float
    eta: float
    active_condition: ConditionReport | None = None
    candidates: tuple[Candidate, ...] = field(default=())

    @property
    def total_order(self) -> float:
        if isinstance(self.q_star, tuple):
            return float(sum(self.q_star))
        return float(self.q_star)

    def to_dict(self) -> dict:
        out = {
            "model": self.model.value,
            "eta": self.eta,
            "q_star": list(self.q_star) if isinstance(self.q_star, tuple) else self.q_star,
            "total_order": self.total_order,
            "objective": self.objective,
        }
        if self.active_condition is not None:
            out["active_condition"] = f"C{int(self.active_condition.condition)}"
            out["candidates"] = [c.to_dict() for c in self.candidates]
        return out


def _check_eta(eta: float) -> None:
    if not (0.0 < eta < 1.0):
        raise DomainError(f"eta={eta} outside (0, 1)", "0 < eta < 1")


def bcm_objective(spec: MomentSpec, eta: float, q: float) -> float:
    return worst_case_value(spec, q).value + (1.0 - eta) * q


# --- stationary points -------------------------------------------------------


def _s_ab(a: float, b: float, c: float, eta: float) -> float:
    """S_a(eta); call with (b, a, c) for S_b."""
    num = (a - 1.0) * (a * b - c * c) - (c - a) ** 2
    den = 4.0 * a * eta * (a - a * eta - 1.0)
    if -1e-12 * max(1.0, a * a * b) <= num < 0.0:
        num = 0.0  # perfectly correlated boundary, up to rounding
    if den <= 0.0 or num < 0.0:
        return math.nan
    return math.sqrt(num / den)


@dataclass(frozen=True)
class StationaryTable:
    """Per-condition stationary points of the BCM objective at a given eta."""

    eta: float
    s_a: float
    s_b: float
    s_c: float
    points: dict  # Condition -> q or None when the eta-window excludes it

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "s_a": self.s_a,
            "s_b": self.s_b,
            "s_c": self.s_c,
            "points": {f"C{int(k)}": v for k, v in self.points.items()},
        }


def stationary_points(spec: MomentSpec, eta: float) -> StationaryTable:
    _check_eta(eta)
    mu1, mu2, a, b, c = spec.mu1, spec.mu2, spec.a, spec.b, spec.c
    mu_bar, sigma_bar = pooled_moments(spec)
    var_sum = sigma_bar - mu_bar * mu_bar
    s_c = math.sqrt(max(var_sum, 0.0) / (4.0 * eta * (1.0 - eta)))
    pts: dict = {Condition.C1: None}  # linear branch: endpoints only

    def window(lo, hi):
        return lo < eta < hi

    pts[Condition.C2] = (
        ((2 * b * eta - b + 1) * _s_ab(b, a, c, eta) - (c - b)) * mu1 / (b - 1)
        if window(0.0, 1.0 - 1.0 / b) else None
    )
    pts[Condition.C3] = (
        ((2 * a * eta - a + 1) * _s_ab(a, b, c, eta) - (c - a)) * mu2 / (a - 1)
        if window(0.0, 1.0 - 1.0 / a) else None
    )
    pts[Condition.C4] = (
        ((2 * b * eta - b - 1) * _s_ab(b, a, c, 1.0 - eta) - (c - b)) * mu1 / (b - 1)
        if window(1.0 / b, 1.0) else None
    )
    pts[Condition.C5] = (
        ((2 * a * eta - a - 1) * _s_ab(a, b, c, 1.0 - eta) - (c - a)) * mu2 / (a - 1)
        if window(1.0 / a, 1.0) else None
    )
    pts[Condition.C6] = (2.0 * eta - 1.0) * s_c + mu_bar
    pts = {k: (None if v is None or not math.isfinite(v) else float(v)) for k, v in pts.items()}
    s_a = _s_ab(a, b, c, eta) if eta < 1.0 - 1.0 / a else math.nan
    s_b = _s_ab(b, a, c, eta) if eta < 1.0 - 1.0 / b else math.nan
    return StationaryTable(eta, s_a, s_b, s_c, pts)


# --- solvers -----------------------------------------------------------------


def _bcm_special(spec: MomentSpec, eta: float, case: ThetaCase) -> list[float]:
    """Candidate orders when the pair behaves like a single product."""
    mu_bar, sigma_bar = pooled_moments(spec)
    if case is ThetaCase.POOLED:
        return [0.0, scarf_order(UnivariateSpec(mu_bar, sigma_bar), eta)]
    return [0.0, mu_bar]  # constant sum: kink of (S - q)+ + (1 - eta) q


def solve_bcm(spec: MomentSpec, eta: float) -> NewsvendorSolution:
    require_valid(spec)
    _check_eta(eta)
    aux = aux_quantities(spec)
    case = theta_case(spec, aux)
    table = condition_intervals(spec, case, aux)

    raw: list[tuple[float, str]] = [(0.0, "zero")]
    if case in (ThetaCase.POOLED, ThetaCase.COLLINEAR):
        raw += [(q, "stationary") for q in _bcm_special(spec, eta, case)[1:]]
    else:
        stat = stationary_points(spec, eta)
        for cond, iv in table.items():
            if iv.empty:
                continue
            raw += [(e, "endpoint") for e in iv.endpoints()]
            qs = stat.points.get(cond)
            if qs is not None and qs in iv:
                raw.append((qs, "stationary"))

    cands = []
    for q, kind in raw:
        if not (q >= 0.0 and math.isfinite(q)):
            continue
        v, cond = worst_case_value(spec, q)
        cands.append(Candidate(float(q), v + (1.0 - eta) * q, cond, kind))

    best = min(cands, key=lambda c: (c.objective, c.q))
    # ties within rounding go to the smallest order
    floor = best.objective + TIE_RTOL * max(1.0, abs(best.objective))
    best = min((c for c in cands if c.objective <= floor), key=lambda c: c.q)
    return NewsvendorSolution(
        Model.BCM, best.q, best.objective, eta,
        classify_condition(spec, best.q), tuple(cands),
    )


def marginal_specs(spec: MomentSpec) -> tuple[UnivariateSpec, UnivariateSpec]:
    return UnivariateSpec(spec.mu1, spec.sigma11), UnivariateSpec(spec.mu2, spec.sigma22)


def solve_bdm(spec: MomentSpec, eta: float) -> NewsvendorSolution:
    require_valid(spec)
    _check_eta(eta)
    u1, u2 = marginal_specs(spec)
    q1, q2 = scarf_order(u1, eta), scarf_order(u2, eta)
    obj = scarf_objective(u1, eta, q1) + scarf_objective(u2, eta, q2)
    return NewsvendorSolution(Model.BDM, (q1, q2), obj, eta)


def solve_ucm(spec: MomentSpec, eta: float) -> NewsvendorSolution:
    require_valid(spec)
    _check_eta(eta)
    pooled = UnivariateSpec(*pooled_moments(spec))
    q = scarf_order(pooled, eta)
    return NewsvendorSolution(Model.UCM, q, scarf_objective(pooled, eta, q), eta)


def solve(spec: MomentSpec, eta: float, model: Model | str) -> NewsvendorSolution:
    model = model if isinstance(model, Model) else Model(str(model).upper())
    return {Model.BCM: solve_bcm, Model.BDM: solve_bdm, Model.UCM: solve_ucm}[model](spec, eta)


def relative_gap(spec: MomentSpec, eta: float) -> float:
    """(V_BDM - V_BCM) / V_BCM."""
    v_bcm = solve_bcm(spec, eta).objective
    return (solve_bdm(spec, eta).objective - v_bcm) / v_bcm


def order_gap(spec: MomentSpec, eta: float) -> float:
    """Total decentralized order minus the centralized order."""
    return solve_bdm(spec, eta).total_order - solve_bcm(spec, eta).total_order


# --- sweeps ------------------------------------------------------------------

SWEEP_HEADER = (
    "rho", "eta", "v_bcm", "v_bdm", "v_ucm", "kappa",
    "q_bcm", "q1_bdm", "q2_bdm", "q_ucm", "order_gap", "status",
)


def sweep_row(mu1, mu2, a, b, rho, eta) -> dict:
    """One CSV row; infeasible (rho, eta) pairs yield NaNs and status 'infeasible'."""
    row = {k: math.nan for k in SWEEP_HEADER}
    row.update(rho=rho, eta=eta, status="ok")
    try:
        spec = from_correlation(mu1, mu2, a, b, rho)
        require_valid(spec)
        _check_eta(eta)
    except DomainError:
        row["status"] = "infeasible"
        return row
    bcm, bdm, ucm = solve_bcm(spec, eta), solve_bdm(spec, eta), solve_ucm(spec, eta)
    row.update(
        v_bcm=bcm.objective,
        v_bdm=bdm.objective,
        v_ucm=ucm.objective,
        kappa=(bdm.objective - bcm.objective) / bcm.objective,
        q_bcm=bcm.total_order,
        q1_bdm=bdm.q_star[0],
        q2_bdm=bdm.q_star[1],
        q_ucm=ucm.total_order,
        order_gap=bdm.total_order - bcm.total_order,
    )
    return row


def sweep(mu1, mu2, a, b, rhos, etas) -> list[dict]:
    """Rows in rho-major, eta-minor order."""
    return [sweep_row(mu1, mu2, a, b, float(r), float(e)) for r in rhos for e in etas]


# --- multivariate decomposition ------------------------------------------------


def _block_mean(block) -> np.ndarray:
    if isinstance(block, MomentSpec):
        return np.array([block.mu1, block.mu2])
    return np.array([block.mu])


def _block_bound(block, w: np.ndarray, u1, u2, q: float) -> float:
    """sup E[(w'X - q)+] for one block (q may be negative)."""
    if isinstance(block, MomentSpec):
        return reduce_loss(u1, u2, 0.0, -q * (u2 - u1), w, block).inner_bound()
    mean = float(w[0] * block.mu)
    if q < 0.0:
        return mean - q
    if w[0] == 0.0:
        return 0.0
    return scarf_bound(UnivariateSpec(mean, w[0] ** 2 * block.sigma2), q).value


@dataclass(frozen=True)
class DecompositionBound:
    value: float
    splits: np.ndarray  # per-block reduced order q_i, summing to the global q
    iterations: int
    converged: bool


def multivariate_upper_bound(blocks, u1, u2, v1, v2, w, tol: float = 1e-7, max_sweeps: int = 200):
    """Upper bound on sup E[max{u1 w'X + v1, u2 w'X + v2}] from per-block bounds.

    Splitting v1 = sum v1_i and v2 = sum v2_i gives a valid bound for every
    split; only the differences v2_i - v1_i matter, i.e. a split of the
    reduced order q = -(v2 - v1)/(u2 - u1) into q_i with sum q. The sum of
    per-block bounds is convex in the split, and pairwise exchange descent
    from the mean-proportional split runs until a full sweep improves by
    less than ``tol`` (relative).
    """
    if not u1 < u2:
        raise DomainError(f"need u1 < u2 (got {u1}, {u2})", "u1 < u2")
    blocks = list(blocks)
    if not blocks:
        raise DomainError("need at least one block", "blocks non-empty")
    dims = []
    for blk in blocks:
        if isinstance(blk, MomentSpec):
            require_valid(blk)
            dims.append(2)
        elif isinstance(blk, UnivariateSpec):
            blk.check()
            dims.append(1)
        else:
            raise DomainError(f"unsupported block {blk!r}", "block type")
    w = np.asarray(w, dtype=float)
    if w.shape != (sum(dims),) or np.any(w < 0.0):
        raise DomainError(
            f"w must be a nonnegative vector of length {sum(dims)}", "blocks partition w"
        )
    offsets = np.cumsum([0] + dims)
    ws = [w[offsets[i]:offsets[i + 1]] for i in range(len(blocks))]
    means = np.array([float(wi @ _block_mean(b)) for wi, b in zip(ws, blocks)])
    q = -(v2 - v1) / (u2 - u1)
    const = u1 * float(means.sum()) + v1
    scale = u2 - u1

    def f(i, qi):
        return _block_bound(blocks[i], ws[i], u1, u2, qi)

    k = len(blocks)
    total_mean = means.sum()
    splits = means / total_mean * q if total_mean > 0.0 else np.full(k, q / k)
    vals = np.array([f(i, splits[i]) for i in range(k)])
    radius = abs(q) + 10.0 * (total_mean + 1.0) + sum(
        math.sqrt(b.sigma11 + b.sigma22) if isinstance(b, MomentSpec) else math.sqrt(b.sigma2)
        for b in blocks
    ) * float(w.max(initial=0.0))

    sweeps, converged = 0, k == 1
    while not converged and sweeps < max_sweeps:
        sweeps += 1
        before = vals.sum()
        for i in range(k):
            for j in range(i + 1, k):
                qi, qj = splits[i], splits[j]

                def pair(t):
                    return f(i, qi + t) + f(j, qj - t)

                res = minimize_scalar(pair, bounds=(-radius, radius), method="bounded",
                                      options={"xatol": 1e-10 * max(1.0, radius)})
                if res.fun < vals[i] + vals[j]:
                    splits[i], splits[j] = qi + res.x, qj - res.x
                    vals[i], vals[j] = f(i, splits[i]), f(j, splits[j])
        converged = before - vals.sum() <= tol * max(1.0, abs(before))
    return DecompositionBound(scale * float(vals.sum()) + const, splits, sweeps, converged)
