"""Discretized moment LP: an independent check on the closed forms.

The supremum over all nonnegative laws is restricted to laws supported on a
finite grid (plus a few injected points), which turns it into a finite LP
over the atom weights. Restricting the support can only lower the value, so
the oracle is a lower bound up to the moment slack delta.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..distributions import DiscreteDistribution
from ..errors import CertificateUnavailable, DomainError, OracleInfeasible
from ..moments import MomentSpec, require_valid
from ..scarf import UnivariateSpec
from .simplex import solve_lp

MOMENT_NAMES = ("mass", "mean1", "mean2", "second1", "second2", "cross")


@dataclass(frozen=True)
class GridConfig:
    n_per_axis: int = 200  # intervals per axis; the grid has n + 1 nodes
    box_k: float = 8.0
    slack: float | None = None  # None selects the default 1e-6 (1 + a mu1^2 + b mu2^2)
    inject_analytic: bool = True

    def __post_init__(self):
        if int(self.n_per_axis) != self.n_per_axis or self.n_per_axis < 10:
            raise DomainError("n_per_axis must be an integer >= 10", "n_per_axis >= 10")
        if not self.box_k > 0.0:
            raise DomainError("box_k must be positive", "box_k > 0")
        if self.slack is not None and not self.slack >= 0.0:
            raise DomainError("slack must be nonnegative", "slack >= 0")

    def delta(self, spec: MomentSpec) -> float:
        if self.slack is not None:
            return float(self.slack)
        return 1e-6 * (1.0 + spec.sigma11 + spec.sigma22)

    def box(self, spec: MomentSpec, q: float = 0.0) -> tuple[float, float]:
        """Axis lengths: mu_i + k * sigma_sum + q."""
        s = sum_scale(spec)
        return (spec.mu1 + self.box_k * s + q, spec.mu2 + self.box_k * s + q)

    def slack_floor(self, spec: MomentSpec, q: float = 0.0) -> float:
        """Conservative slack that makes the bare grid LP feasible."""
        l1, l2 = self.box(spec, q)
        return 2.0 * math.hypot(l1, l2) * max(spec.sigma11, spec.sigma22) / self.n_per_axis


def sum_scale(spec: MomentSpec) -> float:
    """sqrt(Var X1 + Var X2 + 2 |Cov|): dominates the sd of each coordinate and of the sum."""
    cov = spec.covariance()
    return math.sqrt(cov.m11 + cov.m22 + 2.0 * abs(cov.m12))


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    distribution: DiscreteDistribution
    slack_used: dict
    delta: float
    n_columns: int
    iterations: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "distribution": self.distribution.to_dict(),
            "slack_used": self.slack_used,
            "delta": self.delta,
            "n_columns": self.n_columns,
            "iterations": self.iterations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def grid_points(l1: float, l2: float, n: int) -> np.ndarray:
    g1 = np.linspace(0.0, l1, n + 1)
    g2 = np.linspace(0.0, l2, n + 1)
    x1, x2 = np.meshgrid(g1, g2, indexing="ij")
    return np.column_stack([x1.ravel(), x2.ravel()])


def features_2d(points: np.ndarray) -> np.ndarray:
    x1, x2 = points[:, 0], points[:, 1]
    return np.vstack([np.ones_like(x1), x1, x2, x1 * x1, x2 * x2, x1 * x2])


def solve_moment_lp(
    features: np.ndarray,
    target: np.ndarray,
    objective: np.ndarray,
    delta: float,
    names=MOMENT_NAMES,
    suggest: float | None = None,
):
    """max objective . p  s.t. mass exact, other moments within +-delta, p >= 0.

    Slack t_i in [0, 2 delta] enters as ``phi_i . p - t_i = m_i - delta`` with
    the upper bound imposed by ``t_i + r_i = 2 delta``.
    """
    r, n = features.shape
    k = r - 1
    A = np.zeros((1 + 2 * k, n + 2 * k))
    rhs = np.zeros(1 + 2 * k)
    A[0, :n] = features[0]
    rhs[0] = target[0]
    for i in range(k):
        A[1 + i, :n] = features[1 + i]
        A[1 + i, n + i] = -1.0
        rhs[1 + i] = target[1 + i] - delta
        A[1 + k + i, n + i] = 1.0
        A[1 + k + i, n + k + i] = 1.0
        rhs[1 + k + i] = 2.0 * delta
    cost = np.concatenate([objective, np.zeros(2 * k)])
    res = solve_lp(cost, A, rhs)
    hint = suggest if suggest is not None and suggest > delta else 10.0 * max(delta, 1e-12)
    if res.status == "infeasible":
        row = res.infeasible_rows[0] if res.infeasible_rows else 0
        name = names[row if row <= k else row - k]
        raise OracleInfeasible(
            f"grid LP infeasible at slack {delta:.3g} (constraint '{name}')",
            constraint=name,
            suggested_slack=hint,
        )
    if not res.ok:
        raise OracleInfeasible(f"grid LP stopped: {res.status}", "simplex", hint)
    p = res.x[:n]
    return p, res


def _residuals(features, p, target, names) -> dict:
    got = features @ p
    return {nm: float(g - t) for nm, g, t in zip(names, got, target)}


def _distribution(points: np.ndarray, p: np.ndarray) -> DiscreteDistribution:
    keep = p > 0.0
    return DiscreteDistribution(points[keep], p[keep])


def _injected(spec: MomentSpec, q: float, grid: GridConfig) -> np.ndarray:
    extra = [[0.0, 0.0], [q, 0.0], [0.0, q]]
    if grid.inject_analytic:
        from ..bivariate import worst_case_distribution

        extra.extend(worst_case_distribution(spec, q).points.tolist())
    return np.array(extra, dtype=float)


def lp_worst_case(spec: MomentSpec, q: float, grid: GridConfig = GridConfig()) -> OracleResult:
    """Discretized sup E[(X1 + X2 - q)+]."""
    require_valid(spec)
    if not (math.isfinite(q) and q >= 0.0):
        raise DomainError(f"q={q} must be a finite value >= 0", "q >= 0")
    l1, l2 = grid.box(spec, q)
    pts = np.vstack([grid_points(l1, l2, grid.n_per_axis), _injected(spec, q, grid)])
    feats = features_2d(pts)
    target = spec.moment_vector()
    obj = np.maximum(pts.sum(axis=1) - q, 0.0)
    delta = grid.delta(spec)
    p, res = solve_moment_lp(feats, target, obj, delta, suggest=grid.slack_floor(spec, q))
    return OracleResult(
        value=float(obj @ p),
        distribution=_distribution(pts, p),
        slack_used=_residuals(feats, p, target, MOMENT_NAMES),
        delta=delta,
        n_columns=pts.shape[0],
        iterations=res.iterations,
    )


def lp_worst_case_1d(uspec: UnivariateSpec, q: float, grid: GridConfig = GridConfig()) -> OracleResult:
    """Univariate variant on a 1-D grid."""
    uspec.check()
    sd = math.sqrt(max(uspec.variance, 0.0))
    length = uspec.mu + grid.box_k * sd + q
    x = np.concatenate([np.linspace(0.0, length, grid.n_per_axis + 1), [q]])
    feats = np.vstack([np.ones_like(x), x, x * x])
    target = np.array([1.0, uspec.mu, uspec.sigma2])
    delta = grid.slack if grid.slack is not None else 1e-6 * (1.0 + uspec.sigma2)
    names = ("mass", "mean", "second")
    obj = np.maximum(x - q, 0.0)
    p, res = solve_moment_lp(feats, target, obj, delta, names)
    keep = p > 0.0
    return OracleResult(
        value=float(obj @ p),
        distribution=DiscreteDistribution(x[keep][:, None], p[keep]),
        slack_used=_residuals(feats, p, target, names),
        delta=delta,
        n_columns=x.size,
        iterations=res.iterations,
    )


def lp_expectation(
    spec: MomentSpec, loss, grid: GridConfig = GridConfig(), extra_points=None, pad: float = 0.0
) -> OracleResult:
    """Discretized sup E[loss(X)] for a vectorized ``loss(points) -> values``."""
    require_valid(spec)
    l1, l2 = grid.box(spec, pad)
    pts = grid_points(l1, l2, grid.n_per_axis)
    if extra_points is not None:
        pts = np.vstack([pts, np.asarray(extra_points, dtype=float)])
    feats = features_2d(pts)
    target = spec.moment_vector()
    obj = np.asarray(loss(pts), dtype=float)
    delta = grid.delta(spec)
    p, res = solve_moment_lp(feats, target, obj, delta, suggest=grid.slack_floor(spec, pad))
    return OracleResult(float(obj @ p), _distribution(pts, p),
                        _residuals(feats, p, target, MOMENT_NAMES), delta,
                        pts.shape[0], res.iterations)


def max_prob_below(spec: MomentSpec, xi: float, grid: GridConfig = GridConfig()) -> float:
    """Discretized max P(X1 <= xi) over the ambiguity set."""
    return max_prob_below_result(spec, xi, grid).value


def max_prob_below_result(spec: MomentSpec, xi: float, grid: GridConfig = GridConfig()) -> OracleResult:
    require_valid(spec)
    if not (math.isfinite(xi) and xi >= 0.0):
        raise DomainError(f"xi={xi} must be a finite value >= 0", "xi >= 0")
    from ..bivariate import worst_case_distribution

    l1, l2 = grid.box(spec)
    n = grid.n_per_axis
    line = np.column_stack([np.full(n + 1, xi), np.linspace(0.0, l2, n + 1)])
    # any feasible law's atoms keep the LP feasible on near-singular covariances
    feasible = worst_case_distribution(spec, 0.0).points
    pts = np.vstack([grid_points(l1, l2, n), line, feasible])
    feats = features_2d(pts)
    target = spec.moment_vector()
    obj = (pts[:, 0] <= xi).astype(float)
    delta = grid.delta(spec)
    p, res = solve_moment_lp(feats, target, obj, delta, suggest=grid.slack_floor(spec))
    return OracleResult(float(obj @ p), _distribution(pts, p),
                        _residuals(feats, p, target, MOMENT_NAMES), delta,
                        pts.shape[0], res.iterations)


def shifting_bound(spec: MomentSpec) -> float:
    """Support floor (1 - sqrt((a-1)/(b-1))) mu1 of the lower-variance-ratio coordinate at rho = 1.

    With a <= b this bounds X1 from below; with a > b the roles swap and the
    returned value bounds X2.
    """
    require_valid(spec)
    if spec.a > spec.b:
        spec = spec.swapped()
    return (1.0 - math.sqrt((spec.a - 1.0) / (spec.b - 1.0))) * spec.mu1


def dominance_tolerance(spec: MomentSpec, q: float, delta: float) -> float:
    """delta * sum |z_i| over the moment rows of the closed-form dual.

    Any law meeting the moments within +-delta has E[(X1+X2-q)+] at most the
    closed form plus this amount.
    """
    from ..bivariate import dual_certificate

    try:
        z = dual_certificate(spec, q).z
        return delta * float(np.abs(z[1:]).sum())
    except CertificateUnavailable:
        # the bound is 1-Lipschitz in q, so a certificate at q + eps costs eps extra;
        # its coefficients grow as eps shrinks, so pick the best eps on a log grid
        best = math.inf
        for eps in np.logspace(-9, -1, 33) * max(1.0, q):
            z = dual_certificate(spec, q + eps).z
            best = min(best, delta * float(np.abs(z[1:]).sum()) + eps)
        return best
