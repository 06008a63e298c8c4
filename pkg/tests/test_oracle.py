import json
import math

import numpy as np
import pytest

from bivdro import DomainError
from bivdro.bivariate import worst_case_value
from bivdro.errors import OracleInfeasible
from bivdro.moments import from_correlation
from bivdro.oracle import (
    GridConfig,
    dominance_tolerance,
    lp_worst_case,
    max_prob_below,
    max_prob_below_result,
    shifting_bound,
    sum_scale,
)

SPEC = from_correlation(1, 1, 2, 6, 0.3)


def test_grid_config_validation():
    for bad in (dict(n_per_axis=5), dict(n_per_axis=10.5), dict(box_k=0), dict(slack=-1.0)):
        with pytest.raises(DomainError):
            GridConfig(**bad)
    g = GridConfig()
    assert g.delta(SPEC) == pytest.approx(1e-6 * (1 + 2 + 6))
    assert GridConfig(slack=0.0).delta(SPEC) == 0.0
    l1, l2 = g.box(SPEC, 2.0)
    assert l1 == pytest.approx(1 + 8 * sum_scale(SPEC) + 2)


def test_sum_scale_dominates_sds():
    for rho in (-0.4, 0.0, 0.9):
        s = from_correlation(1, 2, 2, 6, rho)
        cov = s.covariance()
        assert sum_scale(s) >= math.sqrt(max(cov.m11, cov.m22, cov.variance_of_sum)) - 1e-12


@pytest.mark.parametrize("q", [0.5, 2.0, 6.0])
def test_injected_support_makes_oracle_exact(q):
    res = lp_worst_case(SPEC, q, GridConfig(n_per_axis=40, slack=0.0))
    assert res.value == pytest.approx(worst_case_value(SPEC, q).value, rel=1e-9)


@pytest.mark.parametrize("q", [0.5, 2.0, 6.0])
def test_oracle_is_dominated(q):
    res = lp_worst_case(SPEC, q, GridConfig(n_per_axis=60, inject_analytic=False))
    closed = worst_case_value(SPEC, q).value
    assert res.value <= closed + dominance_tolerance(SPEC, q, res.delta)
    for name, r in res.slack_used.items():
        assert abs(r) <= res.delta * (1 + 1e-9), name
    assert res.slack_used["mass"] == pytest.approx(0.0, abs=1e-12)


def test_infeasible_names_constraint_and_suggestion_works():
    s = from_correlation(1, 1, 2, 6, 1.0)
    grid = GridConfig(n_per_axis=10, slack=0.0, inject_analytic=False)
    with pytest.raises(OracleInfeasible) as exc:
        lp_worst_case(s, 1.3, grid)
    assert exc.value.constraint in ("mean1", "mean2", "second1", "second2", "cross")
    res = lp_worst_case(s, 1.3, GridConfig(n_per_axis=10, slack=exc.value.suggested_slack,
                                           inject_analytic=False))
    assert np.isfinite(res.value)


def test_result_serializes():
    res = lp_worst_case(SPEC, 1.0, GridConfig(n_per_axis=20))
    d = json.loads(res.to_json())
    assert d["value"] == pytest.approx(res.value)
    assert len(d["distribution"]["probs"]) == res.distribution.size


def test_max_prob_below_shrinks_with_correlation():
    grid = GridConfig(n_per_axis=100)
    plateau = [max_prob_below(from_correlation(1, 1, 2, 6, r), 0.5, grid) for r in (0.0, 0.5, 0.9)]
    assert max(plateau) - min(plateau) <= 1e-3
    # near perfect correlation the mass below the floor collapses
    tail = [max_prob_below(from_correlation(1, 1, 2, 6, r), 0.5, grid) for r in (0.99, 0.999, 0.9999)]
    assert min(plateau) > tail[0] > tail[1] > tail[2]
    zero = from_correlation(1, 1, 2, 6, 0.0)
    res = max_prob_below_result(zero, 0.5, grid)
    assert res.distribution.moment_residuals(zero.moment_vector()).max() <= 1e-5
    with pytest.raises(DomainError):
        max_prob_below(SPEC, -1.0, grid)


def test_shifting_bound_orientation():
    s = from_correlation(1, 1, 2, 6, 0.0)
    assert shifting_bound(s) == pytest.approx(1 - math.sqrt(0.2), abs=1e-15)
    assert shifting_bound(s.swapped()) == shifting_bound(s)
    # at rho = 1 every atom of an extremal law sits right of the floor
    one = from_correlation(1, 1, 2, 6, 1.0)
    from bivdro.bivariate import worst_case_distribution
    pts = worst_case_distribution(one, 1.0).points
    assert pts[:, 0].min() >= shifting_bound(one) - 1e-9


def test_dominance_tolerance_at_collinear_kink():
    col = from_correlation(1, 1, 2, 2, -1.0)
    # a variance perturbation of delta gives the constant sum a spread of order sqrt(delta)
    for delta in (1e-6, 1e-8):
        tol = dominance_tolerance(col, 2.0, delta)
        assert 0.5 * math.sqrt(delta) < tol < 10 * math.sqrt(delta)


@pytest.mark.parametrize("rho", [0.999, 0.9999])
def test_prob_below_tracks_residual_chebyshev_bound(rho):
    # X2 >= 0 gives P(X1 <= xi) <= P(X1 - beta X2 <= xi); Cantelli bounds the latter
    s = from_correlation(1, 1, 2, 6, rho)
    cov = s.covariance()
    beta = cov.m12 / cov.m22
    d = s.mu1 - beta * s.mu2 - 0.5
    v = cov.m11 - cov.m12**2 / cov.m22
    cantelli = v / (v + d * d)
    p = max_prob_below(s, 0.5, GridConfig(n_per_axis=200))
    assert 0.8 * cantelli <= p <= cantelli + 1e-3
