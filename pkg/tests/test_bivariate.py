import math

import numpy as np
import pytest

from bivdro import DomainError
from bivdro.bivariate import (
    Condition,
    check_distribution,
    value_on_line,
    worst_case,
    worst_case_value,
)
from bivdro.errors import ConsistencyError
from bivdro.distributions import DiscreteDistribution
from bivdro.moments import MomentSpec, from_correlation
from bivdro.sampling import random_instance

# closed forms, cross-checked against a HiGHS LP over a 121 x 121 grid plus the
# extremal support (agreement 6e-12 or better)
FROZEN = [
    ((1, 1, 2, 6, 0.3), 0.5, 1.7470581291686238, Condition.C1),
    ((1, 1, 2, 6, 0.3), 2.0, 1.115144582576332, Condition.C2),
    ((1, 1, 6, 2, -0.4), 2.0, 0.8825509664689499, Condition.C3),
    ((3, 1, 1.5, 3, -0.8), 7.0, 0.13489469059747097, Condition.C4),
    ((1, 3, 3, 1.5, -0.8), 7.0, 0.13489469059747097, Condition.C5),
    ((1, 1, 2, 6, 0.3), 6.0, 0.4156593709844456, Condition.C6),
    ((3, 1, 1.5, 3, -0.8), 4.5, 0.44821200218844703, Condition.C6),
    ((1, 1, 2, 6, 0.0), 1.0, 1.4545454545454546, Condition.C1),
    ((2, 1, 2, 3, -0.6), 2.0, 1.4396564458447725, Condition.C3),
    ((1, 1, 2, 2, -0.8), 2.0, 0.3162277660168379, Condition.C6),
]


@pytest.mark.parametrize("args, q, value, cond", FROZEN)
def test_frozen_values(args, q, value, cond):
    v, c = worst_case_value(from_correlation(*args), q)
    assert c is cond
    assert v == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("args, q, value, cond", FROZEN)
def test_extremal_law_is_feasible_and_attains(args, q, value, cond):
    spec = from_correlation(*args)
    wc = worst_case(spec, q)
    check_distribution(spec, q, wc.distribution, wc.value)
    assert np.all(wc.distribution.points >= 0.0)
    assert wc.distribution.size <= 4  # at most three atoms, four for the pooled product law


def test_c1_at_zero_order_is_the_mean_sum():
    s = from_correlation(1, 2, 3, 4, 0.2)
    assert worst_case_value(s, 0.0).value == pytest.approx(3.0)


def test_c6_equals_pooled_univariate(rng):
    hits = 0
    for _ in range(2000):
        s, q = random_instance(rng)
        v, c = worst_case_value(s, q)
        if c is Condition.C6:
            hits += 1
            assert v == pytest.approx(value_on_line(s, q), rel=1e-12)
    assert hits > 100


def test_bounds_between_jensen_and_mean(rng):
    for _ in range(2000):
        s, q = random_instance(rng)
        v = worst_case_value(s, q).value
        assert max(s.mean_sum - q, 0.0) - 1e-12 <= v <= s.mean_sum + 1e-12
        # knowing only the moments of the sum is a relaxation
        assert v <= value_on_line(s, q) * (1 + 1e-12) + 1e-12


def test_decreasing_and_convex_in_q():
    s = from_correlation(1, 1, 2, 6, 0.3)
    qs = np.linspace(0, 12, 1201)
    v = np.array([worst_case_value(s, q).value for q in qs])
    d = np.diff(v)
    assert np.all(d <= 1e-12)
    assert np.all(np.diff(d) >= -1e-10)
    assert np.all(d >= -(qs[1] - qs[0]) - 1e-12)  # slope in [-1, 0]


def test_pooled_and_collinear_specials():
    pooled = MomentSpec(1.0, 2.0, 2.5, 2.5, 2.5)
    wc = worst_case(pooled, 4.0)
    check_distribution(pooled, 4.0, wc.distribution, wc.value)
    assert wc.value == pytest.approx(value_on_line(pooled, 4.0), rel=1e-12)

    col = from_correlation(1, 1, 2, 2, -1.0)  # X1 + X2 = 2 almost surely
    for q in (0.5, 2.0, 3.0):
        wc = worst_case(col, q)
        assert wc.value == pytest.approx(max(2.0 - q, 0.0), abs=1e-12)
        check_distribution(col, q, wc.distribution, wc.value)


def test_perfect_positive_correlation():
    s = from_correlation(1, 1, 2, 6, 1.0)
    for q in (0.3, 1.5, 4.0, 9.0):
        wc = worst_case(s, q)
        check_distribution(s, q, wc.distribution, wc.value)


def test_check_distribution_rejects():
    s = from_correlation(1, 1, 2, 6, 0.3)
    bad = DiscreteDistribution([[1.0, 1.0]], [1.0])
    with pytest.raises(ConsistencyError):
        check_distribution(s, 1.0, bad, 1.0)
    wc = worst_case(s, 1.0)
    with pytest.raises(ConsistencyError):
        check_distribution(s, 1.0, wc.distribution, wc.value + 1e-3)


def test_invalid_inputs():
    with pytest.raises(DomainError):
        worst_case_value(MomentSpec(1, 1, 0.5, 2, 1), 1.0)
    with pytest.raises(DomainError):
        worst_case_value(from_correlation(1, 1, 2, 6, 0), -0.1)
    with pytest.raises(DomainError):
        worst_case_value(from_correlation(1, 1, 2, 6, 0), math.inf)
