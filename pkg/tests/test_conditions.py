import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bivdro import DomainError
from bivdro.bivariate import (
    Condition,
    ThetaCase,
    aux_quantities,
    branch_quantities,
    classify_condition,
    condition_intervals,
    direct_flags,
    theta_case,
    worst_case_value,
)
from bivdro.moments import MomentSpec, from_correlation
from bivdro.sampling import random_instance


def _generic(rng, n):
    out = []
    while len(out) < n:
        s, q = random_instance(rng)
        a, b, c = s.a, s.b, s.c
        x = aux_quantities(s)
        if min(abs(a - c), abs(b - c), abs(x.C_bar), abs(x.C_under)) > 1e-3:
            out.append(s)
    return out


def test_aux_identities(rng):
    for s in _generic(rng, 500):
        a, b, c, m1, m2 = s.a, s.b, s.c, s.mu1, s.mu2
        x = aux_quantities(s)
        det_p = (a - 1) * (b - 1) - (c - 1) ** 2
        lhs = a * m1 + c * m2 - x.B_bar
        assert lhs == pytest.approx((a * x.C_bar**2 + det_p * m2**2) / (2 * (a - 1) * x.C_bar),
                                    rel=1e-9, abs=1e-9)
        assert x.A_bar - x.A_under == pytest.approx(
            (a * b - c * c) / (2 * (a - c) * (b - c)) * (x.C_under - x.C_bar), rel=1e-9, abs=1e-9)
        assert x.B_bar - x.B_under == pytest.approx(
            (x.C_bar - x.C_under) * x.E / (2 * x.C_bar * x.C_under), rel=1e-9, abs=1e-9)


def test_offset_identity_needs_mu2_inside_the_bracket():
    s = from_correlation(1, 1, 2, 6, 0.3)
    a, b, c, m2 = s.a, s.b, s.c, s.mu2
    x = aux_quantities(s)
    printed = (a * x.C_bar**2 + (a - 1) * (b - 1) - (c - 1) ** 2) * m2**2 / ((a - 1) * x.C_bar)
    assert abs(a * s.mu1 + c * m2 - x.B_bar - printed) > 0.1


@pytest.mark.parametrize(
    "spec, case",
    [
        (MomentSpec(1, 1, 3, 1.5, 2), ThetaCase.A_GT_C_GE_B),
        (MomentSpec(1, 1, 1.5, 3, 2), ThetaCase.B_GT_C_GE_A),
        (MomentSpec(1, 1, 3, 3, 3), ThetaCase.POOLED),
        (from_correlation(1, 1, 2, 2, -1.0), ThetaCase.COLLINEAR),
        (from_correlation(3, 1, 1.5, 3, -0.8), ThetaCase.CBAR_GE_CUND_NEG),
        (from_correlation(1, 3, 3, 1.5, -0.8), ThetaCase.CBAR_LT_CUND_NEG),
        (from_correlation(1, 1, 6, 2, -0.4), ThetaCase.CBAR_GE_CUND_NONNEG),
        (from_correlation(1, 1, 2, 6, 0.3), ThetaCase.CBAR_LT_CUND_NONNEG),
    ],
)
def test_theta_cases(spec, case):
    assert theta_case(spec) is case


def _spec_strategy():
    return st.tuples(
        st.floats(0.1, 10), st.floats(0.1, 10), st.floats(1.001, 10), st.floats(1.001, 10),
        st.floats(-1, 1), st.floats(0, 60),
    )


@settings(max_examples=300, deadline=None)
@given(_spec_strategy())
def test_routing_agrees_with_direct_inequalities(t):
    mu1, mu2, a, b, rho, q = t
    try:
        s = from_correlation(mu1, mu2, a, b, rho)
    except DomainError:
        return
    rep = classify_condition(s, q)
    if rep.special:
        return
    flags = direct_flags(branch_quantities(s, q))
    if rep.on_boundary:
        assert sum(flags) >= 1
    else:
        assert sum(flags) == 1 and flags[int(rep.condition) - 1]


def test_intervals_tile_the_half_line(rng):
    for _ in range(300):
        s, _q = random_instance(rng)
        ivs = [iv for iv in condition_intervals(s).values() if not iv.empty]
        ivs.sort(key=lambda iv: iv.lo)
        assert ivs[0].lo == 0.0 and ivs[0].lo_closed
        assert math.isinf(ivs[-1].hi)
        for left, right in zip(ivs, ivs[1:]):
            assert left.hi == right.lo
            assert left.hi_closed != right.lo_closed  # each endpoint belongs to exactly one side


def test_swap_symmetry(rng):
    for _ in range(300):
        s, q = random_instance(rng)
        c1 = classify_condition(s, q).condition
        c2 = classify_condition(s.swapped(), q).condition
        assert c2 is c1.swapped()
        assert worst_case_value(s, q).value == pytest.approx(
            worst_case_value(s.swapped(), q).value, rel=1e-10)


def test_value_continuous_across_interval_endpoints(rng):
    for _ in range(200):
        s, _q = random_instance(rng)
        for iv in condition_intervals(s).values():
            if iv.empty or not math.isfinite(iv.hi) or iv.hi <= 0.0:
                continue
            e = iv.hi
            h = 1e-7 * max(1.0, e)
            lo, hi = worst_case_value(s, e - h).value, worst_case_value(s, e + h).value
            assert abs(lo - hi) <= 4 * h  # value is 1-Lipschitz in q
            assert classify_condition(s, e).on_boundary


def test_report_fields_and_bad_q():
    s = from_correlation(1, 1, 2, 6, 0.3)
    rep = classify_condition(s, 2.0)
    assert rep.condition is Condition.C2
    d = rep.to_dict()
    assert d["condition"] == "C2" and set(d) >= {"q_a", "q_b", "q_c", "zeta_a", "zeta_b"}
    for bad in (-1.0, math.nan, math.inf):
        with pytest.raises(DomainError):
            classify_condition(s, bad)


def test_condition_swap_map():
    assert Condition.C2.swapped() is Condition.C3
    assert Condition.C4.swapped() is Condition.C5
    assert Condition.C1.swapped() is Condition.C1 and Condition.C6.swapped() is Condition.C6
