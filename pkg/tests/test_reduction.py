import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bivdro import DomainError
from bivdro.bivariate import (
    reduce_loss,
    two_piece,
    two_piece_decomposed,
    worst_case_two_piece,
    worst_case_value,
)
from bivdro.moments import from_correlation
from bivdro.newsvendor import multivariate_upper_bound
from bivdro.oracle import GridConfig, lp_expectation
from bivdro.scarf import UnivariateSpec, scarf_value

finite = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=500, deadline=None)
@given(x=finite, u1=finite, du=st.floats(1e-3, 20), v1=finite, v2=finite)
def test_pointwise_identity(x, u1, du, v1, v2):
    u2 = u1 + du
    lhs = two_piece(x, u1, u2, v1, v2)
    rhs = two_piece_decomposed(x, u1, u2, v1, v2)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(u2 * x), abs(v2)) * 10


def test_newsvendor_loss_is_a_special_case():
    s = from_correlation(1, 1, 2, 6, 0.3)
    for q in (0.5, 2.0, 6.0):
        assert worst_case_two_piece(0, 1, 0, -q, [1, 1], s) == pytest.approx(
            worst_case_value(s, q).value, rel=1e-14)


def test_weights_rescale_means_only():
    s = from_correlation(1, 2, 2, 6, 0.3)
    red = reduce_loss(0.5, 2.0, 1.0, -3.0, [2.0, 0.5], s)
    assert red.reduced_spec.mu1 == 2.0 and red.reduced_spec.mu2 == 1.0
    assert (red.reduced_spec.a, red.reduced_spec.b, red.reduced_spec.c) == (s.a, s.b, s.c)
    assert red.reduced_q == pytest.approx(4.0 / 1.5)
    assert red.evaluate() == pytest.approx(1.5 * worst_case_value(red.reduced_spec, 4.0 / 1.5).value
                                           + 0.5 * 3.0 + 1.0)


def test_negative_reduced_order_is_linear():
    s = from_correlation(1, 1, 2, 6, 0.3)
    red = reduce_loss(0.0, 1.0, 0.0, 2.0, [1, 1], s)  # max{0, w'X + 2} = w'X + 2
    assert red.evaluate() == pytest.approx(4.0)


def test_zero_weight_falls_back_to_univariate():
    s = from_correlation(1, 2, 2, 6, 0.3)
    red = reduce_loss(0, 1, 0, -2.0, [0.0, 1.0], s)
    assert red.reduced_spec is None
    assert red.evaluate() == pytest.approx(scarf_value(2.0, s.sigma22, 2.0))
    assert reduce_loss(0, 1, 0, -2.0, [0.0, 0.0], s).evaluate() == 0.0


def test_reduction_rejects_bad_slopes_and_weights():
    s = from_correlation(1, 1, 2, 6, 0.3)
    with pytest.raises(DomainError):
        reduce_loss(1.0, 1.0, 0, 0, [1, 1], s)
    with pytest.raises(DomainError):
        reduce_loss(0, 1, 0, 0, [-1, 1], s)
    with pytest.raises(DomainError):
        worst_case_two_piece(1.0, 1.0, 0, 0, [1, 1], s)


def test_two_piece_against_oracle():
    s = from_correlation(1.5, 0.7, 2.5, 3.0, -0.2)
    w = np.array([0.8, 1.3])
    u1, u2, v1, v2 = 0.3, 1.4, 0.0, -2.2
    bound = worst_case_two_piece(u1, u2, v1, v2, w, s)
    res = lp_expectation(s, lambda p: two_piece(p @ w, u1, u2, v1, v2),
                         GridConfig(n_per_axis=200), pad=2.0 / w.min())
    assert res.value <= bound * (1 + 1e-6)
    assert res.value == pytest.approx(bound, rel=0.01)


def test_decomposition_bound_single_block_is_exact():
    s = from_correlation(1, 1, 2, 6, 0.3)
    res = multivariate_upper_bound([s], 0.0, 1.0, 0.0, -2.0, [1.0, 1.0])
    assert res.value == pytest.approx(worst_case_value(s, 2.0).value, rel=1e-12)
    assert res.converged


def test_decomposition_bound_dominates_and_is_split_optimal():
    s = from_correlation(1, 2, 2, 3, 0.4)
    blocks = [UnivariateSpec(1.0, s.sigma11), UnivariateSpec(2.0, s.sigma22)]
    q = 3.5
    res = multivariate_upper_bound(blocks, 0.0, 1.0, 0.0, -q, [1.0, 1.0])
    assert res.converged
    assert res.splits.sum() == pytest.approx(q)
    # dropping the cross moment can only loosen the bound
    assert res.value >= worst_case_value(s, q).value - 1e-9
    # no split on a fine grid does better
    grid = np.linspace(-5, q + 5, 2001)
    vals = []
    for t in grid:
        f1 = scarf_value(1.0, s.sigma11, t) if t >= 0 else 1.0 - t
        f2 = scarf_value(2.0, s.sigma22, q - t) if q - t >= 0 else 2.0 - (q - t)
        vals.append(f1 + f2)
    assert res.value <= min(vals) + 1e-7


def test_decomposition_bound_mixed_blocks():
    s = from_correlation(1, 1, 2, 6, 0.3)
    blocks = [s, UnivariateSpec(1.5, 3.0)]
    res = multivariate_upper_bound(blocks, 0.2, 1.0, 0.5, -3.0, [1.0, 0.5, 2.0])
    assert res.converged and np.isfinite(res.value)
    with pytest.raises(DomainError):
        multivariate_upper_bound(blocks, 0.2, 1.0, 0.5, -3.0, [1.0, 0.5])
    with pytest.raises(DomainError):
        multivariate_upper_bound([], 0.0, 1.0, 0.0, 0.0, [])
