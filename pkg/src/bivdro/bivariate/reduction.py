"""Reduction of a two-piece linear loss in w'X to the (s - q)+ form.

max{u1 s + v1, u2 s + v2} = (u2 - u1) (s - q)+ + u1 s + v1,  q = -(v2 - v1)/(u2 - u1),

so the worst case of the left side is a scaled-and-shifted excess bound on
the transformed vector (w1 X1, w2 X2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..moments import MomentSpec, require_valid
from ..scarf import UnivariateSpec, scarf_bound
from .closed_form import worst_case_value


def two_piece(x, u1, u2, v1, v2):
    """max{u1 x + v1, u2 x + v2} evaluated pointwise."""
    x = np.asarray(x, dtype=float)
    return np.maximum(u1 * x + v1, u2 * x + v2)


def two_piece_decomposed(x, u1, u2, v1, v2):
    """Right-hand side of the decomposition identity."""
    x = np.asarray(x, dtype=float)
    d = u2 - u1
    return d * np.maximum(x + (v2 - v1) / d, 0.0) + u1 * x + v1


@dataclass(frozen=True)
class LossReduction:
    scale: float
    offset: float
    reduced_q: float
    reduced_spec: MomentSpec | None  # None when a weight vanishes
    univariate: UnivariateSpec | None = None  # the surviving coordinate, if any
    mean: float = 0.0  # E[w'X]

    def inner_bound(self) -> float:
        """sup E[(w'X - reduced_q)+]."""
        q = self.reduced_q
        if q < 0.0:
            return self.mean - q  # w'X >= 0 > q, so the positive part is inactive
        if self.reduced_spec is not None:
            return worst_case_value(self.reduced_spec, q).value
        if self.univariate is not None:
            return scarf_bound(self.univariate, q).value
        return max(-q, 0.0)

    def evaluate(self) -> float:
        """Worst case of E[max{u1 w'X + v1, u2 w'X + v2}]."""
        return self.scale * self.inner_bound() + self.offset


def reduce_loss(u1, u2, v1, v2, w, spec: MomentSpec) -> LossReduction:
    require_valid(spec)
    if not u1 < u2:
        raise DomainError(
            f"need u1 < u2 (got {u1}, {u2}); equal slopes give a linear loss",
            "u1 < u2",
        )
    w = np.asarray(w, dtype=float)
    if w.shape != (2,) or np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise DomainError("w must be a nonnegative finite 2-vector", "w >= 0")
    mean = float(w[0] * spec.mu1 + w[1] * spec.mu2)
    scale = float(u2 - u1)
    offset = float(u1 * mean + v1)
    reduced_q = float(-(v2 - v1) / (u2 - u1))

    if w[0] > 0.0 and w[1] > 0.0:
        # a, b, c are scale free, so only the means change
        red = MomentSpec(w[0] * spec.mu1, w[1] * spec.mu2, spec.a, spec.b, spec.c)
        return LossReduction(scale, offset, reduced_q, red, None, mean)
    if w[0] > 0.0:
        uni = UnivariateSpec(w[0] * spec.mu1, w[0] ** 2 * spec.sigma11)
        return LossReduction(scale, offset, reduced_q, None, uni, mean)
    if w[1] > 0.0:
        uni = UnivariateSpec(w[1] * spec.mu2, w[1] ** 2 * spec.sigma22)
        return LossReduction(scale, offset, reduced_q, None, uni, mean)
    return LossReduction(scale, offset, reduced_q, None, None, 0.0)


def worst_case_two_piece(u1, u2, v1, v2, w, spec: MomentSpec) -> float:
    if math.isclose(u1, u2):
        raise DomainError("slopes coincide; use the linear expectation", "u1 < u2")
    return reduce_loss(u1, u2, v1, v2, w, spec).evaluate()
