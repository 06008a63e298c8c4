"""Univariate worst-case excess bound under mean and second-moment information.

For X >= 0 with E[X] = mu and E[X^2] = sigma2 the supremum of E[(X - q)+]
is attained by a two-point law; the classic robust newsvendor order follows
from it in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .distributions import DiscreteDistribution
from .errors import DomainError

DEGENERATE_TOL = 1e-14


class Regime(str, enum.Enum):
    SMALL_Q = "SmallQ"
    LARGE_Q = "LargeQ"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class UnivariateSpec:
    mu: float
    sigma2: float  # second moment, not variance

    @property
    def variance(self) -> float:
        return self.sigma2 - self.mu * self.mu

    def check(self) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma2)):
            raise DomainError("univariate moments must be finite", "finite")
        if not self.mu > 0.0:
            raise DomainError(f"mu={self.mu} must be > 0", "mu > 0")
        if self.variance < -DEGENERATE_TOL * max(1.0, self.sigma2):
            raise DomainError(
                f"sigma2={self.sigma2} < mu^2={self.mu ** 2}", "sigma2 >= mu^2"
            )

    def is_degenerate(self) -> bool:
        return self.variance <= DEGENERATE_TOL * max(1.0, self.sigma2)


@dataclass(frozen=True)
class ScarfResult:
    value: float
    distribution: DiscreteDistribution
    regime: Regime


def _check_q(q: float) -> None:
    if not (math.isfinite(q) and q >= 0.0):
        raise DomainError(f"q={q} must be a finite value >= 0", "q >= 0")


def scarf_bound(uspec: UnivariateSpec, q: float) -> ScarfResult:
    uspec.check()
    _check_q(q)
    mu, sig = uspec.mu, uspec.sigma2

    if uspec.is_degenerate():
        dist = DiscreteDistribution([[mu]], [1.0])
        return ScarfResult(max(mu - q, 0.0), dist, Regime.DEGENERATE)

    if q <= sig / (2.0 * mu):
        top = sig / mu
        p_top = mu * mu / sig
        dist = DiscreteDistribution([[0.0], [top]], [1.0 - p_top, p_top])
        return ScarfResult(mu - q * mu * mu / sig, dist, Regime.SMALL_Q)

    big_q = math.sqrt(max(q * q - 2.0 * mu * q + sig, 0.0))
    lo, hi = q - big_q, q + big_q
    p_lo = 0.5 + (q - mu) / (2.0 * big_q)
    dist = DiscreteDistribution([[lo], [hi]], [p_lo, 1.0 - p_lo])
    return ScarfResult(0.5 * (big_q - q + mu), dist, Regime.LARGE_Q)


def scarf_value(mu: float, sigma2: float, q: float) -> float:
    """Shorthand returning only the bound."""
    return scarf_bound(UnivariateSpec(mu, sigma2), q).value


def _check_eta(eta: float) -> None:
    if not (0.0 < eta < 1.0):
        raise DomainError(f"eta={eta} outside (0, 1)", "0 < eta < 1")


def scarf_order(uspec: UnivariateSpec, eta: float) -> float:
    """Minimizer of ``scarf_bound(q) + (1 - eta) q`` over q >= 0."""
    uspec.check()
    _check_eta(eta)
    if uspec.is_degenerate():
        return uspec.mu  # point mass: slope is -eta below mu, 1 - eta above
    var = uspec.variance
    if eta <= var / uspec.sigma2:
        return 0.0
    return uspec.mu + 0.5 * math.sqrt(var) * (2.0 * eta - 1.0) / math.sqrt(eta * (1.0 - eta))


def scarf_objective(uspec: UnivariateSpec, eta: float, q: float) -> float:
    return scarf_bound(uspec, q).value + (1.0 - eta) * q


@dataclass(frozen=True)
class UnivariateDual:
    """Quadratic ``y0 + y1 s + y2 s^2`` dominating 0 and (s - q) on s >= 0."""

    y0: float
    y1: float
    y2: float

    def __call__(self, s):
        return self.y0 + self.y1 * s + self.y2 * s * s

    def objective(self, mu: float, sigma2: float) -> float:
        return self.y0 + self.y1 * mu + self.y2 * sigma2


def scarf_dual(uspec: UnivariateSpec, q: float) -> UnivariateDual:
    """Closed-form optimal dual quadratic for the univariate bound."""
    uspec.check()
    _check_q(q)
    if uspec.is_degenerate():
        raise DomainError("no finite dual for a point mass", "sigma2 > mu^2")
    mu, sig = uspec.mu, uspec.sigma2
    if q <= sig / (2.0 * mu):
        s0 = sig / mu
        gamma = q / (s0 * s0)
        return UnivariateDual(0.0, 1.0 - 2.0 * q / s0, gamma)
    big_q = math.sqrt(q * q - 2.0 * mu * q + sig)
    # (s - q + Q)^2 / (4Q)
    r = big_q - q
    return UnivariateDual(r * r / (4.0 * big_q), r / (2.0 * big_q), 1.0 / (4.0 * big_q))
