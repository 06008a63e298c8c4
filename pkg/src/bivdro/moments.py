"""Bivariate moment inputs with feasibility checks and parameter conversions.

A :class:`MomentSpec` stores the first two moments of a nonnegative random
vector ``(X1, X2)`` in scaled form::

    E[X1] = mu1,  E[X2] = mu2,
    E[X1^2] = a mu1^2,  E[X2^2] = b mu2^2,  E[X1 X2] = c mu1 mu2.

Specs are plain immutable values; nothing is validated at construction so that
:func:`validate` can report every violated inequality as data.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class MomentSpec:
    mu1: float
    mu2: float
    a: float
    b: float
    c: float

    @property
    def sigma11(self) -> float:
        return self.a * self.mu1 * self.mu1

    @property
    def sigma22(self) -> float:
        return self.b * self.mu2 * self.mu2

    @property
    def sigma12(self) -> float:
        return self.c * self.mu1 * self.mu2

    @property
    def mean_sum(self) -> float:
        return self.mu1 + self.mu2

    def moment_vector(self) -> np.ndarray:
        """Right-hand side ``(1, mu1, mu2, S11, S22, S12)`` of the moment system."""
        return np.array(
            [1.0, self.mu1, self.mu2, self.sigma11, self.sigma22, self.sigma12]
        )

    def covariance(self) -> "CovarianceView":
        return covariance_view(self)

    def swapped(self) -> "MomentSpec":
        """Same law with the coordinates exchanged."""
        return MomentSpec(self.mu2, self.mu1, self.b, self.a, self.c)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "MomentSpec":
        missing = {"mu1", "mu2", "a", "b"} - set(data)
        if missing:
            raise DomainError(f"moment spec missing fields: {sorted(missing)}")
        if ("c" in data) == ("rho" in data):
            raise DomainError("moment spec needs exactly one of 'c' or 'rho'")
        if "rho" in data:
            return from_correlation(
                data["mu1"], data["mu2"], data["a"], data["b"], data["rho"]
            )
        return cls(
            float(data["mu1"]),
            float(data["mu2"]),
            float(data["a"]),
            float(data["b"]),
            float(data["c"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "MomentSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CovarianceView:
    m11: float
    m12: float
    m22: float
    rho: float

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m12

    @property
    def variance_of_sum(self) -> float:
        return self.m11 + 2.0 * self.m12 + self.m22


def covariance_view(spec: MomentSpec) -> CovarianceView:
    m11 = (spec.a - 1.0) * spec.mu1 * spec.mu1
    m22 = (spec.b - 1.0) * spec.mu2 * spec.mu2
    m12 = (spec.c - 1.0) * spec.mu1 * spec.mu2
    scale = (spec.a - 1.0) * (spec.b - 1.0)
    if scale > 0.0:
        rho = (spec.c - 1.0) / math.sqrt(scale)
    else:
        rho = math.nan
    return CovarianceView(m11=m11, m12=m12, m22=m22, rho=rho)


@dataclass(frozen=True)
class Violation:
    invariant: str
    residual: float

    def __str__(self) -> str:
        return f"{self.invariant} violated (residual {self.residual:.3g})"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = ()
    boundary: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def message(self) -> str:
        return "; ".join(str(v) for v in self.violations) or "ok"


def _tol(lhs: float, rhs: float) -> float:
    return FEAS_TOL * max(1.0, abs(lhs), abs(rhs))


def validate(spec: MomentSpec) -> ValidationResult:
    """Check the moment inequalities; never raises on finite or non-finite input."""
    fields = {k: getattr(spec, k) for k in ("mu1", "mu2", "a", "b", "c")}
    try:
        fields = {k: float(v) for k, v in fields.items()}
    except (TypeError, ValueError):
        return ValidationResult((Violation("numeric inputs", math.nan),))
    bad = [k for k, v in fields.items() if not math.isfinite(v)]
    if bad:
        return ValidationResult(
            tuple(Violation(f"{k} finite", math.nan) for k in bad)
        )
    mu1, mu2, a, b, c = (fields[k] for k in ("mu1", "mu2", "a", "b", "c"))

    violations: list[Violation] = []
    boundary = False

    # strict inequalities: reject on the boundary itself, flag near-boundary values
    for name, lhs, rhs in (
        ("mu1 > 0", mu1, 0.0),
        ("mu2 > 0", mu2, 0.0),
        ("a > 1", a, 1.0),
        ("b > 1", b, 1.0),
    ):
        if not lhs > rhs:
            violations.append(Violation(name, lhs - rhs))
        elif lhs - rhs <= _tol(lhs, rhs):
            boundary = True

    for name, lhs, rhs in (
        ("c >= 0", c, 0.0),
        ("(a-1)(b-1) >= (c-1)^2", (a - 1.0) * (b - 1.0), (c - 1.0) ** 2),
        ("c^2 <= a*b", a * b, c * c),
    ):
        tol = _tol(lhs, rhs)
        if lhs < rhs - tol:
            violations.append(Violation(name, lhs - rhs))
        elif abs(lhs - rhs) <= tol:
            boundary = True

    return ValidationResult(tuple(violations), boundary)


def require_valid(spec: MomentSpec) -> ValidationResult:
    """Raise :class:`DomainError` naming the first violated inequality."""
    result = validate(spec)
    if not result.ok:
        first = result.violations[0]
        raise DomainError(result.message(), invariant=first.invariant)
    return result


def from_correlation(
    mu1: float, mu2: float, a: float, b: float, rho: float
) -> MomentSpec:
    """Build a spec from the correlation coefficient instead of ``c``."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho={rho} outside [-1, 1]", invariant="-1 <= rho <= 1")
    if not (a > 1.0 and b > 1.0):
        raise DomainError(
            "correlation is undefined unless a > 1 and b > 1",
            invariant="a > 1" if not a > 1.0 else "b > 1",
        )
    c = 1.0 + rho * math.sqrt((a - 1.0) * (b - 1.0))
    if c < 0.0:
        if c >= -FEAS_TOL:
            c = 0.0
        else:
            floor = -1.0 / math.sqrt((a - 1.0) * (b - 1.0))
            raise DomainError(
                f"rho={rho} gives c={c:.6g} < 0; smallest admissible rho is {floor:.6g}",
                invariant="c >= 0",
            )
    return MomentSpec(float(mu1), float(mu2), float(a), float(b), c)


def pooled_moments(spec: MomentSpec) -> tuple[float, float]:
    """Mean and second moment of ``X1 + X2``."""
    mu_bar = spec.mu1 + spec.mu2
    sigma_bar = spec.sigma11 + spec.sigma22 + 2.0 * spec.sigma12
    return mu_bar, sigma_bar
