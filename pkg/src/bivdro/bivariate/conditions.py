"""Six-way partition of the order quantity q for the bivariate excess bound.

Two independent routes decide which closed form applies:

* the *interval router* depends on (a, b, c, mu) only through a case label
  and a handful of breakpoints (A, B below), and maps q to a condition by
  interval membership; this is the authoritative route;
* the *direct flags* evaluate the defining inequalities in Q_a, Q_b,
  zeta_a, zeta_b at the given q.

``classify_condition`` runs both and raises :class:`ConsistencyError` when
they disagree by more than the tie tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from ..errors import ConsistencyError, DomainError
from ..moments import MomentSpec, require_valid

RADICAND_TOL = 1e-12
TIE_TOL = 1e-10
POOLED_TOL = 1e-12


class Condition(enum.IntEnum):
    C1 = 1
    C2 = 2
    C3 = 3
    C4 = 4
    C5 = 5
    C6 = 6

    def swapped(self) -> "Condition":
        """Image under exchanging the two coordinates."""
        return _SWAP[self]


_SWAP = {
    Condition.C1: Condition.C1,
    Condition.C2: Condition.C3,
    Condition.C3: Condition.C2,
    Condition.C4: Condition.C5,
    Condition.C5: Condition.C4,
    Condition.C6: Condition.C6,
}


class ThetaCase(str, enum.Enum):
    """Parameter regimes that fix the layout of the q-intervals."""

    A_GT_C_GE_B = "a>c>=b"
    B_GT_C_GE_A = "b>c>=a"
    CBAR_GE_CUND_NONNEG = "a,b>c; Cbar>=Cund>=0"
    CBAR_GE_CUND_NEG = "a,b>c; Cbar>=Cund, Cund<0"
    CBAR_LT_CUND_NONNEG = "a,b>c; Cbar<Cund, Cbar>=0"
    CBAR_LT_CUND_NEG = "a,b>c; Cbar<Cund, Cbar<0"
    POOLED = "a=b=c"  # perfectly proportional coordinates
    COLLINEAR = "var(X1+X2)=0"

    @property
    def number(self) -> int | None:
        order = list(ThetaCase)
        idx = order.index(self)
        return idx + 1 if idx < 6 else None


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    @property
    def empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def __contains__(self, q: float) -> bool:
        if self.empty:
            return False
        above = q >= self.lo if self.lo_closed else q > self.lo
        below = q <= self.hi if self.hi_closed else q < self.hi
        return above and below

    def endpoints(self) -> tuple[float, ...]:
        """Finite endpoints (both of them even if open)."""
        if self.empty:
            return ()
        return tuple(x for x in (self.lo, self.hi) if math.isfinite(x))

    def to_dict(self) -> dict:
        return {
            "lo": self.lo if math.isfinite(self.lo) else None,
            "hi": self.hi if math.isfinite(self.hi) else None,
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }

    def __str__(self) -> str:
        if self.empty:
            return "{}"
        return "%s%.6g, %.6g%s" % (
            "[" if self.lo_closed else "(",
            self.lo,
            self.hi,
            "]" if self.hi_closed else ")",
        )


EMPTY = Interval(0.0, 0.0, False, False)
INF = math.inf


@dataclass(frozen=True)
class Aux:
    A_bar: float
    A_under: float
    B_bar: float
    B_under: float
    C_bar: float
    C_under: float
    D_bar: float
    D_under: float
    E: float

    def to_dict(self) -> dict:
        return {k: (v if math.isfinite(v) else None) for k, v in self.__dict__.items()}


def _div(num: float, den: float) -> float:
    return num / den if den != 0.0 else math.nan


def aux_quantities(spec: MomentSpec) -> Aux:
    mu1, mu2, a, b, c = spec.mu1, spec.mu2, spec.a, spec.b, spec.c
    det_ab = a * b - c * c
    A_bar = _div(det_ab * mu2, 2.0 * (a - c))
    A_under = _div(det_ab * mu1, 2.0 * (b - c))
    C_bar = (a - 1.0) * mu1 + (c - 1.0) * mu2
    C_under = (c - 1.0) * mu1 + (b - 1.0) * mu2
    D_bar = (a - 1.0) * (a * mu1 + c * mu2)
    D_under = (b - 1.0) * (c * mu1 + b * mu2)
    B_bar = A_bar + _div(D_bar * (C_bar - C_under), 2.0 * (a - c) * C_bar)
    B_under = A_under + _div(D_under * (C_under - C_bar), 2.0 * (b - c) * C_under)
    E = (
        (a - 1.0) * c * mu1 * mu1
        + (a * b - a - b + c * c) * mu1 * mu2
        + (b - 1.0) * c * mu2 * mu2
    )
    return Aux(A_bar, A_under, B_bar, B_under, C_bar, C_under, D_bar, D_under, E)


def _sqrt_radicand(value: float, scale: float, name: str) -> tuple[float, bool]:
    """sqrt with tiny negative radicands clamped; returns (root, clamped)."""
    if value >= 0.0:
        return math.sqrt(value), False
    if value >= -RADICAND_TOL * max(1.0, scale):
        return 0.0, True
    raise ConsistencyError(f"negative radicand for {name}: {value:.3g}")


@dataclass(frozen=True)
class BranchQuantities:
    q: float
    q_a: float
    q_b: float
    q_c: float
    zeta_a: float
    zeta_b: float
    clamped: bool


def branch_quantities(spec: MomentSpec, q: float) -> BranchQuantities:
    mu1, mu2, a, b, c = spec.mu1, spec.mu2, spec.a, spec.b, spec.c
    det_ab = a * b - c * c
    ra = q * q - 2.0 * q * (a - c) / (a - 1.0) * mu2 + det_ab / (a - 1.0) * mu2 * mu2
    rb = q * q - 2.0 * q * (b - c) / (b - 1.0) * mu1 + det_ab / (b - 1.0) * mu1 * mu1
    rc = (
        q * q
        - 2.0 * q * (mu1 + mu2)
        + a * mu1 * mu1
        + b * mu2 * mu2
        + 2.0 * c * mu1 * mu2
    )
    scale = q * q + spec.sigma11 + spec.sigma22 + abs(spec.sigma12)
    qa, ca = _sqrt_radicand(ra, scale, "Q_a")
    qb, cb = _sqrt_radicand(rb, scale, "Q_b")
    qc, cc = _sqrt_radicand(rc, scale, "Q_c")
    return BranchQuantities(
        q=q,
        q_a=qa,
        q_b=qb,
        q_c=qc,
        zeta_a=a * mu1 + c * mu2 - q,
        zeta_b=c * mu1 + b * mu2 - q,
        clamped=ca or cb or cc,
    )


def direct_flags(bq: BranchQuantities) -> tuple[bool, ...]:
    """Defining inequalities of the six conditions, evaluated exactly."""
    q, qa, qb, za, zb = bq.q, bq.q_a, bq.q_b, bq.zeta_a, bq.zeta_b
    return (
        qa >= q and qb >= q,
        qb < q and qb <= zb,
        qa < q and qa <= za,
        qb < q and qb <= -zb,
        qa < q and qa <= -za,
        qa > abs(za) and qb > abs(zb),
    )


def _relaxed_flag(cond: Condition, bq: BranchQuantities, tol: float) -> bool:
    q, qa, qb, za, zb = bq.q, bq.q_a, bq.q_b, bq.zeta_a, bq.zeta_b
    if cond is Condition.C1:
        return qa >= q - tol and qb >= q - tol
    if cond is Condition.C2:
        return qb < q + tol and qb <= zb + tol
    if cond is Condition.C3:
        return qa < q + tol and qa <= za + tol
    if cond is Condition.C4:
        return qb < q + tol and qb <= -zb + tol
    if cond is Condition.C5:
        return qa < q + tol and qa <= -za + tol
    return qa > abs(za) - tol and qb > abs(zb) - tol


def is_pooled(spec: MomentSpec) -> bool:
    a, b, c = spec.a, spec.b, spec.c
    return abs(a - c) <= POOLED_TOL * a and abs(b - c) <= POOLED_TOL * b


def is_collinear(spec: MomentSpec) -> bool:
    """X1 + X2 has (numerically) zero variance."""
    mu_bar = spec.mu1 + spec.mu2
    sigma_bar = spec.sigma11 + spec.sigma22 + 2.0 * spec.sigma12
    var = sigma_bar - mu_bar * mu_bar
    return var <= POOLED_TOL * sigma_bar


def theta_case(spec: MomentSpec, aux: Aux | None = None) -> ThetaCase:
    if is_pooled(spec):
        return ThetaCase.POOLED
    if is_collinear(spec):
        return ThetaCase.COLLINEAR
    a, b, c = spec.a, spec.b, spec.c
    if a > c >= b:
        return ThetaCase.A_GT_C_GE_B
    if b > c >= a:
        return ThetaCase.B_GT_C_GE_A
    if not (a > c and b > c):
        raise DomainError(f"c={c} exceeds both a={a} and b={b}", "(a-1)(b-1) >= (c-1)^2")
    aux = aux or aux_quantities(spec)
    if aux.C_bar >= aux.C_under:
        if aux.C_under >= 0.0:
            return ThetaCase.CBAR_GE_CUND_NONNEG
        return ThetaCase.CBAR_GE_CUND_NEG
    if aux.C_bar >= 0.0:
        return ThetaCase.CBAR_LT_CUND_NONNEG
    return ThetaCase.CBAR_LT_CUND_NEG


def condition_intervals(
    spec: MomentSpec, case: ThetaCase | None = None, aux: Aux | None = None
) -> dict[Condition, Interval]:
    """q-interval of every condition for the given moments (empty ones included)."""
    aux = aux or aux_quantities(spec)
    case = case or theta_case(spec, aux)
    iv = {cond: EMPTY for cond in Condition}
    Ab, Au, Bb, Bu = aux.A_bar, aux.A_under, aux.B_bar, aux.B_under

    if case in (ThetaCase.A_GT_C_GE_B, ThetaCase.CBAR_GE_CUND_NONNEG):
        iv[Condition.C1] = Interval(0.0, Ab, True, True)
        iv[Condition.C3] = Interval(Ab, Bb, False, True)
        iv[Condition.C6] = Interval(Bb, INF, False, False)
    elif case in (ThetaCase.B_GT_C_GE_A, ThetaCase.CBAR_LT_CUND_NONNEG):
        iv[Condition.C1] = Interval(0.0, Au, True, True)
        iv[Condition.C2] = Interval(Au, Bu, False, True)
        iv[Condition.C6] = Interval(Bu, INF, False, False)
    elif case is ThetaCase.CBAR_GE_CUND_NEG:
        iv[Condition.C1] = Interval(0.0, Ab, True, True)
        iv[Condition.C3] = Interval(Ab, Bb, False, True)
        iv[Condition.C6] = Interval(Bb, Bu, False, False)
        iv[Condition.C4] = Interval(Bu, INF, True, False)
    elif case is ThetaCase.CBAR_LT_CUND_NEG:
        iv[Condition.C1] = Interval(0.0, Au, True, True)
        iv[Condition.C2] = Interval(Au, Bu, False, True)
        iv[Condition.C6] = Interval(Bu, Bb, False, False)
        iv[Condition.C5] = Interval(Bb, INF, True, False)
    elif case is ThetaCase.POOLED:
        # small-q / large-q regimes of the pooled univariate bound
        mu_bar = spec.mu1 + spec.mu2
        sigma_bar = spec.sigma11 + spec.sigma22 + 2.0 * spec.sigma12
        split = sigma_bar / (2.0 * mu_bar)
        iv[Condition.C1] = Interval(0.0, split, True, True)
        iv[Condition.C6] = Interval(split, INF, False, False)
    else:  # collinear: the sum is the constant mu1 + mu2
        mu_bar = spec.mu1 + spec.mu2
        iv[Condition.C1] = Interval(0.0, mu_bar, True, True)
        iv[Condition.C6] = Interval(mu_bar, INF, False, False)
    return iv


@dataclass(frozen=True)
class ConditionReport:
    condition: Condition
    q: float
    q_a: float
    q_b: float
    q_c: float
    zeta_a: float
    zeta_b: float
    case_label: ThetaCase
    interval_table: dict = field(repr=False)
    aux: Aux = field(repr=False)
    direct: tuple[bool, ...] = ()
    on_boundary: bool = False
    clamped: bool = False

    @property
    def special(self) -> bool:
        """True for the pooled and collinear cases that bypass the partition."""
        return self.case_label in (ThetaCase.POOLED, ThetaCase.COLLINEAR)

    def to_dict(self) -> dict:
        return {
            "condition": f"C{int(self.condition)}",
            "q": self.q,
            "q_a": self.q_a,
            "q_b": self.q_b,
            "q_c": self.q_c,
            "zeta_a": self.zeta_a,
            "zeta_b": self.zeta_b,
            "case_label": self.case_label.value,
            "interval_table": {
                f"C{int(k)}": v.to_dict() for k, v in self.interval_table.items()
            },
            "aux": self.aux.to_dict(),
            "on_boundary": self.on_boundary,
        }


def tie_tolerance(spec: MomentSpec, q: float) -> float:
    return TIE_TOL * max(1.0, q, spec.mu1 + spec.mu2)


def classify_condition(spec: MomentSpec, q: float) -> ConditionReport:
    require_valid(spec)
    if not (math.isfinite(q) and q >= 0.0):
        raise DomainError(f"q={q} must be a finite value >= 0", "q >= 0")

    aux = aux_quantities(spec)
    case = theta_case(spec, aux)
    table = condition_intervals(spec, case, aux)
    bq = branch_quantities(spec, q)
    flags = direct_flags(bq)

    hits = [cond for cond, iv in table.items() if q in iv]
    if len(hits) != 1:
        raise ConsistencyError(f"q={q} falls in {len(hits)} intervals ({case.value})")
    routed = hits[0]

    tol = tie_tolerance(spec, q)
    near_edge = any(
        abs(q - e) <= tol for iv in table.values() for e in iv.endpoints()
    )
    on_boundary = near_edge or bq.clamped

    if not (case is ThetaCase.POOLED or case is ThetaCase.COLLINEAR):
        exact = sum(flags) == 1 and flags[routed - 1]
        if not exact:
            if not _relaxed_flag(routed, bq, tol):
                raise ConsistencyError(
                    f"interval router chose C{int(routed)} at q={q} ({case.value}) "
                    f"but direct flags are {flags}"
                )
            on_boundary = True

    return ConditionReport(
        condition=routed,
        q=q,
        q_a=bq.q_a,
        q_b=bq.q_b,
        q_c=bq.q_c,
        zeta_a=bq.zeta_a,
        zeta_b=bq.zeta_b,
        case_label=case,
        interval_table=table,
        aux=aux,
        direct=flags,
        on_boundary=on_boundary,
        clamped=bq.clamped,
    )
