"""Dual certificates for the bivariate bound and their verification.

A certificate is a quadratic h1(x) = z . (1, x1, x2, x1^2, x2^2, x1 x2) with
h1 >= 0 and h2 = h1 + q - x1 - x2 >= 0 on the nonnegative quadrant; its
moment objective then upper-bounds every feasible E[(X1 + X2 - q)+].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import CertificateUnavailable
from ..moments import MomentSpec, pooled_moments
from ..scarf import UnivariateSpec, scarf_dual
from .closed_form import worst_case
from .conditions import Condition, ThetaCase, classify_condition

GRID_N = 200
FEAS_TOL = 1e-9
DEGENERATE_Q = 1e-12


def monomials(x1, x2) -> np.ndarray:
    """Stacked (1, x1, x2, x1^2, x2^2, x1 x2) along the first axis."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.stack([np.ones_like(x1), x1, x2, x1 * x1, x2 * x2, x1 * x2])


@dataclass(frozen=True, eq=False)
class DualCertificate:
    z: np.ndarray
    q: float
    condition: Condition | None = None

    def h1(self, x1, x2):
        z = self.z
        return z[0] + z[1] * x1 + z[2] * x2 + z[3] * x1 * x1 + z[4] * x2 * x2 + z[5] * x1 * x2

    def h2(self, x1, x2):
        return self.h1(x1, x2) + self.q - x1 - x2

    def objective(self, spec: MomentSpec) -> float:
        return float(self.z @ spec.moment_vector())

    def hessian(self) -> np.ndarray:
        z = self.z
        return np.array([[2.0 * z[3], z[5]], [z[5], 2.0 * z[4]]])

    def to_dict(self) -> dict:
        return {
            "z": self.z.tolist(),
            "q": self.q,
            "condition": None if self.condition is None else f"C{int(self.condition)}",
        }


def _line_dual(spec: MomentSpec, q: float, q_b: float, cond: Condition) -> np.ndarray:
    mu1, mu2, b, c = spec.mu1, spec.mu2, spec.b, spec.c
    r = q_b - q
    z1 = r * r / (4.0 * q_b)
    z2 = r / (2.0 * q_b)
    z4 = 1.0 / (4.0 * q_b)
    if cond is Condition.C2:
        k = q_b + q - c * mu1
        z3 = 1.0 - (q_b + q) * k / (2.0 * q_b * b * mu2)
    else:
        k = q - q_b - c * mu1
        z3 = r * k / (2.0 * b * q_b * mu2)
    z5 = k * k / (4.0 * q_b * b * b * mu2 * mu2)
    z6 = k / (2.0 * b * q_b * mu2)
    return np.array([z1, z2, z3, z4, z5, z6])


def _swap_z(z: np.ndarray) -> np.ndarray:
    return z[[0, 2, 1, 4, 3, 5]]


def dual_certificate(spec: MomentSpec, q: float) -> DualCertificate:
    """Closed-form optimal dual for the branch selected at (spec, q)."""
    rep = classify_condition(spec, q)
    mu1, mu2, a, b, c = spec.mu1, spec.mu2, spec.a, spec.b, spec.c
    cond = rep.condition
    scale = max(1.0, q, mu1 + mu2)

    if rep.case_label is ThetaCase.POOLED:
        mu_bar, sigma_bar = pooled_moments(spec)
        d = scarf_dual(UnivariateSpec(mu_bar, sigma_bar), q)
        z = np.array([d.y0, d.y1, d.y1, d.y2, d.y2, 2.0 * d.y2])
        return DualCertificate(z, q, cond)

    if rep.case_label is ThetaCase.COLLINEAR:
        total = mu1 + mu2
        gap = total - q
        if abs(gap) <= DEGENERATE_Q * scale:
            raise CertificateUnavailable("sum is the constant q; no finite dual")
        lam = 1.0 / (4.0 * abs(gap))
        # penalty on (s - total)^2, plus (s - q) when the sum sits above q
        base = np.array([lam * total * total, -2.0 * lam * total, -2.0 * lam * total,
                         lam, lam, 2.0 * lam])
        if gap > 0.0:
            base = base + np.array([-q, 1.0, 1.0, 0.0, 0.0, 0.0])
        return DualCertificate(base, q, cond)

    if cond is Condition.C1:
        d = a * b - c * c
        z = np.array([
            0.0,
            1.0 - 2.0 * q * (b - c) / (mu1 * d),
            1.0 - 2.0 * q * (a - c) / (mu2 * d),
            q * (b - c) ** 2 / (d * d * mu1 * mu1),
            q * (a - c) ** 2 / (d * d * mu2 * mu2),
            2.0 * q * (a - c) * (b - c) / (d * d * mu1 * mu2),
        ])
        return DualCertificate(z, q, cond)

    if cond in (Condition.C2, Condition.C4):
        if rep.q_b <= DEGENERATE_Q * scale:
            raise CertificateUnavailable("Q_b vanishes; line atoms merged")
        return DualCertificate(_line_dual(spec, q, rep.q_b, cond), q, cond)

    if cond in (Condition.C3, Condition.C5):
        if rep.q_a <= DEGENERATE_Q * scale:
            raise CertificateUnavailable("Q_a vanishes; line atoms merged")
        z = _line_dual(spec.swapped(), q, rep.q_a, cond.swapped())
        return DualCertificate(_swap_z(z), q, cond)

    q_c = rep.q_c
    if q_c <= DEGENERATE_Q * scale:
        raise CertificateUnavailable("Q_c vanishes")
    r = q_c - q
    z = np.array([r * r / (4.0 * q_c), r / (2.0 * q_c), r / (2.0 * q_c),
                  1.0 / (4.0 * q_c), 1.0 / (4.0 * q_c), 1.0 / (2.0 * q_c)])
    return DualCertificate(z, q, cond)


# --- verification ------------------------------------------------------------


def quadrant_min(z: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum of a convex quadratic z . monomials over x >= 0.

    Enumerates the four active sets of the KKT system. Returns ``-inf``
    when the quadratic is not convex or is unbounded below on the quadrant.
    """
    z = np.asarray(z, dtype=float)
    hess = np.array([[2.0 * z[3], z[5]], [z[5], 2.0 * z[4]]])
    lin = z[1:3]
    eig = np.linalg.eigvalsh(hess)
    if eig[0] < -1e-12 * max(1.0, abs(eig[-1])):
        return -math.inf, np.full(2, np.nan)

    def val(x):
        return float(z @ monomials(x[0], x[1]))

    best, arg = val(np.zeros(2)), np.zeros(2)
    for i in (0, 1):
        # only x_i free, the other coordinate pinned at zero
        h, g = hess[i, i], lin[i]
        if h > 0.0:
            t = max(-g / h, 0.0)
        elif g < 0.0:
            return -math.inf, np.full(2, np.nan)
        else:
            t = 0.0
        x = np.zeros(2)
        x[i] = t
        if val(x) < best:
            best, arg = val(x), x
    x, *_ = np.linalg.lstsq(hess, -lin, rcond=None)
    if np.all(x >= 0.0) and np.allclose(hess @ x, -lin, atol=1e-12 * max(1.0, np.abs(lin).max())):
        if val(x) < best:
            best, arg = val(x), x
    # unbounded iff a null direction of the Hessian inside the quadrant descends
    _, vecs = np.linalg.eigh(hess)
    null_tol = 1e-14 * max(1.0, abs(eig[-1]))
    for k in range(2):
        if eig[k] > null_tol:
            continue
        for d in (vecs[:, k], -vecs[:, k]):
            if np.all(d >= -1e-15) and lin @ d < -1e-15:
                return -math.inf, d
    if abs(eig[-1]) <= null_tol and np.any(lin < 0.0):
        return -math.inf, (lin < 0.0).astype(float)
    return best, arg


def grid_extent(spec: MomentSpec, q: float, q_c: float) -> float:
    return max(10.0 * (spec.mu1 + spec.mu2), 2.0 * q + 2.0 * q_c)


@dataclass(frozen=True)
class GapReport:
    primal: float
    dual: float
    gap: float
    feasible_primal: bool
    feasible_dual: bool
    condition: Condition
    skipped: str | None = None
    min_h1: float = math.nan
    min_h2: float = math.nan
    moment_residual: float = math.nan
    attainment_residual: float = math.nan
    degenerate: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.skipped is None and self.feasible_primal and self.feasible_dual

    def to_dict(self) -> dict:
        def f(x):
            return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x

        return {
            "primal": self.primal,
            "dual": f(self.dual),
            "gap": f(self.gap),
            "feasible_primal": self.feasible_primal,
            "feasible_dual": self.feasible_dual,
            "condition": f"C{int(self.condition)}",
            "skipped": self.skipped,
            "min_h1": f(self.min_h1),
            "min_h2": f(self.min_h2),
            "moment_residual": f(self.moment_residual),
            "attainment_residual": f(self.attainment_residual),
            "degenerate": self.degenerate,
        }


def check_dual_feasibility(
    cert: DualCertificate, extent: float, n: int = GRID_N
) -> tuple[float, float, bool]:
    """Grid minima of h1, h2 plus the exact quadrant-minimum check."""
    xs = np.linspace(0.0, extent, n)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    h1 = cert.h1(x1, x2)
    h2 = h1 + cert.q - x1 - x2
    g1, g2 = float(h1.min()), float(h2.min())

    z2 = cert.z + np.array([cert.q, -1.0, -1.0, 0.0, 0.0, 0.0])
    m1, _ = quadrant_min(cert.z)
    m2, _ = quadrant_min(z2)
    scale = max(1.0, abs(cert.z[0]), abs(cert.q))
    exact_ok = m1 >= -FEAS_TOL * scale and m2 >= -FEAS_TOL * scale
    return min(g1, m1), min(g2, m2), exact_ok and g1 >= -FEAS_TOL and g2 >= -FEAS_TOL


def verify_duality(spec: MomentSpec, q: float, rtol: float = 1e-9) -> GapReport:
    """Primal law, dual certificate and the gap between them at (spec, q)."""
    wc = worst_case(spec, q)
    primal = wc.value
    dist = wc.distribution
    mres = float(dist.moment_residuals(spec.moment_vector()).max())
    attained = dist.expected_excess(q)
    ares = abs(attained - primal) / max(1.0, abs(primal))
    feasible_primal = mres <= rtol and ares <= rtol and bool(np.all(dist.probs >= -1e-12))
    try:
        cert = dual_certificate(spec, q)
    except CertificateUnavailable as exc:
        return GapReport(
            primal, math.nan, math.nan, feasible_primal, False, wc.condition,
            skipped=exc.reason, moment_residual=mres, attainment_residual=ares,
            degenerate=True, notes=wc.warnings,
        )
    dual = cert.objective(spec)
    extent = grid_extent(spec, q, wc.report.q_c)
    min1, min2, feasible_dual = check_dual_feasibility(cert, extent)
    return GapReport(
        primal=primal,
        dual=dual,
        gap=abs(primal - dual) / (1.0 + abs(primal)),
        feasible_primal=feasible_primal,
        feasible_dual=feasible_dual,
        condition=wc.condition,
        min_h1=min1,
        min_h2=min2,
        moment_residual=mres,
        attainment_residual=ares,
        degenerate=wc.degenerate,
        notes=wc.warnings,
    )
