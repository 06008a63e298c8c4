"""Dense two-phase revised simplex for small-row LPs.

Solves ``max c'x  s.t.  A x = b, x >= 0`` where A has few rows (about a
dozen) and many columns. The basis is refactorized from scratch every
iteration with a dense solve, which for m ~ 10 is both cheap and stable.
Pricing is Dantzig (largest reduced cost); after a run of degenerate pivots
the solver switches to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-10
OPT_TOL = 1e-10
PIVOT_TOL = 1e-11
DEGENERATE_RUN = 50


@dataclass(frozen=True, eq=False)
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: np.ndarray
    objective: float
    duals: np.ndarray
    iterations: int
    basis: np.ndarray
    infeasible_rows: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _iterate(A, b, cost, basis, allowed, max_iter, it0):
    """Primal simplex from a feasible basis. Returns (status, basis, iterations)."""
    m = A.shape[0]
    it = it0
    degenerate_run = 0
    cscale = max(1.0, float(np.abs(cost[allowed]).max(initial=0.0)))
    while it < max_iter:
        B = A[:, basis]
        xb = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, cost[basis])
        d = cost - y @ A
        d[~allowed] = -np.inf
        d[basis] = -np.inf
        bland = degenerate_run >= DEGENERATE_RUN
        if bland:
            cand = np.flatnonzero(d > OPT_TOL * cscale)
            if cand.size == 0:
                return "optimal", basis, it
            j = int(cand[0])
        else:
            j = int(np.argmax(d))
            if not d[j] > OPT_TOL * cscale:
                return "optimal", basis, it
        u = np.linalg.solve(B, A[:, j])
        pos = u > PIVOT_TOL
        if not pos.any():
            return "unbounded", basis, it
        # two-pass (Harris) ratio test: loosen by FEAS_TOL, then prefer big pivots
        xb_c = np.maximum(xb, 0.0)
        loose = np.full(m, np.inf)
        loose[pos] = (xb_c[pos] + FEAS_TOL) / u[pos]
        bound = loose.min()
        ratio = np.full(m, np.inf)
        ratio[pos] = xb_c[pos] / u[pos]
        elig = np.flatnonzero(pos & (ratio <= bound))
        if bland:
            r = int(elig[np.argmin(basis[elig])])
        else:
            r = int(elig[np.argmax(u[elig])])
        step = ratio[r]
        degenerate_run = degenerate_run + 1 if step <= FEAS_TOL else 0
        basis = basis.copy()
        basis[r] = j
        it += 1
    return "iteration_limit", basis, it


def solve_lp(c, A, b, max_iter: int = 20000) -> LpResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape

    # equilibrate rows and make the right-hand side nonnegative
    rs = np.abs(A).max(axis=1)
    rs[rs == 0.0] = 1.0
    A = A / rs[:, None]
    b = b / rs
    sign = np.where(b < 0.0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    full = np.hstack([A, np.eye(m)])
    art = np.arange(n, n + m)
    allowed = np.ones(n + m, dtype=bool)

    # phase 1: drive the artificial columns to zero
    cost1 = np.zeros(n + m)
    cost1[art] = -1.0
    status, basis, it = _iterate(full, b, cost1, art.copy(), allowed, max_iter, 0)
    xb = np.linalg.solve(full[:, basis], b)
    art_level = np.zeros(m)
    for k, col in enumerate(basis):
        if col >= n:
            art_level[col - n] = xb[k]
    if status == "iteration_limit":
        return _result(status, n, m, basis, xb, c, full, rs, sign, it)
    if art_level.sum() > FEAS_TOL * max(1.0, float(b.sum())):
        bad = tuple(int(i) for i in np.flatnonzero(art_level > FEAS_TOL))
        return LpResult("infeasible", np.zeros(n), np.nan, np.zeros(m), it, basis, bad)

    # pivot zero-level artificials out where some real column can replace them
    for k in range(m):
        if basis[k] < n:
            continue
        B = full[:, basis]
        row = np.linalg.solve(B.T, np.eye(m)[k]) @ full[:, :n]
        row[basis[basis < n]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > 1e-9:
            basis = basis.copy()
            basis[k] = j
    allowed[art] = False

    cost2 = np.zeros(n + m)
    cscale = max(1.0, float(np.abs(c).max(initial=0.0)))
    cost2[:n] = c / cscale
    status, basis, it = _iterate(full, b, cost2, basis, allowed, max_iter, it)
    xb = np.linalg.solve(full[:, basis], b)
    return _result(status, n, m, basis, xb, c, full, rs, sign, it, cost2, cscale)


def _result(status, n, m, basis, xb, c, full, rs, sign, it, cost2=None, cscale=1.0):
    x = np.zeros(n)
    for k, col in enumerate(basis):
        if col < n:
            x[col] = max(xb[k], 0.0)
    if cost2 is not None:
        y = np.linalg.solve(full[:, basis].T, cost2[basis]) * cscale
        duals = y * sign / rs  # back to the caller's row scaling
    else:
        duals = np.zeros(m)
    return LpResult(status, x, float(c @ x), duals, it, basis)
