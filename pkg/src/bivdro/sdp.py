"""Sum-of-squares lifting of piecewise-quadratic worst-case bounds.

With x_i = y_i^2, a quadratic p(x) is nonnegative on the quadrant iff the
even quartic p(y1^2, y2^2) is nonnegative, and for two variables in degree
four that holds iff the quartic is a sum of squares. A Gram matrix in the
basis (y1^2, y1 y2, y2^2, y1, y2, 1) carries the coefficients of p on the
diagonal-like entries and six free parameters (g, h) that cancel in
y' M y. The bound then reads

    min  z . (1, mu1, mu2, S11, S22, S12)
    s.t. M(z - w_k, g_k, h_k) >= 0 (PSD) for every piece k.

This module builds that problem, writes it in sparse SDPA format, verifies
certificates by eigenvalues and searches for the free parameters given z.
It does not run an interior-point SDP solver.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .bivariate.duality import monomials, quadrant_min
from .errors import DomainError
from .moments import MomentSpec, require_valid

PSD_TOL = 1e-9
BASIS = ("y1^2", "y1*y2", "y2^2", "y1", "y2", "1")
PARAMS = ("z1", "z2", "z3", "z4", "z5", "z6", "g1", "g2", "g3", "h1", "h2", "h3")


def gram_matrix(zt, g, h) -> np.ndarray:
    """M(z~, g, h) in the basis (y1^2, y1 y2, y2^2, y1, y2, 1)."""
    z1, z2, z3, z4, z5, z6 = zt
    g1, g2, g3 = g
    h1, h2, h3 = h
    return np.array([
        [z4, 0.0, -g1, 0.0, -h1, -g2],
        [0.0, z6 + 2 * g1, 0.0, h1, -h2, -h3],
        [-g1, 0.0, z5, h2, 0.0, -g3],
        [0.0, h1, h2, z2 + 2 * g2, h3, 0.0],
        [-h1, -h2, 0.0, h3, z3 + 2 * g3, 0.0],
        [-g2, -h3, -g3, 0.0, 0.0, z1],
    ], dtype=float)


@dataclass(frozen=True, eq=False)
class PiecewiseQuadratic:
    """Loss max_k w_k . (1, x1, x2, x1^2, x2^2, x1 x2); W is 6 x K."""

    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        if W.ndim == 1:
            W = W[:, None]
        if W.shape[0] != 6 or W.shape[1] < 1:
            raise DomainError("W must be 6 x K with K >= 1", "W shape")
        if not np.all(np.isfinite(W)):
            raise DomainError("W must be finite", "finite")
        object.__setattr__(self, "W", W)

    @property
    def K(self) -> int:
        return self.W.shape[1]

    def piece(self, k: int) -> np.ndarray:
        return self.W[:, k]

    def __call__(self, x1, x2):
        mon = monomials(x1, x2)
        return np.tensordot(self.W.T, mon, axes=(1, 0)).max(axis=0)

    @classmethod
    def newsvendor(cls, q: float) -> "PiecewiseQuadratic":
        """max{0, x1 + x2 - q}."""
        return cls(np.array([[0.0, -q], [0.0, 1.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]))

    def to_dict(self) -> dict:
        return {"W": self.W.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseQuadratic":
        if "pieces" in data:
            return cls(np.array(data["pieces"], dtype=float).T)
        return cls(np.array(data["W"], dtype=float))


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """min c'x  s.t.  sum_i x_i F_i - F_0 >= 0, one 6 x 6 block per piece.

    Variables are ordered z1..z6 followed by (g1, g2, g3, h1, h2, h3) of each
    piece. ``F[i]`` is a (K, 6, 6) stack of block matrices.
    """

    c: np.ndarray
    F: np.ndarray  # shape (m + 1, K, 6, 6); F[0] is the constant term
    block_sizes: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.c.size

    @property
    def K(self) -> int:
        return len(self.block_sizes)

    def blocks_at(self, x) -> np.ndarray:
        """sum_i x_i F_i - F_0 for every block."""
        x = np.asarray(x, dtype=float)
        return np.tensordot(x, self.F[1:], axes=(0, 0)) - self.F[0]

    def structure(self) -> dict:
        return {
            "m": self.m,
            "n_blocks": self.K,
            "block_sizes": list(self.block_sizes),
            "basis": list(BASIS),
            "variables": list(PARAMS[:6]) + [
                f"{p}[{k}]" for k in range(self.K) for p in PARAMS[6:]
            ],
        }


def _unit_blocks(K: int):
    """Linear maps from each parameter to the block matrices."""
    zero3 = np.zeros(3)
    z_parts = []
    for i in range(6):
        e = np.zeros(6)
        e[i] = 1.0
        z_parts.append(gram_matrix(e, zero3, zero3))
    gh_parts = []
    for i in range(6):
        e = np.zeros(6)
        e[i] = 1.0
        gh_parts.append(gram_matrix(np.zeros(6), e[:3], e[3:]))
    return z_parts, gh_parts


def build_sdp(spec: MomentSpec, pw: PiecewiseQuadratic) -> SdpProblem:
    require_valid(spec)
    K = pw.K
    m = 6 + 6 * K
    c = np.zeros(m)
    c[:6] = spec.moment_vector()
    F = np.zeros((m + 1, K, 6, 6))
    z_parts, gh_parts = _unit_blocks(K)
    zero3 = np.zeros(3)
    for k in range(K):
        F[0, k] = gram_matrix(pw.piece(k), zero3, zero3)  # M(z - w) = M(z) - M(w)
        for i in range(6):
            F[1 + i, k] = z_parts[i]
            F[1 + 6 + 6 * k + i, k] = gh_parts[i]
    return SdpProblem(c, F, tuple([6] * K))


# --- SDPA sparse format ------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_sdpa(problem: SdpProblem, stream) -> None:
    stream.write('"bivariate moment bound, sum-of-squares lifting"\n')
    stream.write(f"{problem.m} = mDIM\n")
    stream.write(f"{problem.K} = nBLOCK\n")
    stream.write(" ".join(str(s) for s in problem.block_sizes) + " = bLOCKsTRUCT\n")
    stream.write(" ".join(_fmt(v) for v in problem.c) + "\n")
    for mat in range(problem.m + 1):
        for blk in range(problem.K):
            M = problem.F[mat, blk]
            for i in range(6):
                for j in range(i, 6):
                    if M[i, j] != 0.0:
                        stream.write(f"{mat} {blk + 1} {i + 1} {j + 1} {_fmt(M[i, j])}\n")


def export_sdpa(problem: SdpProblem, path) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        write_sdpa(problem, fh)
    return path


def sdpa_string(problem: SdpProblem) -> str:
    buf = io.StringIO()
    write_sdpa(problem, buf)
    return buf.getvalue()


def _strip(line: str) -> str:
    for mark in ("=",):
        if mark in line:
            line = line.split(mark)[0]
    return line.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ").strip()


def parse_sdpa(text: str) -> SdpProblem:
    lines = [ln for ln in text.splitlines() if ln.strip() and ln.lstrip()[0] not in '"*']
    m = int(_strip(lines[0]).split()[0])
    nblocks = int(_strip(lines[1]).split()[0])
    sizes = tuple(abs(int(s)) for s in _strip(lines[2]).split()[:nblocks])
    if any(s != 6 for s in sizes):
        raise DomainError("only 6 x 6 blocks are supported", "block size 6")
    c = np.array([float(v) for v in _strip(lines[3]).split()[:m]])
    F = np.zeros((m + 1, nblocks, 6, 6))
    for ln in lines[4:]:
        mat, blk, i, j, v = ln.split()[:5]
        mat, blk, i, j = int(mat), int(blk) - 1, int(i) - 1, int(j) - 1
        F[mat, blk, i, j] = float(v)
        F[mat, blk, j, i] = float(v)
    return SdpProblem(c, F, sizes)


def load_sdpa(path) -> SdpProblem:
    return parse_sdpa(Path(path).read_text())


# --- certificates ------------------------------------------------------------


def _scaled_min_eig(M: np.ndarray) -> float:
    s = float(np.abs(M).max())
    if s == 0.0:
        return 0.0
    return float(np.linalg.eigvalsh(M / s)[0])


@dataclass(frozen=True)
class CertificateCheck:
    upper_bound: float
    psd_ok: bool
    min_eigs: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"upper_bound": self.upper_bound, "psd_ok": self.psd_ok,
                "min_eigs": list(self.min_eigs)}


def verify_certificate(spec: MomentSpec, pw: PiecewiseQuadratic, z, G, H) -> CertificateCheck:
    """Eigen-check every block; the bound is z . moments when all pass."""
    z = np.asarray(z, dtype=float)
    G = np.asarray(G, dtype=float).reshape(3, -1) if np.size(G) else np.zeros((3, 0))
    H = np.asarray(H, dtype=float).reshape(3, -1) if np.size(H) else np.zeros((3, 0))
    if z.shape != (6,) or G.shape != (3, pw.K) or H.shape != (3, pw.K):
        raise DomainError(
            f"dimension mismatch: z {z.shape}, G {G.shape}, H {H.shape} for K={pw.K}",
            "shapes (6,), (3, K), (3, K)",
        )
    eigs = tuple(
        _scaled_min_eig(gram_matrix(z - pw.piece(k), G[:, k], H[:, k])) for k in range(pw.K)
    )
    ok = all(e >= -PSD_TOL for e in eigs)
    return CertificateCheck(float(z @ spec.moment_vector()), ok, eigs)


@dataclass(frozen=True, eq=False)
class SosBlock:
    """A candidate certificate: z together with the free Gram parameters of every piece."""

    z: np.ndarray
    G: np.ndarray  # 3 x K
    H: np.ndarray  # 3 x K

    def matrices(self, pw: PiecewiseQuadratic) -> np.ndarray:
        """(K, 6, 6) stack of M(z - w_k, g_k, h_k)."""
        return np.stack([
            gram_matrix(self.z - pw.piece(k), self.G[:, k], self.H[:, k]) for k in range(pw.K)
        ])

    def check(self, spec: MomentSpec, pw: PiecewiseQuadratic) -> "CertificateCheck":
        return verify_certificate(spec, pw, self.z, self.G, self.H)


@dataclass(frozen=True, eq=False)
class WitnessResult:
    found: bool
    G: np.ndarray
    H: np.ndarray
    min_eigs: tuple[float, ...]
    evaluations: int
    methods: tuple[str, ...] = field(default=())

    def block(self, z) -> SosBlock:
        return SosBlock(np.asarray(z, dtype=float), self.G, self.H)


def _convex_split(zt: np.ndarray):
    """(g, h) from expanding a convex quadratic around its quadrant minimizer.

    p(x) = p(x*) + grad(x*)'x + (x - x*)' Hess/2 (x - x*) with grad >= 0 and
    grad_i x*_i = 0 at the minimizer; the quadratic and constant terms form a
    PSD 3 x 3 block in (y1^2, y2^2, 1) and the linear terms are squares y_i^2.
    """
    pmin, xs = quadrant_min(zt)
    if not math.isfinite(pmin):
        return None
    z1, z2, z3, z4, z5, z6 = zt
    grad = np.array([z2 + 2 * z4 * xs[0] + z6 * xs[1], z3 + 2 * z5 * xs[1] + z6 * xs[0]])
    grad = np.where(xs > 0.0, 0.0, np.maximum(grad, 0.0))
    # P = homogenized matrix minus the nonnegative linear part
    P12 = z6 / 2.0
    P13 = z2 / 2.0 - grad[0] / 2.0
    P23 = z3 / 2.0 - grad[1] / 2.0
    return np.array([-P12, -P13, -P23]), np.zeros(3)


def find_sos_witness(
    spec: MomentSpec, pw: PiecewiseQuadratic, z, budget: int = 10_000, seed: int = 0
) -> WitnessResult:
    """Search the free Gram parameters so every block is PSD for the given z."""
    z = np.asarray(z, dtype=float)
    K = pw.K
    G = np.zeros((3, K))
    H = np.zeros((3, K))
    eigs = []
    methods = []
    evals = 0
    rng = np.random.default_rng(seed)
    per_piece = max(budget // K, 1)
    for k in range(K):
        zt = z - pw.piece(k)

        def neg_min_eig(p):
            return -_scaled_min_eig(gram_matrix(zt, p[:3], p[3:]))

        starts = [np.zeros(6)]
        split = _convex_split(zt)
        if split is not None:
            starts.insert(0, np.concatenate(split))
        best_p, best = None, -math.inf
        for p0 in starts:
            val = -neg_min_eig(p0)
            evals += 1
            if val > best:
                best_p, best = p0, val
        method = "square-completion" if split is not None and best >= -PSD_TOL else "zero"
        used = 0
        while best < -PSD_TOL and used < per_piece:
            p0 = best_p + rng.normal(scale=0.1 * max(1.0, np.abs(zt).max()), size=6) * (used > 0)
            res = minimize(neg_min_eig, p0, method="Nelder-Mead",
                           options={"maxfev": min(2000, per_piece - used),
                                    "xatol": 1e-13, "fatol": 1e-15})
            used += res.nfev
            if -res.fun > best:
                best_p, best = res.x, -res.fun
            method = "nelder-mead"
        evals += used
        G[:, k], H[:, k] = best_p[:3], best_p[3:]
        eigs.append(best)
        methods.append(method)
    found = all(e >= -PSD_TOL for e in eigs)
    return WitnessResult(found, G, H, tuple(eigs), evals, tuple(methods))
