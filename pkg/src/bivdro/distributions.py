"""Finite discrete distributions on the nonnegative orthant (1-D or 2-D)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError

CLAMP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Support points (k x d) with probabilities (k,).

    Coordinates within ``CLAMP_TOL`` below zero are clamped to zero at
    construction; anything more negative is rejected.
    """

    points: np.ndarray
    probs: np.ndarray
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 1 and np.ndim(self.points) == 1:
            pts = pts.T  # 1-D list of scalars means a univariate support
        pr = np.asarray(self.probs, dtype=float).ravel()
        if pts.shape[0] != pr.shape[0]:
            raise ValueError("points and probs have different lengths")
        scale = max(1.0, float(np.max(np.abs(pts), initial=0.0)))
        if np.any(pts < -CLAMP_TOL * scale):
            raise ConsistencyError(f"support point below zero: {pts.min():.3g}")
        pts = np.where(pts < 0.0, 0.0, pts)
        pr = np.where((pr < 0.0) & (pr > -CLAMP_TOL), 0.0, pr)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probs", pr)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def mass(self) -> float:
        return float(self.probs.sum())

    def mean(self) -> np.ndarray:
        return self.probs @ self.points

    def second_moments(self) -> np.ndarray:
        """E[X X^T] as a (d x d) matrix."""
        return (self.points * self.probs[:, None]).T @ self.points

    def moment_vector(self) -> np.ndarray:
        """(mass, E X1, E X2, E X1^2, E X2^2, E X1X2) for 2-D supports."""
        if self.dim != 2:
            raise ValueError("moment_vector needs a 2-D support")
        x1, x2 = self.points[:, 0], self.points[:, 1]
        p = self.probs
        return np.array(
            [p.sum(), p @ x1, p @ x2, p @ (x1 * x1), p @ (x2 * x2), p @ (x1 * x2)]
        )

    def expect(self, fn) -> float:
        """E[fn(point)] where ``fn`` maps an (k x d) array to k values."""
        return float(self.probs @ np.asarray(fn(self.points), dtype=float))

    def expected_excess(self, q: float) -> float:
        """E[(X1 + ... + Xd - q)+]."""
        s = self.points.sum(axis=1)
        return float(self.probs @ np.maximum(s - q, 0.0))

    def moment_residuals(self, target: np.ndarray) -> np.ndarray:
        """Relative residuals of the realized moments against ``target``."""
        target = np.asarray(target, dtype=float)
        got = self.moment_vector() if self.dim == 2 else self._moments_1d()
        return np.abs(got - target) / np.maximum(1.0, np.abs(target))

    def _moments_1d(self) -> np.ndarray:
        x = self.points[:, 0]
        return np.array([self.probs.sum(), self.probs @ x, self.probs @ (x * x)])

    def compact(self, tol: float = 0.0) -> "DiscreteDistribution":
        """Drop atoms with probability <= tol."""
        keep = self.probs > tol
        return DiscreteDistribution(self.points[keep], self.probs[keep], self.notes)

    def swapped(self) -> "DiscreteDistribution":
        return DiscreteDistribution(self.points[:, ::-1], self.probs, self.notes)

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "probs": self.probs.tolist(),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def csv_rows(self) -> list[tuple[float, ...]]:
        """Rows ``(x1, x2, prob)`` (or ``(x, prob)`` in 1-D)."""
        return [tuple(pt) + (float(p),) for pt, p in zip(self.points.tolist(), self.probs)]

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteDistribution":
        return cls(np.array(data["points"], dtype=float), np.array(data["probs"]),
                   tuple(data.get("notes", ())))
