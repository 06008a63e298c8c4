"""Seeded random feasible instances shared by the verify command and the checks."""

from __future__ import annotations

import math

from .moments import MomentSpec


def random_instance(rng) -> tuple[MomentSpec, float]:
    """Draw (spec, q) with rho uniform on [-1, 1], rejecting c < 0."""
    while True:
        mu1, mu2 = rng.uniform(0.2, 5.0, 2)
        a, b = 1.0 + rng.uniform(0.05, 5.0, 2)
        rho = rng.uniform(-1.0, 1.0)
        c = 1.0 + rho * math.sqrt((a - 1.0) * (b - 1.0))
        if c < 0.0:
            continue
        q = rng.uniform(0.0, 2.5 * (mu1 + mu2) * math.sqrt(max(a, b)))
        return MomentSpec(float(mu1), float(mu2), float(a), float(b), float(c)), float(q)


def random_instances(rng, n: int) -> list[tuple[MomentSpec, float]]:
    return [random_instance(rng) for _ in range(n)]
