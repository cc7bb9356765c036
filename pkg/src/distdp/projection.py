"""Parameterised projection onto finitely supported distributions.

A projection parameter is an interlaced grid of support points x_1..x_m and
cut points y_1..y_{m-1}.  Projecting a distribution places the mass of each
half-open cell (y_{i-1}, y_i] onto the support point x_i, so the result
depends on the input only through m-1 CDF evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution, FiniteDist


@dataclass(frozen=True)
class ProjectionParam:
    """Interlaced support/cut grid x_1 <= y_1 <= x_2 <= ... <= y_{m-1} <= x_m."""

    xs: np.ndarray
    ys: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or xs.size < 1:
            raise ValueError("xs must be a nonempty 1-d array")
        if ys.size != xs.size - 1:
            raise ValueError("ys must have exactly len(xs) - 1 entries")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("grid points must be finite")
        if xs.size > 1:
            interlaced = np.empty(2 * xs.size - 1)
            interlaced[0::2] = xs
            interlaced[1::2] = ys
            if np.any(np.diff(interlaced) < 0):
                raise ValueError("grid is not interlaced: need x_1 <= y_1 <= x_2 <= ...")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def m(self) -> int:
        return self.xs.size


def xi_lin(m: int, w: float, z: float) -> ProjectionParam:
    """Evenly spaced interlaced grid covering [z-w, z+w]; for m=1 the single point z."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if not (w > 0):
        raise ValueError("w must be positive")
    if m == 1:
        return ProjectionParam(np.array([float(z)]), np.empty(0))
    i = np.arange(1, m + 1, dtype=float)
    xs = z + (2.0 * i - 1.0 - m) / (m - 1.0) * w
    j = np.arange(1, m, dtype=float)
    ys = z + (2.0 * j - m) / (m - 1.0) * w
    return ProjectionParam(xs, ys)


def project(dist: Distribution, xi: ProjectionParam) -> FiniteDist:
    """Project a distribution onto the grid: cell masses are consecutive CDF differences.

    Mass is conserved exactly by telescoping (the cell boundaries start at
    F = 0 and end at F = 1).  Cells with coinciding cut points get weight 0
    and are retained, so the support size equals m whenever the xs are distinct.
    """
    if xi.m == 1:
        return FiniteDist(xi.xs.copy(), np.array([1.0]))
    bounds = np.empty(xi.m + 1)
    bounds[0] = 0.0
    bounds[1:-1] = dist.cdf(xi.ys)
    bounds[-1] = 1.0
    weights = np.diff(bounds)
    # CDF evaluations at sorted points are nondecreasing up to rounding
    np.clip(weights, 0.0, 1.0, out=weights)
    total = weights.sum()
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"projection weights sum to {total!r}, expected 1")
    return FiniteDist.from_particles(xi.xs, weights)


def xi_stats(xi: ProjectionParam) -> tuple[float, float, float]:
    """Grid characteristics (delta, z, w): max spacing, center and half-width."""
    xs = xi.xs
    if xi.m == 1:
        return (0.0, float(xs[0]), 0.0)
    delta = float(np.max(np.diff(xs)))
    z = float((xs[-1] + xs[0]) / 2.0)
    w = float((xs[-1] - xs[0]) / 2.0)
    return (delta, z, w)
