"""Distribution families with exact CDF/quantile/sampling plus the particle type.

Every distribution exposes ``cdf``, ``quantile`` and ``sample`` following the
generalized-inverse convention ``quantile(u) <= x  <=>  u <= cdf(x)``.  All
evaluation methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import ndtr, ndtri


class WeightSumWarning(UserWarning):
    """Raised when particle weights deviate from unit mass by more than 1e-6."""


def _maybe_scalar(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


class Distribution:
    """Base class for the supported reward/return distribution families."""

    kind: str = ""
    #: True for distributions whose CDF is a step function (dirac, finite).
    is_step: bool = False

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _maybe_scalar(self._cdf(x))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if not np.all((u > 0.0) & (u < 1.0)):
            raise ValueError("quantile level must lie in the open interval (0, 1)")
        return _maybe_scalar(self._quantile(u))

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-transform sampling; consumes one uniform deviate per draw."""
        u = rng.random(size)
        # random() can return exactly 0.0, which is outside the quantile domain
        u = np.maximum(u, 2.0 ** -53)
        u = np.asarray(u, dtype=float)
        return _maybe_scalar(self._quantile(u))

    def moment_is_finite(self, beta: float) -> bool:
        """Whether E|X|^beta is finite.  Only the Cauchy family has infinite moments."""
        if beta <= 0:
            raise ValueError("moment order must be positive")
        return True

    def support_bounds(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def cdf_left(self, x):
        """Left limit F(x-); differs from cdf only for step distributions."""
        return self.cdf(x)

    def to_config(self) -> dict:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.to_config().items() if k != "type")
        return f"{type(self).__name__}({params})"


class Dirac(Distribution):
    kind = "dirac"
    is_step = True

    def __init__(self, point: float):
        if not math.isfinite(point):
            raise ValueError("dirac point must be finite")
        self.point = float(point)

    def _cdf(self, x):
        return (x >= self.point).astype(float)

    def _quantile(self, u):
        return np.full_like(u, self.point)

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return _maybe_scalar((x > self.point).astype(float))

    def support_bounds(self):
        return (self.point, self.point)

    def to_config(self):
        return {"type": "dirac", "point": self.point}


class FiniteDist(Distribution):
    """Finitely supported distribution: strictly increasing points, weights summing to 1.

    Zero-weight atoms are permitted (they arise naturally from projections whose
    cells receive no mass).  Duplicate points are merged at construction with
    exact floating-point equality; no epsilon merging is performed.
    """

    kind = "finite"
    is_step = True

    def __init__(self, points, weights):
        points = np.asarray(points, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if points.ndim != 1 or weights.ndim != 1 or points.size != weights.size:
            raise ValueError("points and weights must be 1-d arrays of equal length")
        if points.size == 0:
            raise ValueError("finite distribution needs at least one atom")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
            raise ValueError("points and weights must be finite")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diff(points) <= 0):
            raise ValueError("points must be strictly increasing (use from_particles to merge)")
        total = weights.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12 (use from_particles to normalize)")
        self.points = points
        self.weights = weights
        cum = np.cumsum(weights)
        cum[-1] = 1.0
        self.cum = cum

    @classmethod
    def from_particles(cls, points, weights) -> "FiniteDist":
        """Sort, merge duplicate points (summing weights) and normalize weights."""
        points = np.asarray(points, dtype=float).ravel()
        weights = np.asarray(weights, dtype=float).ravel()
        if points.size == 0:
            raise ValueError("empty particle set")
        if points.size != weights.size:
            raise ValueError("points and weights must have equal length")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
            raise ValueError("particles must be finite")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        total = weights.sum()
        if total <= 0:
            raise ValueError("total weight must be positive")
        if abs(total - 1.0) > 1e-6:
            warnings.warn(
                f"particle weights sum to {total!r}; renormalizing", WeightSumWarning
            )
        uniq, inverse = np.unique(points, return_inverse=True)
        merged = np.zeros_like(uniq)
        np.add.at(merged, inverse, weights)
        return cls(uniq, merged / merged.sum())

    @property
    def size(self) -> int:
        return self.points.size

    def _cdf(self, x):
        idx = np.searchsorted(self.points, x, side="right")
        return np.where(idx == 0, 0.0, self.cum[np.maximum(idx, 1) - 1])

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.points, x, side="left")
        out = np.where(idx == 0, 0.0, self.cum[np.maximum(idx, 1) - 1])
        return _maybe_scalar(out)

    def _quantile(self, u):
        # smallest support point whose cumulative weight reaches u
        idx = np.searchsorted(self.cum, u, side="left")
        return self.points[np.minimum(idx, self.points.size - 1)]

    def support_bounds(self):
        return (float(self.points[0]), float(self.points[-1]))

    def to_config(self):
        return {"type": "finite", "points": self.points.tolist(), "weights": self.weights.tolist()}


class Normal(Distribution):
    kind = "normal"

    def __init__(self, mu: float, sigma2: float):
        if not (sigma2 > 0):
            raise ValueError("sigma2 must be positive")
        self.mu = float(mu)
        self.sigma2 = float(sigma2)
        self.sigma = math.sqrt(self.sigma2)

    def _cdf(self, x):
        return ndtr((x - self.mu) / self.sigma)

    def _quantile(self, u):
        return self.mu + self.sigma * ndtri(u)

    def to_config(self):
        return {"type": "normal", "mu": self.mu, "sigma2": self.sigma2}


class Cauchy(Distribution):
    kind = "cauchy"

    def __init__(self, mu: float, scale: float):
        if not (scale > 0):
            raise ValueError("scale must be positive")
        self.mu = float(mu)
        self.scale = float(scale)

    def _cdf(self, x):
        # branch on the sign of t to keep full relative accuracy in both tails
        t = (x - self.mu) / self.scale
        out = np.empty_like(t)
        pos = t > 0
        neg = t < 0
        with np.errstate(divide="ignore"):
            out[pos] = 1.0 - np.arctan(1.0 / t[pos]) / math.pi
            out[neg] = np.arctan(-1.0 / t[neg]) / math.pi
        out[~(pos | neg)] = 0.5
        return out

    def _quantile(self, u):
        # tan(pi*(u-1/2)) evaluated as +-cot on the half closest to the endpoint;
        # 1-u is exact for u in [0.5, 1], which preserves tail accuracy
        out = np.empty_like(u)
        hi = u > 0.5
        lo = u < 0.5
        out[hi] = self.scale / np.tan(math.pi * (1.0 - u[hi]))
        out[lo] = -self.scale / np.tan(math.pi * u[lo])
        out[~(hi | lo)] = 0.0
        return self.mu + out

    def moment_is_finite(self, beta):
        if beta <= 0:
            raise ValueError("moment order must be positive")
        return beta < 1.0

    def to_config(self):
        return {"type": "cauchy", "mu": self.mu, "scale": self.scale}


class Uniform(Distribution):
    kind = "uniform"

    def __init__(self, a: float, b: float):
        if not (b > a):
            raise ValueError("uniform needs b > a")
        self.a = float(a)
        self.b = float(b)

    def _cdf(self, x):
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)

    def _quantile(self, u):
        return self.a + u * (self.b - self.a)

    def support_bounds(self):
        return (self.a, self.b)

    def to_config(self):
        return {"type": "uniform", "a": self.a, "b": self.b}


class Exponential(Distribution):
    kind = "exponential"

    def __init__(self, rate: float):
        if not (rate > 0):
            raise ValueError("rate must be positive")
        self.rate = float(rate)

    def _cdf(self, x):
        return np.where(x < 0.0, 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)))

    def _quantile(self, u):
        return -np.log1p(-u) / self.rate

    def support_bounds(self):
        return (0.0, math.inf)

    def to_config(self):
        return {"type": "exponential", "rate": self.rate}


def finite_from_particles(points, weights) -> FiniteDist:
    """Build a FiniteDist from raw particles (sorted, merged, normalized)."""
    return FiniteDist.from_particles(points, weights)


def density_estimate(dist: Distribution, delta: float, x):
    """Central-difference density estimate (F(x+delta) - F(x-delta)) / (2*delta)."""
    if not (delta > 0):
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    out = (dist.cdf(x + delta) - dist.cdf(x - delta)) / (2.0 * delta)
    return out


def moment_order(dist: Distribution, beta: float) -> str:
    """Classify E|X|^beta as 'finite' or 'infinite'."""
    return "finite" if dist.moment_is_finite(beta) else "infinite"


_FAMILIES = {
    "dirac": lambda c: Dirac(c["point"]),
    "finite": lambda c: FiniteDist.from_particles(c["points"], c["weights"]),
    "normal": lambda c: Normal(c["mu"], c["sigma2"]),
    "cauchy": lambda c: Cauchy(c["mu"], c["scale"]),
    "uniform": lambda c: Uniform(c["a"], c["b"]),
    "exponential": lambda c: Exponential(c["rate"]),
}


def from_config(config: dict) -> Distribution:
    """Build a distribution from a JSON descriptor, e.g. {"type": "normal", ...}."""
    try:
        kind = config["type"]
    except (TypeError, KeyError):
        raise ValueError(f"distribution descriptor needs a 'type' key: {config!r}")
    try:
        factory = _FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown distribution type {kind!r}")
    try:
        return factory(config)
    except KeyError as exc:
        raise ValueError(f"descriptor for {kind!r} is missing key {exc}")
