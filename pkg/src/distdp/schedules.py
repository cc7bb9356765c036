"""Parameter algorithms: size schedules, quantile box, PPA, ADP, QSP and QDP.

The algorithms differ only in how they pick the projection grid for iteration
k from the previous approximation:

* PPA: fixed center/width, evenly spaced.
* ADP: evenly spaced on the quantile box of T_s(eta).
* QSP: approximate quantiles of T_s(eta) by a linear inverse-CDF spline built
  from evenly spaced CDF evaluations inside the quantile box.
* QDP: exact mid-quantiles of T_s(eta); needs finitely supported rewards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bellman import ReturnApprox, bellman_cdf, materialize_bellman_finite
from .distributions import FiniteDist
from .mdp import MdpSpec
from .projection import ProjectionParam, xi_lin

ALGORITHMS = ("ppa", "adp", "qsp", "qdp")


@dataclass
class ScheduleConfig:
    """Hyper-parameters of a parameter algorithm.

    theta defaults to (gamma+1)/2 when left unset; sizes follow
    m = ceil((1/theta)^k) in exponential mode and stay fixed in constant mode.
    The spline evaluation count is m' = ceil(spline_fraction * m) and the
    box level defaults to eps_u = 1/(2m), clamped into (0, 1/2].
    """

    kind: str = "adp"
    theta: float | None = None
    size_mode: str = "exponential"
    constant_m: int = 64
    spline_fraction: float = 0.25
    eps_u_constant: float | None = None
    ppa_w0: float = 1.0
    ppa_growth: float = 1.0
    ppa_z: float = 0.0

    def __post_init__(self):
        if self.kind not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.kind!r}")
        if self.size_mode not in ("exponential", "constant"):
            raise ValueError(f"unknown size mode {self.size_mode!r}")
        if self.theta is not None and not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        if self.constant_m < 1:
            raise ValueError("constant_m must be at least 1")
        if not (self.spline_fraction > 0):
            raise ValueError("spline_fraction must be positive")
        if self.eps_u_constant is not None and not (0.0 < self.eps_u_constant <= 0.5):
            raise ValueError("eps_u_constant must lie in (0, 1/2]")

    def resolved_theta(self, gamma: float) -> float:
        return (gamma + 1.0) / 2.0 if self.theta is None else self.theta


def size_schedule(cfg: ScheduleConfig, k: int, gamma: float = 0.5) -> tuple[int, int, float]:
    """(m, m', eps_u) for iteration k >= 1."""
    if k < 1:
        raise ValueError("iteration index must be at least 1")
    if cfg.size_mode == "exponential":
        growth = (1.0 / cfg.resolved_theta(gamma)) ** k
        m = math.ceil(growth)
        m_prime = math.ceil(cfg.spline_fraction * growth)
    else:
        m = cfg.constant_m
        m_prime = math.ceil(cfg.spline_fraction * m)
    if cfg.eps_u_constant is not None:
        eps_u = cfg.eps_u_constant
    else:
        eps_u = min(0.5, 1.0 / (2.0 * m))
    return m, max(m_prime, 1), eps_u


def _lower_level(eps_u: float) -> float:
    # 1 - sqrt(1-eps) without cancellation for tiny eps
    return eps_u / (1.0 + math.sqrt(1.0 - eps_u))


def quantile_box(mdp: MdpSpec, s, eta: ReturnApprox, eps_u: float) -> tuple[float, float]:
    """Interval guaranteed to carry mass >= 1 - 2*eps_u of T_s(eta).

    Endpoints are extremes over reachable (a, s') of the reward quantile plus
    gamma times the quantile of eta_{s'}, taken at levels 1 - sqrt(1-eps_u)
    and sqrt(1-eps_u).
    """
    if not (0.0 < eps_u <= 0.5):
        raise ValueError("eps_u must lie in (0, 1/2]")
    eta.check_for(mdp)
    si = mdp.state_index(s)
    entries = mdp.reachable(si)
    if not entries:
        raise ValueError(f"state {mdp.states[si]!r} has no reachable transition")
    u_lo = _lower_level(eps_u)
    u_hi = math.sqrt(1.0 - eps_u)
    x_min = math.inf
    x_max = -math.inf
    for a, s2, _ in entries:
        reward = mdp.reward(si, a, s2)
        comp = eta[s2]
        x_min = min(x_min, reward.quantile(u_lo) + mdp.gamma * comp.quantile(u_lo))
        x_max = max(x_max, reward.quantile(u_hi) + mdp.gamma * comp.quantile(u_hi))
    return x_min, x_max


def _box_grid(m: int, x_min: float, x_max: float) -> ProjectionParam:
    if x_min == x_max:
        # all mass concentrates at one point; a single-cell grid captures it
        return ProjectionParam(np.array([x_min]), np.empty(0))
    return xi_lin(m, (x_max - x_min) / 2.0, (x_max + x_min) / 2.0)


def ppa_params(cfg: ScheduleConfig, k: int) -> ProjectionParam:
    """Plain parameter algorithm: xi_lin(M(k), W(k), z), independent of eta and s."""
    if cfg.kind != "ppa":
        raise ValueError("ppa_params requires a ppa schedule")
    if k < 1:
        raise ValueError("iteration index must be at least 1")
    if cfg.ppa_growth < 1.0:
        raise ValueError("ppa width growth must be >= 1 (W nondecreasing)")
    m, _, _ = size_schedule(cfg, k)
    width = cfg.ppa_w0 * cfg.ppa_growth ** k
    return xi_lin(m, width, cfg.ppa_z)


def adp_params(mdp: MdpSpec, s, eta: ReturnApprox, k: int, cfg: ScheduleConfig) -> ProjectionParam:
    """Adaptive plain parameter algorithm: evenly spaced grid on the quantile box."""
    if cfg.kind != "adp":
        raise ValueError("adp_params requires an adp schedule")
    m, _, eps_u = size_schedule(cfg, k, mdp.gamma)
    x_min, x_max = quantile_box(mdp, s, eta, eps_u)
    return _box_grid(m, x_min, x_max)


def qsp_params(mdp: MdpSpec, s, eta: ReturnApprox, k: int, cfg: ScheduleConfig) -> ProjectionParam:
    """Quantile-spline parameter algorithm.

    Evaluates the CDF of T_s(eta) at m' evenly spaced interior points of the
    quantile box, anchors the inverse-CDF spline at (0, x_min) and (1, x_max),
    drops any (p, z) pair whose probability already occurred at a smaller z
    (keeping the first occurrence), and reads the grid off the spline at the
    levels (i-1)/(m-1) for supports and (2i-1)/(2m-2) for cuts.
    """
    if cfg.kind != "qsp":
        raise ValueError("qsp_params requires a qsp schedule")
    m, m_prime, _ = size_schedule(cfg, k, mdp.gamma)
    if m < 2:
        raise ValueError("qsp needs a grid size of at least 2")
    eps_u = min(0.5, 1.0 / (2.0 * m))
    x_min, x_max = quantile_box(mdp, s, eta, eps_u)
    if x_min == x_max:
        return ProjectionParam(np.array([x_min]), np.empty(0))
    zs = x_min + (x_max - x_min) * np.arange(m_prime + 2) / (m_prime + 1)
    probs = np.empty(m_prime + 2)
    probs[0] = 0.0
    probs[-1] = 1.0
    if m_prime > 0:
        interior = bellman_cdf(mdp, s, eta, zs[1:-1])
        # guard against rounding wiggles; the true mixture CDF is monotone
        probs[1:-1] = np.clip(np.maximum.accumulate(interior), 0.0, 1.0)
    keep = np.ones(probs.size, dtype=bool)
    keep[1:] = probs[1:] > probs[:-1]
    ps, zs = probs[keep], zs[keep]
    sup_levels = np.arange(m) / (m - 1.0)
    cut_levels = (2.0 * np.arange(1, m) - 1.0) / (2.0 * m - 2.0)
    xs = np.interp(sup_levels, ps, zs)
    ys = np.interp(cut_levels, ps, zs)
    return ProjectionParam(xs, ys)


def qdp_update(mdp: MdpSpec, s, eta: ReturnApprox, m: int) -> FiniteDist:
    """Quantile dynamic programming step: exact mid-quantiles with uniform weights."""
    if m < 1:
        raise ValueError("m must be at least 1")
    exact = materialize_bellman_finite(mdp, s, eta)
    levels = (2.0 * np.arange(1, m + 1) - 1.0) / (2.0 * m)
    points = exact.quantile(levels)
    return FiniteDist.from_particles(points, np.full(m, 1.0 / m))
