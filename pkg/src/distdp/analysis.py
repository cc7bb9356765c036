"""Closed-form bound calculators, trade-off curves and the circular ground truth.

Everything here evaluates formulas; nothing iterates the Bellman operator.
The calculators mirror the decay/tail hypotheses they come with: polynomial
moments, exponential moments, or bounded support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Cauchy, Dirac, Distribution, Normal


@dataclass(frozen=True)
class MomentInfo:
    """Reward-moment hypothesis: exactly one of the three tail regimes.

    kind = "polynomial": E|R - (1-gamma)z|^alpha <= value for all transitions.
    kind = "exponential": E[exp(lam*|R - (1-gamma)z|)] <= value.
    kind = "bounded": rewards lie in [r_min, r_max] almost surely.
    """

    kind: str
    alpha: float = 0.0
    lam: float = 0.0
    value: float = 0.0
    r_min: float = 0.0
    r_max: float = 0.0

    def __post_init__(self):
        if self.kind not in ("polynomial", "exponential", "bounded"):
            raise ValueError(f"unknown moment hypothesis {self.kind!r}")
        if self.kind == "polynomial" and not (self.alpha > 0 and self.value >= 0):
            raise ValueError("polynomial hypothesis needs alpha > 0 and a moment value")
        if self.kind == "exponential" and not (self.lam > 0 and self.value >= 1.0):
            raise ValueError("exponential hypothesis needs lam > 0 and a moment value >= 1")
        if self.kind == "bounded" and not (self.r_max >= self.r_min):
            raise ValueError("bounded hypothesis needs r_min <= r_max")


@dataclass(frozen=True)
class AnalysisConfig:
    gamma: float
    c: float = 1.0
    v_min: float = 0.0
    v_max: float = 1.0
    moment: MomentInfo | None = None

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")
        if not (self.c > 0):
            raise ValueError("homogeneity order c must be positive")
        if not (self.v_max >= self.v_min):
            raise ValueError("need v_min <= v_max")

    @property
    def gamma_c(self) -> float:
        return self.gamma ** self.c

    @property
    def span(self) -> float:
        return self.v_max - self.v_min


# ---------------------------------------------------------------------------
# accumulated-projection-error bounds

def polylog_neg(r: float, z: float) -> float:
    """Polylogarithm of negative order: Li_{-r}(z) = sum_{k>=1} k^r z^k for 0 < z < 1."""
    if not (0.0 < z < 1.0):
        raise ValueError("z must lie in (0, 1)")
    if not (r > 0):
        raise ValueError("r must be positive")
    # terms rise until k ~ r/ln(1/z); never stop on the rising flank
    k_peak = r / math.log(1.0 / z)
    total = 0.0
    k = 1
    while True:
        term = k ** r * z ** k
        total += term
        if k > k_peak and term <= 1e-15 * total:
            return total
        k += 1
        if k > 10_000_000:
            raise RuntimeError("polylog series did not converge")


def ape_bound(pattern: tuple, gamma_c: float, n: int) -> float:
    """Accumulated projection error bound for a per-step error decay pattern.

    pattern is ("constant", D), ("polynomial", D, r) or ("exponential", D, theta);
    the exponential case distinguishes theta below, at and above gamma_c.
    """
    if not (0.0 < gamma_c < 1.0):
        raise ValueError("gamma_c must lie in (0, 1)")
    kind = pattern[0]
    if kind == "constant":
        (_, D) = pattern
        return D / (1.0 - gamma_c)
    if kind == "polynomial":
        (_, D, r) = pattern
        if n < 1:
            raise ValueError("n must be at least 1")
        return D * polylog_neg(r, gamma_c) / gamma_c * n ** (-r)
    if kind == "exponential":
        (_, D, theta) = pattern
        if not (0.0 < theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        if theta < gamma_c:
            return D / (gamma_c / theta - 1.0) * gamma_c ** n
        if theta == gamma_c:
            return D * n * gamma_c ** n
        return D / (1.0 - gamma_c / theta) * theta ** n
    raise ValueError(f"unknown decay pattern {kind!r}")


# ---------------------------------------------------------------------------
# size-schedule trade-off (error bound vs time budget)

@dataclass(frozen=True)
class SizeFunction:
    """Iteration-size function M(k): exponential ceil((1/theta)^k) or constant m."""

    kind: str
    theta: float = 0.0
    m: int = 0

    def __post_init__(self):
        if self.kind == "exponential":
            if not (0.0 < self.theta < 1.0):
                raise ValueError("theta must lie in (0, 1)")
        elif self.kind == "constant":
            if self.m < 1:
                raise ValueError("constant size must be at least 1")
        else:
            raise ValueError(f"unknown size function {self.kind!r}")

    def __call__(self, k: int) -> int:
        if self.kind == "constant":
            return self.m
        return math.ceil((1.0 / self.theta) ** k)

    @property
    def label(self) -> str:
        return f"exp:{self.theta:g}" if self.kind == "exponential" else f"const:{self.m}"


def error_bound(acfg: AnalysisConfig, size_fn: SizeFunction, n: int) -> float:
    """e(n): discounted sum of halved cell widths plus the initial-error decay term."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    span = acfg.span
    if size_fn.kind == "constant":
        g = acfg.gamma
        gn = g ** n
        return span * ((1.0 - gn) / (2.0 * size_fn.m * (1.0 - g)) + gn)
    acc = 0.0
    for k in range(1, n + 1):
        acc += acfg.gamma ** (n - k) * span / (2.0 * size_fn(k))
    return acc + acfg.gamma ** n * span


def constant_m_error_bound(acfg: AnalysisConfig, m: int, n: int) -> float:
    """Closed-form footnote bound span * (1/(2m(1-gamma)) + gamma^n) for constant sizes."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return acfg.span * (1.0 / (2.0 * m * (1.0 - acfg.gamma)) + acfg.gamma ** n)


def time_cost(size_fn: SizeFunction, n: int) -> float:
    """time(n) = sum_{k<=n} M(k) * log(M(k))."""
    if size_fn.kind == "constant":
        return n * size_fn.m * math.log(size_fn.m) if size_fn.m > 1 else 0.0
    total = 0.0
    for k in range(1, n + 1):
        mk = size_fn(k)
        total += mk * math.log(mk)
    return total


def iterations_within(size_fn: SizeFunction, T: float) -> int:
    """n(T): the largest n with time(n) <= T (zero iterations always fit)."""
    if size_fn.kind == "constant":
        per = size_fn.m * math.log(size_fn.m)
        if per <= 0.0:
            raise ValueError("constant size 1 has zero cost; n(T) is unbounded")
        return max(int(T / per), 0)
    total = 0.0
    n = 0
    while True:
        nxt = size_fn(n + 1)
        step = nxt * math.log(nxt)
        if total + step > T:
            return n
        total += step
        n += 1


def tradeoff_curve(acfg: AnalysisConfig, size_fns, t_grid) -> list[dict]:
    """Rows (schedule, T, n(T), e(n(T))) for plotting the budgeted error curves."""
    rows = []
    for fn in size_fns:
        for T in t_grid:
            n = iterations_within(fn, T)
            rows.append({"schedule": fn.label, "T": float(T), "n": n,
                         "e": error_bound(acfg, fn, n)})
    return rows


def log_time_grid(size_fn: SizeFunction, n_max: int, points: int = 200) -> np.ndarray:
    """Logarithmic budget grid spanning time(1)..time(n_max) of a reference schedule."""
    lo = max(time_cost(size_fn, 1), 1e-9)
    hi = time_cost(size_fn, n_max)
    return np.geomspace(lo, hi, points)


def qdp_tradeoff(acfg: AnalysisConfig, size_fn: SizeFunction, n: int | None = None,
                 T: float | None = None) -> dict:
    """Evaluate e(n), time(n) and n(T) for one schedule; n or T may be given."""
    out: dict = {"schedule": size_fn.label}
    if n is not None:
        out["e"] = error_bound(acfg, size_fn, n)
        out["time"] = time_cost(size_fn, n)
    if T is not None:
        n_t = iterations_within(size_fn, T)
        out["n_of_T"] = n_t
        out["e_of_T"] = error_bound(acfg, size_fn, n_t)
    return out


# ---------------------------------------------------------------------------
# tail and projection-error bounds

def _beta_fn(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def tail_bound(moment: MomentInfo, w: float, beta: float, flavor: str) -> float:
    """Upper bound on the tail integral outside a half-width-w window.

    flavor "w" bounds integral of x^(beta-1) P(|X-z| > w+x) dx; flavor "l"
    bounds integral of P(|X-z| > w+x)^beta dx.  The moment value is understood
    as a bound about the same center z as the window.
    """
    if not (w > 0):
        raise ValueError("w must be positive")
    if flavor not in ("w", "l"):
        raise ValueError("flavor must be 'w' or 'l'")
    if moment.kind == "bounded":
        return 0.0
    if flavor == "w":
        if not (beta > 0):
            raise ValueError("flavor 'w' needs beta > 0")
        if moment.kind == "polynomial":
            if not moment.alpha > beta:
                raise ValueError("polynomial tail bound needs alpha > beta")
            return _beta_fn(beta, moment.alpha - beta) * moment.value / w ** (moment.alpha - beta)
        return math.gamma(beta) * moment.value / (moment.lam ** beta * math.exp(moment.lam * w))
    if not (beta >= 1):
        raise ValueError("flavor 'l' needs beta >= 1")
    if moment.kind == "polynomial":
        if not moment.alpha * beta > 1:
            raise ValueError("polynomial tail bound needs alpha*beta > 1")
        return moment.value ** beta / ((moment.alpha * beta - 1.0) * w ** (moment.alpha * beta - 1.0))
    return moment.value ** beta / (moment.lam * beta * math.exp(moment.lam * beta * w))


def pe_bound(acfg: AnalysisConfig, M, W, z: float, k: int, beta: float,
             flavor: str = "w") -> float:
    """Per-step projection error bound 4*max{delta(k)^e, T(k)} for a PPA schedule.

    M and W are the size and half-width functions; the tail term T(k) follows
    the moment hypothesis of acfg with the (1-gamma)-scaled window.
    """
    if acfg.moment is None:
        raise ValueError("pe_bound needs a moment hypothesis in the analysis config")
    mk = M(k)
    wk = W(k)
    if mk < 2:
        raise ValueError("pe_bound needs M(k) >= 2")
    delta_k = 2.0 * wk / (mk - 1.0)
    one_v_beta = max(1.0, beta)
    moment = acfg.moment
    scaled_w = (1.0 - acfg.gamma) * wk
    if moment.kind == "bounded":
        lo = moment.r_min / (1.0 - acfg.gamma)
        hi = moment.r_max / (1.0 - acfg.gamma)
        if not (z - wk <= lo and hi <= z + wk):
            raise ValueError("bounded-case bound needs the value interval inside [z-W, z+W]")
        tail_term = 0.0
    elif flavor == "w":
        tail_term = tail_bound(moment, scaled_w, beta, "w") ** (1.0 / one_v_beta)
    else:
        tail_term = tail_bound(moment, scaled_w, beta, "l") ** (1.0 / beta)
    if flavor == "w":
        grid_term = delta_k ** (beta / one_v_beta)
    else:
        if not (beta >= 1):
            raise ValueError("flavor 'l' needs beta >= 1")
        grid_term = delta_k ** (1.0 / beta)
    return 4.0 * max(grid_term, tail_term)


def moment_quantile_bound(alpha: float, abs_moment: float, u: float) -> tuple[float, float]:
    """Two-sided quantile envelope from a finite absolute moment of order alpha."""
    if not (alpha > 0):
        raise ValueError("alpha must be positive")
    if abs_moment < 0:
        raise ValueError("absolute moment must be nonnegative")
    if not (0.0 < u < 1.0):
        raise ValueError("u must lie in (0, 1)")
    d = abs_moment ** (1.0 / alpha)
    return (-d / u ** (1.0 / alpha), d / (1.0 - u) ** (1.0 / alpha))


def adp_exponents(alpha: float) -> tuple[float, float]:
    """Finite-alpha growth exponents (for M and eps_u) behind the adaptive schedule.

    The shipped default corresponds to the alpha -> infinity limit (1, 1).
    """
    if not (alpha > 0):
        raise ValueError("alpha must be positive")
    h = ((alpha + 1.0) / alpha) ** 2
    return h, (alpha + 1.0) / alpha


# ---------------------------------------------------------------------------
# analytic ground truth of the circular three-state experiment

def circular_reference(reward_params, family: str, gamma: float) -> list[Distribution]:
    """Fixed-point return distributions of the deterministic three-state cycle.

    reward_params are three (location, scale) pairs for the transitions
    1->2, 2->3, 3->1; scale means variance for the normal family and the
    Cauchy scale otherwise.  State s sees the rewards in cyclic order starting
    from its own outgoing transition, discounted around the loop.
    """
    if family not in ("normal", "cauchy"):
        raise ValueError("closed-form fixed point exists for normal and cauchy families only")
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    params = [(float(a), float(b)) for a, b in reward_params]
    if len(params) != 3:
        raise ValueError("need exactly three reward parameter pairs")
    if any(b < 0 for _, b in params):
        raise ValueError("scale parameters must be nonnegative")
    out: list[Distribution] = []
    g3 = 1.0 - gamma ** 3
    g6 = 1.0 - gamma ** 6
    for s in range(3):
        locs = [params[(s + t) % 3][0] for t in range(3)]
        scs = [params[(s + t) % 3][1] for t in range(3)]
        loc = (locs[0] + gamma * locs[1] + gamma ** 2 * locs[2]) / g3
        if family == "normal":
            scale = (scs[0] + gamma ** 2 * scs[1] + gamma ** 4 * scs[2]) / g6
        else:
            scale = (scs[0] + gamma * scs[1] + gamma ** 2 * scs[2]) / g3
        if scale == 0.0:
            out.append(Dirac(loc))
        elif family == "normal":
            out.append(Normal(loc, scale))
        else:
            out.append(Cauchy(loc, scale))
    return out
