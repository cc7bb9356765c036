"""Distributional Bellman operator: CDF evaluation, exact materialization, projection.

For a state s and a collection eta of finitely supported per-state return
approximations, the distribution T_s(eta) is the mixture over reachable
transitions (a, s') of the reward distribution shifted by gamma times each
particle of eta_{s'}.  Its CDF is therefore a weighted sum of reward-CDF
evaluations, which is what the kernel in _kernels.py computes.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .distributions import Dirac, Distribution, FiniteDist
from .mdp import MdpSpec
from .projection import ProjectionParam

MAX_MATERIALIZED_ATOMS = 10 ** 7

_FAMILY_CODE = {
    "dirac": _kernels.DIRAC,
    "finite": _kernels.FINITE,
    "normal": _kernels.NORMAL,
    "cauchy": _kernels.CAUCHY,
    "uniform": _kernels.UNIFORM,
    "exponential": _kernels.EXPONENTIAL,
}


class ReturnApprox:
    """Per-state collection of finitely supported return approximations."""

    def __init__(self, per_state):
        per_state = list(per_state)
        if not per_state:
            raise ValueError("need at least one state component")
        for comp in per_state:
            if not isinstance(comp, FiniteDist):
                raise ValueError("every component must be a FiniteDist")
        self.per_state = per_state

    @classmethod
    def all_dirac(cls, n_states: int, value: float = 0.0) -> "ReturnApprox":
        return cls([FiniteDist([value], [1.0]) for _ in range(n_states)])

    def __getitem__(self, s: int) -> FiniteDist:
        return self.per_state[s]

    def __len__(self) -> int:
        return len(self.per_state)

    def __iter__(self):
        return iter(self.per_state)

    @property
    def total_particles(self) -> int:
        return sum(comp.size for comp in self.per_state)

    def check_for(self, mdp: MdpSpec) -> None:
        if len(self.per_state) != mdp.n_states:
            raise ValueError(
                f"approximation has {len(self.per_state)} components for "
                f"{mdp.n_states} states"
            )


def _reward_params(reward: Distribution):
    """(kind, p0, p1, atom_points, atom_cumweights) encoding for the kernel."""
    kind = _FAMILY_CODE[reward.kind]
    empty = np.empty(0)
    if isinstance(reward, Dirac):
        return kind, reward.point, 0.0, empty, empty
    if isinstance(reward, FiniteDist):
        return kind, 0.0, 0.0, reward.points, reward.cum
    cfg = reward.to_config()
    if reward.kind == "normal":
        return kind, cfg["mu"], reward.sigma, empty, empty
    if reward.kind == "cauchy":
        return kind, cfg["mu"], cfg["scale"], empty, empty
    if reward.kind == "uniform":
        return kind, cfg["a"], cfg["b"], empty, empty
    if reward.kind == "exponential":
        return kind, cfg["rate"], 0.0, empty, empty
    raise ValueError(f"unsupported reward family {reward.kind!r}")


def _build_pack(mdp: MdpSpec, s: int, eta: ReturnApprox):
    """Flatten the reachable transitions of s into kernel-ready arrays."""
    entries = mdp.reachable(s)
    if not entries:
        raise ValueError(f"state {mdp.states[s]!r} has no reachable transition")
    nt = len(entries)
    tw = np.empty(nt)
    kind = np.empty(nt, dtype=np.int64)
    p0 = np.empty(nt)
    p1 = np.empty(nt)
    aoff = np.zeros(nt + 1, dtype=np.int64)
    zoff = np.zeros(nt + 1, dtype=np.int64)
    ax_parts, ac_parts, z_parts, zw_parts = [], [], [], []
    for t, (a, s2, w) in enumerate(entries):
        tw[t] = w
        k, q0, q1, atoms_x, atoms_c = _reward_params(mdp.reward(s, a, s2))
        kind[t] = k
        p0[t] = q0
        p1[t] = q1
        ax_parts.append(atoms_x)
        ac_parts.append(atoms_c)
        aoff[t + 1] = aoff[t] + atoms_x.size
        comp = eta[s2]
        z_parts.append(comp.points)
        zw_parts.append(comp.weights)
        zoff[t + 1] = zoff[t] + comp.size
    ax = np.concatenate(ax_parts) if ax_parts else np.empty(0)
    ac = np.concatenate(ac_parts) if ac_parts else np.empty(0)
    z = np.concatenate(z_parts)
    zw = np.concatenate(zw_parts)
    return tw, kind, p0, p1, aoff, ax, ac, zoff, z, zw


def bellman_cdf(mdp: MdpSpec, s, eta: ReturnApprox, x, backend: str | None = None):
    """Exact CDF of T_s(eta) at x (scalar or array)."""
    eta.check_for(mdp)
    si = mdp.state_index(s)
    pack = _build_pack(mdp, si, eta)
    queries = np.atleast_1d(np.asarray(x, dtype=float))
    out = _kernels.mixture_cdf(queries, mdp.gamma, *pack, backend=backend)
    return float(out[0]) if np.ndim(x) == 0 else out


def materialize_bellman_finite(mdp: MdpSpec, s, eta: ReturnApprox) -> FiniteDist:
    """Exact finite representation of T_s(eta); requires finitely supported rewards.

    The atom count is m * |A| * |S| * N before merging and is capped to guard
    against the exponential blow-up of repeated exact iteration.
    """
    eta.check_for(mdp)
    si = mdp.state_index(s)
    entries = mdp.reachable(si)
    if not entries:
        raise ValueError(f"state {mdp.states[s]!r} has no reachable transition")
    n_atoms = 0
    for a, s2, _ in entries:
        reward = mdp.reward(si, a, s2)
        if not reward.is_step:
            raise ValueError(
                "materialize_bellman_finite requires finitely supported rewards; "
                f"transition ({mdp.states[si]},{mdp.actions[a]},{mdp.states[s2]}) "
                f"has a {reward.kind} reward"
            )
        n_r = reward.size if isinstance(reward, FiniteDist) else 1
        n_atoms += n_r * eta[s2].size
    if n_atoms > MAX_MATERIALIZED_ATOMS:
        raise ValueError(
            f"materialization would create {n_atoms} atoms "
            f"(cap {MAX_MATERIALIZED_ATOMS})"
        )
    points = np.empty(n_atoms)
    weights = np.empty(n_atoms)
    pos = 0
    for a, s2, w in entries:
        reward = mdp.reward(si, a, s2)
        if isinstance(reward, FiniteDist):
            r_pts, r_wts = reward.points, reward.weights
        else:
            r_pts, r_wts = np.array([reward.point]), np.array([1.0])
        comp = eta[s2]
        block = r_pts[:, None] + mdp.gamma * comp.points[None, :]
        wblock = w * r_wts[:, None] * comp.weights[None, :]
        count = block.size
        points[pos:pos + count] = block.ravel()
        weights[pos:pos + count] = wblock.ravel()
        pos += count
    return FiniteDist.from_particles(points, weights)


def project_bellman(mdp: MdpSpec, s, eta: ReturnApprox, xi: ProjectionParam,
                    backend: str | None = None) -> FiniteDist:
    """Projected Bellman update Pi(T_s(eta), xi) via reward-CDF differences.

    The cell weights are consecutive values of the mixture CDF at the cut
    points, so they are nonnegative and sum to one up to floating rounding;
    negative rounding residues up to 1e-9 are clipped to zero, anything larger
    signals a broken CDF and raises.
    """
    eta.check_for(mdp)
    si = mdp.state_index(s)
    if xi.m == 1:
        return FiniteDist(xi.xs.copy(), np.array([1.0]))
    pack = _build_pack(mdp, si, eta)
    cuts = _kernels.mixture_cdf(xi.ys, mdp.gamma, *pack, backend=backend)
    bounds = np.empty(xi.m + 1)
    bounds[0] = 0.0
    bounds[1:-1] = cuts
    bounds[-1] = 1.0
    weights = np.diff(bounds)
    worst = weights.min()
    if worst < -1e-9:
        raise ValueError(f"projected weight {worst!r} below -1e-9; reward CDF not monotone")
    np.clip(weights, 0.0, 1.0, out=weights)
    total = weights.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"projected weights sum to {total!r}, expected 1 within 1e-9")
    return FiniteDist.from_particles(xi.xs, weights / total)
