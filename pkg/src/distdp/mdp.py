"""MDP-with-policy data model, validation and the truncated-return sampler."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist_mod
from .distributions import Distribution

_STOCHASTIC_TOL = 1e-9


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(self.violations)


class MdpSpec:
    """Finite MDP under a fixed policy: (states, actions, p, pi, gamma, rewards).

    State and action labels are arbitrary strings; all numerics use their dense
    indices in declaration order.  The instance is immutable after construction
    and safe to share across threads.
    """

    def __init__(self, states, actions, gamma, policy, transition, rewards):
        self.states = [str(s) for s in states]
        self.actions = [str(a) for a in actions]
        self.gamma = float(gamma)
        self.policy = np.asarray(policy, dtype=float)
        self.transition = np.asarray(transition, dtype=float)
        self.rewards = rewards  # nested [s][a][s'] of Distribution
        self._state_index = {s: i for i, s in enumerate(self.states)}
        # cumulative rows for inverse-transform sampling of actions / successors
        self._policy_cum = np.cumsum(self.policy, axis=1) if self.policy.ndim == 2 else None
        self._trans_cum = np.cumsum(self.transition, axis=2) if self.transition.ndim == 3 else None
        self._reachable: list[list[tuple[int, int, float]]] | None = None

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def state_index(self, s) -> int:
        if isinstance(s, str):
            try:
                return self._state_index[s]
            except KeyError:
                raise ValueError(f"unknown state {s!r}")
        i = int(s)
        if not 0 <= i < self.n_states:
            raise ValueError(f"state index {i} out of range")
        return i

    def reward(self, s: int, a: int, s2: int) -> Distribution:
        return self.rewards[s][a][s2]

    def reachable(self, s: int) -> list[tuple[int, int, float]]:
        """Pairs (a, s') with pi(a|s) * p(s'|s,a) > 0, with that product as weight."""
        if self._reachable is None:
            table = []
            for si in range(self.n_states):
                entries = []
                for a in range(self.n_actions):
                    pa = self.policy[si, a]
                    if pa <= 0.0:
                        continue
                    for s2 in range(self.n_states):
                        w = pa * self.transition[si, a, s2]
                        if w > 0.0:
                            entries.append((a, s2, w))
                table.append(entries)
            self._reachable = table
        return self._reachable[s]

    @classmethod
    def from_config(cls, config: dict) -> "MdpSpec":
        required = ("states", "actions", "gamma", "policy", "transition", "rewards")
        missing = [k for k in required if k not in config]
        if missing:
            raise ValueError(f"mdp config missing keys: {missing}")
        rewards = [
            [[dist_mod.from_config(cell) for cell in row] for row in plane]
            for plane in config["rewards"]
        ]
        return cls(config["states"], config["actions"], config["gamma"],
                   config["policy"], config["transition"], rewards)

    @classmethod
    def load(cls, path) -> "MdpSpec":
        with open(path) as fh:
            return cls.from_config(json.load(fh))

    def to_config(self) -> dict:
        return {
            "states": self.states,
            "actions": self.actions,
            "gamma": self.gamma,
            "policy": self.policy.tolist(),
            "transition": self.transition.tolist(),
            "rewards": [[[cell.to_config() for cell in row] for row in plane]
                        for plane in self.rewards],
        }


def validate(mdp: MdpSpec) -> ValidationReport:
    """Check stochasticity, discount and reward-table invariants; never raises."""
    v: list[str] = []
    nS, nA = mdp.n_states, mdp.n_actions
    if nS < 1:
        v.append("state set is empty")
    if nA < 1:
        v.append("action set is empty")
    if not (0.0 < mdp.gamma < 1.0):
        v.append(f"gamma outside (0,1): {mdp.gamma}")
    if mdp.policy.shape != (nS, nA):
        v.append(f"policy shape {mdp.policy.shape} != ({nS}, {nA})")
    else:
        if not np.all(np.isfinite(mdp.policy)):
            v.append("policy has non-finite entries")
        elif np.any(mdp.policy < 0):
            v.append("policy has negative entries")
        sums = mdp.policy.sum(axis=1)
        for s in np.nonzero(~(np.abs(sums - 1.0) <= _STOCHASTIC_TOL))[0]:
            v.append(f"policy row {mdp.states[s]} sums to {sums[s]:.12g}")
    if mdp.transition.shape != (nS, nA, nS):
        v.append(f"transition shape {mdp.transition.shape} != ({nS}, {nA}, {nS})")
    else:
        if not np.all(np.isfinite(mdp.transition)):
            v.append("transition tensor has non-finite entries")
        elif np.any(mdp.transition < 0):
            v.append("transition tensor has negative entries")
        sums = mdp.transition.sum(axis=2)
        for s, a in zip(*np.nonzero(~(np.abs(sums - 1.0) <= _STOCHASTIC_TOL))):
            v.append(f"transition slice ({mdp.states[s]}, {mdp.actions[a]}) sums to "
                     f"{sums[s, a]:.12g}")
    try:
        shape_ok = (len(mdp.rewards) == nS
                    and all(len(plane) == nA for plane in mdp.rewards)
                    and all(len(row) == nS for plane in mdp.rewards for row in plane))
    except TypeError:
        shape_ok = False
    if not shape_ok:
        v.append("reward table is not an [s][a][s'] nest of the right shape")
    else:
        for s in range(nS):
            for a in range(nA):
                for s2 in range(nS):
                    if not isinstance(mdp.rewards[s][a][s2], Distribution):
                        v.append(f"reward cell ({s},{a},{s2}) is not a distribution")
    return ValidationReport(ok=not v, violations=v)


def sample_truncated_return(mdp: MdpSpec, s, n: int, rng: np.random.Generator, size=None):
    """Discounted reward sum of trajectories of length n started in state s.

    Uses inverse-transform sampling with three uniforms per step (action,
    successor, reward).  With ``size`` given, trajectories are simulated in a
    vectorized batch; trajectory l consumes exactly the l-th row of the
    underlying (size, n, 3) uniform block, so results do not depend on how the
    batch is scheduled or chunked.
    """
    if n < 1:
        raise ValueError("horizon must be at least 1")
    si = mdp.state_index(s)
    scalar = size is None
    batch = 1 if scalar else int(size)
    uniforms = rng.random((batch, n, 3))
    np.maximum(uniforms, 2.0 ** -53, out=uniforms)
    out = _simulate_batch(mdp, si, n, uniforms)
    return float(out[0]) if scalar else out


def _simulate_batch(mdp: MdpSpec, si: int, n: int, uniforms: np.ndarray) -> np.ndarray:
    batch = uniforms.shape[0]
    nA, nS = mdp.n_actions, mdp.n_states
    states = np.full(batch, si, dtype=np.int64)
    total = np.zeros(batch)
    disc = 1.0
    for t in range(n):
        ua, us, ur = uniforms[:, t, 0], uniforms[:, t, 1], uniforms[:, t, 2]
        # count of cumulative probabilities <= u is the sampled index
        acts = (mdp._policy_cum[states] <= ua[:, None]).sum(axis=1)
        np.clip(acts, 0, nA - 1, out=acts)
        succ = (mdp._trans_cum[states, acts] <= us[:, None]).sum(axis=1)
        np.clip(succ, 0, nS - 1, out=succ)
        rewards = np.empty(batch)
        cell = (states * nA + acts) * nS + succ
        for key in np.unique(cell):
            mask = cell == key
            s, rem = divmod(int(key), nA * nS)
            a, s2 = divmod(rem, nS)
            rewards[mask] = mdp.rewards[s][a][s2].quantile(ur[mask])
        total += disc * rewards
        disc *= mdp.gamma
        states = succ
    return total
