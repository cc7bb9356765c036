"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library code paths they are used to
check: projection by per-atom cell assignment, Wasserstein by greedy mass
transport on sorted particle lists, integrals by scipy quadrature.
"""

from __future__ import annotations

import numpy as np

from distdp import Cauchy, Dirac, FiniteDist, MdpSpec, Normal, circular_reference


def build_mdp_i() -> MdpSpec:
    rewards_on_cycle = [Normal(-3.0, 1.0), Normal(5.0, 2.0), Normal(0.0, 0.5)]
    return _circular_mdp(rewards_on_cycle)


def build_mdp_ii() -> MdpSpec:
    rewards_on_cycle = [Cauchy(-3.0, 0.5), Cauchy(5.0, 0.1), Cauchy(0.0, 5.0)]
    return _circular_mdp(rewards_on_cycle)


def truth_i():
    return circular_reference([(-3, 1), (5, 2), (0, 0.5)], "normal", 0.7)


def truth_ii():
    return circular_reference([(-3, 0.5), (5, 0.1), (0, 5)], "cauchy", 0.7)


def _circular_mdp(cycle_rewards) -> MdpSpec:
    zero = Dirac(0.0)
    rewards = [[[zero for _ in range(3)]] for _ in range(3)]
    transition = np.zeros((3, 1, 3))
    for s in range(3):
        nxt = (s + 1) % 3
        transition[s, 0, nxt] = 1.0
        rewards[s][0][nxt] = cycle_rewards[s]
    return MdpSpec(["1", "2", "3"], ["a"], 0.7, [[1.0]] * 3, transition, rewards)


def self_loop_mdp(reward, gamma=0.5) -> MdpSpec:
    return MdpSpec(["s"], ["a"], gamma, [[1.0]], [[[1.0]]], [[[reward]]])


def random_finite(rng: np.random.Generator, max_atoms: int = 5,
                  span: float = 4.0) -> FiniteDist:
    m = int(rng.integers(1, max_atoms + 1))
    points = np.sort(rng.uniform(-span, span, m))
    weights = rng.uniform(0.1, 1.0, m)
    return FiniteDist.from_particles(points, weights / weights.sum())


def random_finite_mdp(rng: np.random.Generator, max_states: int = 4,
                      max_actions: int = 4, max_atoms: int = 5) -> MdpSpec:
    nS = int(rng.integers(1, max_states + 1))
    nA = int(rng.integers(1, max_actions + 1))
    gamma = float(rng.uniform(0.3, 0.9))
    policy = rng.uniform(0.05, 1.0, (nS, nA))
    policy /= policy.sum(axis=1, keepdims=True)
    transition = rng.uniform(0.05, 1.0, (nS, nA, nS))
    transition /= transition.sum(axis=2, keepdims=True)
    rewards = [
        [
            [random_finite(rng, max_atoms) if rng.random() < 0.8 else Dirac(float(rng.normal()))
             for _ in range(nS)]
            for _ in range(nA)
        ]
        for _ in range(nS)
    ]
    states = [f"s{i}" for i in range(nS)]
    actions = [f"a{i}" for i in range(nA)]
    return MdpSpec(states, actions, gamma, policy, transition, rewards)


def random_approx(rng: np.random.Generator, mdp: MdpSpec, max_atoms: int = 5):
    from distdp import ReturnApprox

    return ReturnApprox([random_finite(rng, max_atoms) for _ in range(mdp.n_states)])


# ---------------------------------------------------------------------------
# oracles

def project_oracle(finite: FiniteDist, xi) -> FiniteDist:
    """Push each atom to the representative of its half-open cell (y_{i-1}, y_i]."""
    cells = np.searchsorted(xi.ys, finite.points, side="left")
    weights = np.zeros(xi.m)
    np.add.at(weights, cells, finite.weights)
    return FiniteDist.from_particles(xi.xs, weights)


def transport_oracle(mu: FiniteDist, nu: FiniteDist, beta: float) -> float:
    """Greedy monotone mass transport between sorted particle lists."""
    i = j = 0
    left_mu = mu.weights.astype(float).copy()
    left_nu = nu.weights.astype(float).copy()
    cost = 0.0
    while i < mu.points.size and j < nu.points.size:
        moved = min(left_mu[i], left_nu[j])
        cost += moved * abs(mu.points[i] - nu.points[j]) ** beta
        left_mu[i] -= moved
        left_nu[j] -= moved
        if left_mu[i] <= 0:
            i += 1
        if left_nu[j] <= 0:
            j += 1
    return cost ** (1.0 / beta) if beta >= 1.0 else cost
