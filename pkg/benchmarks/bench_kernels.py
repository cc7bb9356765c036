"""Benchmark the mixture-CDF kernel: numba backend vs pure-numpy fallback.

The workload mirrors one projected Bellman update of the three-state
experiment: per state, evaluate the transition-mixture CDF of a normal-reward
MDP at m-1 cut points with m particles per successor state.

Usage: python benchmarks/bench_kernels.py [--sizes 256,1024,4096] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from distdp import Normal, ReturnApprox, xi_lin
from distdp._kernels import ACTIVE_BACKEND, mixture_cdf
from distdp.bellman import _build_pack
from distdp.distributions import FiniteDist
from distdp.mdp import MdpSpec


def build_workload(m: int):
    reward = Normal(-3.0, 1.0)
    mdp = MdpSpec(["s"], ["a"], 0.7, [[1.0]], [[[1.0]]], [[[reward]]])
    points = np.linspace(-10.0, 10.0, m)
    eta = ReturnApprox([FiniteDist(points, np.full(m, 1.0 / m))])
    pack = _build_pack(mdp, 0, eta)
    queries = xi_lin(m, 10.0, 0.0).ys
    return queries, mdp.gamma, pack


def time_backend(backend: str, queries, gamma, pack, repeat: int) -> float:
    mixture_cdf(queries, gamma, *pack, backend=backend)  # warm-up / JIT compile
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        mixture_cdf(queries, gamma, *pack, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,1024,4096")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",")]
    backends = ["numpy"] + (["numba"] if ACTIVE_BACKEND == "numba" else [])
    print(f"active backend: {ACTIVE_BACKEND}")
    print(f"{'m':>8} " + " ".join(f"{b + ' (s)':>14}" for b in backends) + f" {'speedup':>9}")
    for m in sizes:
        queries, gamma, pack = build_workload(m)
        times = {b: time_backend(b, queries, gamma, pack, args.repeat) for b in backends}
        row = f"{m:>8} " + " ".join(f"{times[b]:>14.6f}" for b in backends)
        if len(backends) == 2:
            row += f" {times['numpy'] / times['numba']:>8.2f}x"
        print(row)


if __name__ == "__main__":
    main()
