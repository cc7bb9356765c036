"""Iteration driver for the projected Bellman updates plus Monte-Carlo baselines.

Each iteration is two-phase: first all projection parameters are computed from
the previous approximation, then all states are updated.  Per-state work inside
a phase only reads immutable inputs, so it can be distributed over threads
(DDP_THREADS) without affecting results.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics as metrics_mod
from .bellman import ReturnApprox, project_bellman
from .distributions import Distribution, FiniteDist
from .mdp import MdpSpec, sample_truncated_return
from .projection import xi_stats
from .rng import substream
from .schedules import ScheduleConfig, adp_params, ppa_params, qdp_update, qsp_params, size_schedule


@dataclass
class RunConfig:
    schedule: ScheduleConfig
    max_iterations: int
    max_seconds: float | None = None
    initial: ReturnApprox | None = None
    metrics: list[str] = field(default_factory=list)
    ground_truth: list[Distribution] | None = None
    seed: int = 0
    trace_metrics: bool = False

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.max_seconds is not None and not (self.max_seconds > 0):
            raise ValueError("max_seconds must be positive")


@dataclass
class IterationRecord:
    k: int
    sizes: list[int]
    boxes: list[tuple[float, float] | None]
    total_particles: int
    seconds: float
    metric_values: dict[str, float] | None = None


@dataclass
class RunReport:
    algorithm: str
    records: list[IterationRecord]
    final: ReturnApprox
    metric_values: dict[str, float] | None = None
    wall_seconds: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.records)

    def to_dict(self, include_timing: bool = False) -> dict:
        """JSON-ready summary.  Timing is excluded by default so that equal-seed
        runs serialize byte-identically."""
        out = {
            "algorithm": self.algorithm,
            "iterations": self.iterations,
            "records": [
                {
                    "k": r.k,
                    "sizes": r.sizes,
                    "boxes": [list(b) if b is not None else None for b in r.boxes],
                    "total_particles": r.total_particles,
                    **({"metrics": {k: _json_float(v) for k, v in r.metric_values.items()}}
                       if r.metric_values else {}),
                }
                for r in self.records
            ],
            "final_total_particles": self.final.total_particles,
        }
        if self.metric_values is not None:
            out["metrics"] = {k: _json_float(v) for k, v in self.metric_values.items()}
        if include_timing:
            out["wall_seconds"] = self.wall_seconds
            out["iteration_seconds"] = [r.seconds for r in self.records]
        return out


def _json_float(v: float):
    return "inf" if v == float("inf") else v


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("DDP_THREADS", "1")))
    except ValueError:
        return 1


def _map_states(fn, n_states: int):
    workers = _worker_count()
    if workers == 1 or n_states == 1:
        return [fn(s) for s in range(n_states)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_states)))


def run_ddp(mdp: MdpSpec, cfg: RunConfig) -> RunReport:
    """Iterate parameter selection + projected Bellman update until the budget ends.

    Returns the last completely calculated approximation: the wall-clock budget
    is checked between iterations only, and an iteration in flight finishes.
    """
    schedule = replace(cfg.schedule, theta=cfg.schedule.resolved_theta(mdp.gamma))
    if schedule.kind == "qdp":
        for s in range(mdp.n_states):
            for a, s2, _ in mdp.reachable(s):
                if not mdp.reward(s, a, s2).is_step:
                    raise ValueError("QDP requires finitely supported rewards")
    eta = cfg.initial if cfg.initial is not None else ReturnApprox.all_dirac(mdp.n_states)
    eta.check_for(mdp)
    records: list[IterationRecord] = []
    start = time.perf_counter()
    for k in range(1, cfg.max_iterations + 1):
        if cfg.max_seconds is not None and time.perf_counter() - start > cfg.max_seconds:
            break
        t0 = time.perf_counter()
        if schedule.kind == "qdp":
            m_k, _, _ = size_schedule(schedule, k, mdp.gamma)
            new_states = _map_states(lambda s: qdp_update(mdp, s, eta, m_k), mdp.n_states)
            sizes = [m_k] * mdp.n_states
            boxes: list[tuple[float, float] | None] = [None] * mdp.n_states
        else:
            if schedule.kind == "ppa":
                params = [ppa_params(schedule, k) for _ in range(mdp.n_states)]
            elif schedule.kind == "adp":
                params = _map_states(lambda s: adp_params(mdp, s, eta, k, schedule),
                                     mdp.n_states)
            else:
                params = _map_states(lambda s: qsp_params(mdp, s, eta, k, schedule),
                                     mdp.n_states)
            new_states = _map_states(lambda s: project_bellman(mdp, s, eta, params[s]),
                                     mdp.n_states)
            sizes = [p.m for p in params]
            boxes = []
            for p in params:
                _, z, w = xi_stats(p)
                boxes.append((z - w, z + w))
        eta = ReturnApprox(new_states)
        record = IterationRecord(
            k=k,
            sizes=sizes,
            boxes=boxes,
            total_particles=sum(sizes),
            seconds=time.perf_counter() - t0,
        )
        if cfg.trace_metrics and cfg.ground_truth is not None and cfg.metrics:
            record.metric_values = compare(eta, cfg.ground_truth, cfg.metrics)
        records.append(record)
    metric_values = None
    if cfg.ground_truth is not None and cfg.metrics:
        metric_values = compare(eta, cfg.ground_truth, cfg.metrics)
    return RunReport(
        algorithm=schedule.kind,
        records=records,
        final=eta,
        metric_values=metric_values,
        wall_seconds=time.perf_counter() - start,
    )


def run_mc(mdp: MdpSpec, horizon: int, n_samples: int | None = None,
           particle_budget: int | None = None, max_seconds: float | None = None,
           seed: int = 0, chunk: int = 100_000) -> tuple[ReturnApprox, RunReport]:
    """Monte-Carlo baseline: empirical truncated-return distributions per state.

    Exactly one of n_samples, particle_budget or max_seconds chooses the sample
    count; particle_budget spreads a total particle count evenly over states
    (the MC2 sizing rule).  State s draws from its own counter-based substream,
    so outputs are independent of chunking and thread scheduling.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    given = [v is not None for v in (n_samples, particle_budget, max_seconds)]
    if sum(given) != 1:
        raise ValueError("specify exactly one of n_samples, particle_budget, max_seconds")
    if particle_budget is not None:
        n_samples = particle_budget // mdp.n_states
    if n_samples is not None and n_samples < 1:
        raise ValueError("sample budget must be positive")
    start = time.perf_counter()

    def one_state(s: int) -> FiniteDist:
        rng = substream(seed, s)
        draws: list[np.ndarray] = []
        drawn = 0
        while True:
            if n_samples is not None:
                todo = min(chunk, n_samples - drawn)
                if todo == 0:
                    break
            else:
                if drawn > 0 and time.perf_counter() - start > max_seconds:
                    break
                todo = chunk
            draws.append(sample_truncated_return(mdp, s, horizon, rng, size=todo))
            drawn += todo
        samples = np.concatenate(draws)
        return FiniteDist.from_particles(samples, np.full(samples.size, 1.0 / samples.size))

    eta = ReturnApprox(_map_states(one_state, mdp.n_states))
    sizes = [comp.size for comp in eta]
    record = IterationRecord(
        k=1,
        sizes=sizes,
        boxes=[None] * mdp.n_states,
        total_particles=sum(sizes),
        seconds=time.perf_counter() - start,
    )
    report = RunReport(
        algorithm="mc",
        records=[record],
        final=eta,
        wall_seconds=time.perf_counter() - start,
    )
    return eta, report


def compare(eta, ground_truth, metric_names) -> dict[str, float]:
    """Max-over-states value of each named metric between an approximation and a
    reference collection."""
    if isinstance(eta, RunReport):
        eta = eta.final
    first = list(eta)
    second = list(ground_truth)
    if len(first) != len(second):
        raise ValueError("state sets of approximation and ground truth differ")
    out: dict[str, float] = {}
    for name in metric_names:
        fn = metrics_mod.by_name(name)
        out[name] = metrics_mod.max_over_states(fn, first, second)
    return out
