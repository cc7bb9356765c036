import math
import os

import numpy as np
import pytest

from distdp import (
    Dirac,
    FiniteDist,
    Normal,
    ReturnApprox,
    RunConfig,
    ScheduleConfig,
    compare,
    materialize_bellman_finite,
    run_ddp,
    run_mc,
    wasserstein,
)
from helpers import self_loop_mdp


def adp_config(**kw):
    defaults = dict(schedule=ScheduleConfig(kind="adp", theta=0.85), max_iterations=10)
    defaults.update(kw)
    return RunConfig(**defaults)


def test_zero_reward_fixed_point(mdp_i):
    zero = Dirac(0.0)
    rewards = [[[zero for _ in range(3)]] for _ in range(3)]
    mdp = type(mdp_i)(mdp_i.states, mdp_i.actions, mdp_i.gamma,
                      mdp_i.policy, mdp_i.transition, rewards)
    schedules = [
        # PPA needs 0 on its grid to represent the point mass, hence odd constant m
        ScheduleConfig(kind="ppa", size_mode="constant", constant_m=5, ppa_z=0.0),
        ScheduleConfig(kind="adp", theta=0.85),
        ScheduleConfig(kind="qsp", theta=0.85),
        ScheduleConfig(kind="qdp", theta=0.85),
    ]
    for schedule in schedules:
        report = run_ddp(mdp, RunConfig(schedule=schedule, max_iterations=5))
        for comp in report.final:
            assert comp.cdf(0.0) - comp.cdf_left(0.0) == 1.0, schedule.kind


def test_self_loop_geometric_fixed_point():
    # mass concentrates at the geometric sum 2 (the iterate stays a single atom,
    # so concentration is measured in w1; KS of two distinct atoms is always 1)
    mdp = self_loop_mdp(Dirac(1.0), gamma=0.5)
    report = run_ddp(mdp, adp_config(max_iterations=30))
    assert wasserstein(report.final[0], Dirac(2.0), 1.0) <= 0.01
    assert abs(report.final[0].points[-1] - 2.0) <= 1e-6


def test_zero_iterations_returns_initial():
    mdp = self_loop_mdp(Dirac(1.0))
    initial = ReturnApprox([FiniteDist([5.0], [1.0])])
    report = run_ddp(mdp, adp_config(max_iterations=0, initial=initial))
    assert report.iterations == 0
    assert report.final[0].points[0] == 5.0


def test_qdp_requires_finite_rewards():
    mdp = self_loop_mdp(Normal(0, 1))
    cfg = RunConfig(schedule=ScheduleConfig(kind="qdp", theta=0.85), max_iterations=3)
    with pytest.raises(ValueError, match="finitely supported"):
        run_ddp(mdp, cfg)


def test_two_phase_matches_manual_driver(mdp_i):
    # replicate three iterations by hand: all parameters first, then all updates
    from distdp import adp_params, project_bellman

    schedule = ScheduleConfig(kind="adp", theta=0.85)
    report = run_ddp(mdp_i, RunConfig(schedule=schedule, max_iterations=3))
    eta = ReturnApprox.all_dirac(3)
    for k in (1, 2, 3):
        params = [adp_params(mdp_i, s, eta, k, schedule) for s in range(3)]
        eta = ReturnApprox([project_bellman(mdp_i, s, eta, params[s]) for s in range(3)])
    for got, want in zip(report.final, eta):
        assert np.array_equal(got.points, want.points)
        assert np.array_equal(got.weights, want.weights)


def test_extending_budget_preserves_prefix(mdp_i):
    short = run_ddp(mdp_i, adp_config(max_iterations=6))
    long = run_ddp(mdp_i, adp_config(max_iterations=10))
    assert [r.sizes for r in long.records[:6]] == [r.sizes for r in short.records]
    assert [r.boxes for r in long.records[:6]] == [r.boxes for r in short.records]


def test_record_particle_counts(mdp_i):
    report = run_ddp(mdp_i, adp_config(max_iterations=5))
    for r in report.records:
        assert r.total_particles == sum(r.sizes)
        assert len(r.sizes) == 3
    assert [r.k for r in report.records] == [1, 2, 3, 4, 5]


def test_trace_metrics(mdp_i, ground_truth_i):
    cfg = adp_config(max_iterations=4, metrics=["ks"], ground_truth=ground_truth_i,
                     trace_metrics=True)
    report = run_ddp(mdp_i, cfg)
    traced = [r.metric_values["ks"] for r in report.records]
    assert len(traced) == 4
    assert traced[-1] < traced[0]
    assert report.metric_values["ks"] == pytest.approx(traced[-1])


def test_ape_recursion_and_error_bound():
    # small two-atom reward keeps exact iteration tractable for a near-exact eta*
    reward = FiniteDist([-1.0, 2.0], [0.5, 0.5])
    gamma = 0.4
    mdp = self_loop_mdp(reward, gamma=gamma)
    star = ReturnApprox.all_dirac(1)
    for _ in range(20):
        star = ReturnApprox([materialize_bellman_finite(mdp, 0, star)])
    eta_star = star[0]

    schedule = ScheduleConfig(kind="adp", theta=0.7)
    cfg = RunConfig(schedule=schedule, max_iterations=12)
    from distdp import adp_params, project_bellman

    eta = ReturnApprox.all_dirac(1)
    pes = []
    approx_errors = []
    for k in range(1, 13):
        xi = adp_params(mdp, 0, eta, k, schedule)
        target = materialize_bellman_finite(mdp, 0, eta)
        new = project_bellman(mdp, 0, eta, xi)
        pes.append(wasserstein(new, target, 1.0))
        eta = ReturnApprox([new])
        approx_errors.append(wasserstein(eta[0], eta_star, 1.0))
    # APE recursion: APE(n+1) = PE(n+1) + gamma * APE(n)
    ape = [pes[0]]
    for pe in pes[1:]:
        ape.append(pe + gamma * ape[-1])
    direct = [sum(gamma ** (n - k) * pes[k - 1] for k in range(1, n + 1))
              for n in range(1, 13)]
    assert np.allclose(ape, direct, atol=1e-9)
    # approximation error is bounded by APE(n) + gamma^n * w1(eta0, eta*)
    w0 = wasserstein(FiniteDist([0.0], [1.0]), eta_star, 1.0)
    for n in range(1, 13):
        assert approx_errors[n - 1] <= ape[n - 1] + gamma ** n * w0 + 1e-6


def test_qdp_engine_converges_on_finite_rewards():
    reward = FiniteDist([-1.0, 2.0], [0.5, 0.5])
    mdp = self_loop_mdp(reward, gamma=0.5)
    star = ReturnApprox.all_dirac(1)
    for _ in range(22):
        star = ReturnApprox([materialize_bellman_finite(mdp, 0, star)])
    cfg = RunConfig(schedule=ScheduleConfig(kind="qdp", theta=0.75), max_iterations=22)
    report = run_ddp(mdp, cfg)
    err = wasserstein(report.final[0], star[0], 1.0)
    # mid-quantile resolution at m = M(22) plus the contraction transient
    assert err <= 0.01
    assert report.records[-1].sizes == [math.ceil((1 / 0.75) ** 22)]


def test_run_mc_deterministic_rewards():
    mdp = self_loop_mdp(Dirac(1.0), gamma=0.5)
    eta, report = run_mc(mdp, horizon=20, n_samples=500, seed=4)
    exact = 2.0 * (1.0 - 0.5 ** 20)
    assert eta[0].size == 1
    assert eta[0].points[0] == pytest.approx(exact, rel=1e-12)
    assert report.records[0].total_particles == 1


def test_run_mc_matches_circular_means(mdp_i, ground_truth_i):
    n = 100_000
    eta, _ = run_mc(mdp_i, horizon=30, n_samples=n, seed=11)
    for comp, truth in zip(eta, ground_truth_i):
        mean = float(np.sum(comp.points * comp.weights))
        sigma = math.sqrt(truth.sigma2)
        assert abs(mean - truth.mu) <= 3 * sigma / math.sqrt(n)


def test_run_mc_reproducible_and_chunk_invariant(mdp_i):
    a, _ = run_mc(mdp_i, horizon=10, n_samples=2000, seed=3)
    b, _ = run_mc(mdp_i, horizon=10, n_samples=2000, seed=3, chunk=137)
    for x, y in zip(a, b):
        assert np.array_equal(x.points, y.points)
        assert np.array_equal(x.weights, y.weights)


def test_run_mc_thread_invariant(mdp_i):
    before = os.environ.get("DDP_THREADS")
    try:
        os.environ["DDP_THREADS"] = "1"
        a, _ = run_mc(mdp_i, horizon=10, n_samples=1000, seed=5)
        os.environ["DDP_THREADS"] = "4"
        b, _ = run_mc(mdp_i, horizon=10, n_samples=1000, seed=5)
    finally:
        if before is None:
            os.environ.pop("DDP_THREADS", None)
        else:
            os.environ["DDP_THREADS"] = before
    for x, y in zip(a, b):
        assert np.array_equal(x.points, y.points)


def test_run_mc_particle_budget(mdp_i):
    eta, _ = run_mc(mdp_i, horizon=5, particle_budget=999, seed=0)
    assert all(comp.size <= 333 for comp in eta)
    with pytest.raises(ValueError):
        run_mc(mdp_i, horizon=5)
    with pytest.raises(ValueError):
        run_mc(mdp_i, horizon=5, n_samples=10, particle_budget=30)
    with pytest.raises(ValueError):
        run_mc(mdp_i, horizon=0, n_samples=10)


def test_compare_identity_and_shift(ground_truth_i):
    finite = [FiniteDist([0.0, 1.0], [0.5, 0.5]), FiniteDist([2.0], [1.0])]
    table = compare(finite, finite, ["ks", "w1", "l2"])
    assert all(v == 0.0 for v in table.values())
    shifted = [Normal(t.mu + 0.1, t.sigma2) for t in ground_truth_i]
    table = compare(ground_truth_i, shifted, ["w1"])
    assert table["w1"] == pytest.approx(0.1, abs=1e-6)


def test_compare_heavy_tail_metrics(mdp_ii, ground_truth_ii):
    cfg = RunConfig(schedule=ScheduleConfig(kind="qsp", theta=0.85), max_iterations=10,
                    metrics=["ks", "w1", "l2"], ground_truth=ground_truth_ii)
    report = run_ddp(mdp_ii, cfg)
    assert report.metric_values["w1"] == math.inf
    assert math.isfinite(report.metric_values["l2"])
    with pytest.raises(ValueError):
        compare(report.final, ground_truth_ii[:2], ["ks"])


def test_wall_time_budget(mdp_i):
    cfg = adp_config(max_iterations=10 ** 6, max_seconds=0.2)
    report = run_ddp(mdp_i, cfg)
    assert 1 <= report.iterations < 10 ** 6
    # completed iterations stay contiguous
    assert [r.k for r in report.records] == list(range(1, report.iterations + 1))
