"""Command-line front end: validate, run, mc, compare, analyze.

Artifacts are deterministic for a fixed seed: numbers are serialized with 17
significant digits and wall-clock timings stay out of the primary outputs
(they go to stderr, or to a sidecar file via --timing-out).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import analysis
from . import distributions as dist_mod
from .bellman import ReturnApprox
from .distributions import FiniteDist
from .engine import RunConfig, RunReport, compare, run_ddp, run_mc
from .mdp import MdpSpec, validate
from .schedules import ALGORITHMS, ScheduleConfig


def _fmt(value) -> str:
    if isinstance(value, float):
        if value == math.inf:
            return "inf"
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _load_run_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _is_circular(mdp: MdpSpec) -> bool:
    if mdp.n_states != 3 or mdp.n_actions != 1:
        return False
    for s in range(3):
        row = mdp.transition[s, 0]
        target = (s + 1) % 3
        if not (row[target] == 1.0 and row.sum() == 1.0):
            return False
    return True


def _auto_circular_truth(mdp: MdpSpec):
    if not _is_circular(mdp):
        raise ValueError(
            "auto-circular ground truth needs a 3-state, 1-action cyclic MDP"
        )
    params = []
    family = None
    for s in range(3):
        reward = mdp.reward(s, 0, (s + 1) % 3)
        cfg = reward.to_config()
        if cfg["type"] == "normal":
            fam, pair = "normal", (cfg["mu"], cfg["sigma2"])
        elif cfg["type"] == "cauchy":
            fam, pair = "cauchy", (cfg["mu"], cfg["scale"])
        elif cfg["type"] == "dirac":
            fam, pair = None, (cfg["point"], 0.0)
        else:
            raise ValueError("auto-circular ground truth needs normal, cauchy or dirac rewards")
        if fam is not None:
            if family is not None and family != fam:
                raise ValueError("auto-circular ground truth needs one location-scale family")
            family = fam
        params.append(pair)
    return analysis.circular_reference(params, family or "normal", mdp.gamma)


def _resolve_ground_truth(spec, mdp: MdpSpec):
    if spec is None:
        return None
    if spec == "auto-circular":
        return _auto_circular_truth(mdp)
    if isinstance(spec, str):
        with open(spec) as fh:
            spec = json.load(fh)
    truth = [dist_mod.from_config(c) for c in spec]
    if len(truth) != mdp.n_states:
        raise ValueError("ground truth must list one distribution per state")
    return truth


def _emit_run_artifacts(report: RunReport, mdp: MdpSpec, out_prefix: str,
                        metric_names, timing_out=None):
    with open(out_prefix + ".json", "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    traced = [r for r in report.records]
    header = ["k", "total_particles"] + list(metric_names if traced and traced[0].metric_values
                                             else [])
    rows = []
    for r in traced:
        row = [r.k, r.total_particles]
        if r.metric_values:
            row += [r.metric_values[name] for name in metric_names]
        rows.append(row)
    _write_csv(out_prefix + "_iters.csv", header, rows)
    particle_rows = []
    for s, comp in enumerate(report.final):
        for p, w in zip(comp.points, comp.weights):
            particle_rows.append([mdp.states[s], p, w])
    _write_csv(out_prefix + "_particles.csv", ["state", "point", "weight"], particle_rows)
    if report.metric_values is not None:
        _write_csv(out_prefix + "_metrics.csv", ["metric", "value"],
                   [[k, v] for k, v in report.metric_values.items()])
    if timing_out:
        _write_csv(timing_out, ["k", "seconds"],
                   [[r.k, r.seconds] for r in report.records])
    print(f"{report.algorithm}: {report.iterations} iterations, "
          f"{report.final.total_particles} particles, "
          f"{report.wall_seconds:.2f}s", file=sys.stderr)
    if report.metric_values:
        summary = ", ".join(f"{k}={_fmt(v)}" for k, v in report.metric_values.items())
        print(f"metrics: {summary}", file=sys.stderr)


def _metric_list(arg: str | None, fallback):
    if arg is None:
        return list(fallback)
    return [m.strip() for m in arg.split(",") if m.strip()]


def _cmd_validate(args) -> int:
    mdp = MdpSpec.load(args.config)
    report = validate(mdp)
    print(str(report))
    return 0 if report.ok else 1


def _cmd_run(args) -> int:
    mdp = MdpSpec.load(args.config)
    report = validate(mdp)
    if not report.ok:
        raise ValueError(f"invalid mdp config: {report.violations[0]}")
    file_cfg = _load_run_config(args.run_config)

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_cfg.get(key, default)

    algo = pick(args.algo, "algo", "adp")
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}")
    size_mode = file_cfg.get("size_mode", "exponential")
    constant_m = pick(args.constant_m, "constant_m", 64)
    if args.constant_m is not None:
        size_mode = "constant"
    schedule = ScheduleConfig(
        kind=algo,
        theta=pick(args.theta, "theta", None),
        size_mode=size_mode,
        constant_m=constant_m,
        spline_fraction=pick(args.spline_fraction, "spline_fraction", 0.25),
        ppa_w0=pick(args.ppa_w0, "ppa_w0", 1.0),
        ppa_growth=pick(args.ppa_growth, "ppa_growth", 1.0),
        ppa_z=pick(args.ppa_z, "ppa_z", 0.0),
    )
    metric_names = _metric_list(args.metrics, file_cfg.get("metrics", []))
    gt_spec = args.ground_truth if args.ground_truth is not None else file_cfg.get("ground_truth")
    ground_truth = _resolve_ground_truth(gt_spec, mdp)
    max_iterations = (args.max_iterations if args.max_iterations is not None
                      else file_cfg.get("max_iterations", 20))
    max_seconds = args.max_seconds if args.max_seconds is not None else file_cfg.get("max_seconds")
    cfg = RunConfig(
        schedule=schedule,
        max_iterations=max_iterations,
        max_seconds=max_seconds,
        metrics=metric_names,
        ground_truth=ground_truth,
        seed=args.seed if args.seed is not None else file_cfg.get("seed", 0),
        trace_metrics=args.trace_metrics,
    )
    run_report = run_ddp(mdp, cfg)
    _emit_run_artifacts(run_report, mdp, args.out, metric_names, args.timing_out)
    return 0


def _cmd_mc(args) -> int:
    mdp = MdpSpec.load(args.config)
    report = validate(mdp)
    if not report.ok:
        raise ValueError(f"invalid mdp config: {report.violations[0]}")
    eta, run_report = run_mc(
        mdp,
        horizon=args.horizon,
        n_samples=args.samples,
        particle_budget=args.particle_budget,
        max_seconds=args.max_seconds,
        seed=args.seed or 0,
    )
    metric_names = _metric_list(args.metrics, [])
    ground_truth = _resolve_ground_truth(args.ground_truth, mdp)
    if ground_truth is not None and metric_names:
        run_report.metric_values = compare(eta, ground_truth, metric_names)
    _emit_run_artifacts(run_report, mdp, args.out, metric_names, args.timing_out)
    return 0


def _read_particles(path, mdp: MdpSpec) -> ReturnApprox:
    buckets: dict[str, list[tuple[float, float]]] = {s: [] for s in mdp.states}
    with open(path) as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            buckets[row["state"]].append((float(row["point"]), float(row["weight"])))
    comps = []
    for s in mdp.states:
        if not buckets[s]:
            raise ValueError(f"particle file has no rows for state {s!r}")
        pts, wts = zip(*buckets[s])
        comps.append(FiniteDist.from_particles(np.array(pts), np.array(wts)))
    return ReturnApprox(comps)


def _cmd_compare(args) -> int:
    mdp = MdpSpec.load(args.config)
    eta = _read_particles(args.particles, mdp)
    ground_truth = _resolve_ground_truth(args.ground_truth, mdp)
    if ground_truth is None:
        raise ValueError("compare needs --ground-truth")
    metric_names = _metric_list(args.metrics, ["ks", "w1", "l2"])
    table = compare(eta, ground_truth, metric_names)
    _write_csv(args.out, ["metric", "value"], [[k, v] for k, v in table.items()])
    for k, v in table.items():
        print(f"{k} = {_fmt(v)}")
    return 0


def _parse_schedule(text: str) -> analysis.SizeFunction:
    kind, _, value = text.partition(":")
    if kind == "exp":
        return analysis.SizeFunction("exponential", theta=float(value))
    if kind == "const":
        return analysis.SizeFunction("constant", m=int(value))
    raise ValueError(f"schedule must look like exp:0.85 or const:50, got {text!r}")


def _cmd_analyze(args) -> int:
    acfg = analysis.AnalysisConfig(gamma=args.gamma, c=args.c, v_min=0.0, v_max=args.v_span)
    size_fns = [_parse_schedule(tok) for tok in args.schedules.split(",") if tok]
    if not size_fns:
        raise ValueError("analyze needs at least one schedule")
    reference = size_fns[0]
    t_grid = analysis.log_time_grid(reference, args.n_max, args.points)
    rows = analysis.tradeoff_curve(acfg, size_fns, t_grid)
    _write_csv(args.out, ["T", "n", "e", "schedule"],
               [[r["T"], r["n"], r["e"], r["schedule"]] for r in rows])
    print(f"wrote {len(rows)} curve points to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distdp",
        description="Distributional dynamic programming for policy evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an MDP configuration file")
    p.add_argument("config")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("run", help="run a projected Bellman iteration")
    p.add_argument("config")
    p.add_argument("--run-config", default=None)
    p.add_argument("--algo", choices=ALGORITHMS, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--constant-m", type=int, default=None)
    p.add_argument("--spline-fraction", type=float, default=None)
    p.add_argument("--ppa-w0", type=float, default=None)
    p.add_argument("--ppa-growth", type=float, default=None)
    p.add_argument("--ppa-z", type=float, default=None)
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--metrics", default=None, help="comma list, e.g. ks,w1,l2")
    p.add_argument("--ground-truth", default=None,
                   help="'auto-circular' or a JSON file of per-state descriptors")
    p.add_argument("--trace-metrics", action="store_true")
    p.add_argument("--out", default="run")
    p.add_argument("--timing-out", default=None,
                   help="optional CSV of per-iteration wall times (not deterministic)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("mc", help="Monte-Carlo truncated-return baseline")
    p.add_argument("config")
    p.add_argument("--horizon", type=int, default=30)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--particle-budget", type=int, default=None)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", default=None)
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--out", default="mc")
    p.add_argument("--timing-out", default=None)
    p.set_defaults(fn=_cmd_mc)

    p = sub.add_parser("compare", help="metric table for a particle dump vs ground truth")
    p.add_argument("config")
    p.add_argument("--particles", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--metrics", default=None)
    p.add_argument("--out", default="compare.csv")
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("analyze", help="error/time trade-off curves for size schedules")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--v-span", type=float, default=1.0)
    p.add_argument("--schedules", required=True, help="comma list, e.g. exp:0.85,const:50")
    p.add_argument("--n-max", type=int, default=80)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", default="curve.csv")
    p.set_defaults(fn=_cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
