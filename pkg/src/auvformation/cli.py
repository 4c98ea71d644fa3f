"""Command-line interface: run, compare, mc, bound.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime simulation
failure.  Diagnostics go to stderr; ``bound`` prints its report as JSON on
stdout.
"""

import argparse
import json
import sys
from pathlib import Path

from . import config, runio, sim, topology
from .errors import AttitudeSingularity, SchemaError, ValidationError

SETTLING_TOL = 0.1
SWEEP_TOL = 0.5

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _load_scenario(args, force_controller=None):
    doc = config.load_document(args.config) if args.config else {}
    sim_section = doc.setdefault("sim", {})
    if args.dt is not None:
        sim_section["dt"] = args.dt
    if args.t_end is not None:
        sim_section["t_end"] = args.t_end
    if args.seed is not None:
        sim_section["seed"] = args.seed
    if args.controller is not None and force_controller is None:
        force_controller = args.controller
    return config.build_scenario(doc, force_controller=force_controller)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(args) -> int:
    try:
        scenario = _load_scenario(args)
        out = _out_dir(args)
    except AttitudeSingularity as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (SchemaError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        log = sim.run(scenario)
        metrics = sim.compute_metrics(log, SETTLING_TOL)
        runio.write_csv(log, out / "run.csv")
        _write_json(out / "metrics.json", metrics.to_dict())
    except (AttitudeSingularity, FloatingPointError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        adaptive = _load_scenario(args, force_controller="adaptive_sat")
        baseline = _load_scenario(args, force_controller="baseline_smc")
        out = _out_dir(args)
    except AttitudeSingularity as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (SchemaError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = {}
    metrics = {}
    failed = 0
    for name, scenario in (("adaptive_sat", adaptive), ("baseline_smc", baseline)):
        try:
            log = sim.run(scenario)
            m = sim.compute_metrics(log, SETTLING_TOL)
            runio.write_csv(log, out / f"run_{name}.csv")
            metrics[name] = m
            report[name] = m.to_dict()
        except (AttitudeSingularity, FloatingPointError) as exc:
            print(f"{name} failed: {exc}", file=sys.stderr)
            report[name] = {"error": str(exc)}
            failed += 1
    if len(metrics) == 2:
        a, b = metrics["adaptive_sat"], metrics["baseline_smc"]
        settled = a.settling_time is not None and b.settling_time is not None
        report["delta"] = {
            "peak_torque": b.peak_torque - a.peak_torque,
            "peak_applied": b.peak_applied - a.peak_applied,
            "chattering": b.chattering - a.chattering,
            "settling_time": (b.settling_time - a.settling_time) if settled else None,
        }
    try:
        _write_json(out / "compare.json", report)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_mc(args) -> int:
    try:
        scenario = _load_scenario(args)
        if not args.scales:
            raise ValidationError("at least one scale is required")
        scales = [float(s) for s in args.scales.split(",")]
        out = _out_dir(args)
    except AttitudeSingularity as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (SchemaError, ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = sim.mc_sweep(scenario, scales, n_random=args.n_random, tol=SWEEP_TOL)
    h = topology.grounded_matrix(scenario.graph).matrix
    settled = [
        row.settling_time for row in rows
        if row.error is None and row.settling_time
    ]
    payload = {
        "t_bound": sim.settling_bound(
            scenario.gains, h, "practical", scenario.kappa, scenario.l1, scenario.l2
        ),
        "tolerance": SWEEP_TOL,
        "seed": scenario.seed,
        "settling_ratio": (max(settled) / min(settled)) if settled else None,
        "trials": [row.to_dict() for row in rows],
    }
    try:
        _write_json(out / "mc.json", payload)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if all(row.error is not None for row in rows):
        print("all trials failed", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_bound(args) -> int:
    try:
        scenario = _load_scenario(args)
        if not isinstance(scenario.gains, sim.FtGains):
            raise ValidationError("bound requires fixed-time controller gains")
        h = topology.grounded_matrix(scenario.graph).matrix
        report = sim.bound_report(
            scenario.gains, h, scenario.kappa, scenario.l1, scenario.l2,
            scenario.theta_bound,
        )
    except (SchemaError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _add_common(parser, with_out=True):
    parser.add_argument("--config", help="scenario config JSON (defaults apply if omitted)")
    if with_out:
        parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, help="override sim.seed")
    parser.add_argument("--dt", type=float, help="override sim.dt")
    parser.add_argument("--t-end", dest="t_end", type=float, help="override sim.t_end")
    parser.add_argument("--controller", choices=sim.CONTROLLERS,
                        help="override controller.name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auvform",
        description="Multi-AUV formation control simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario; writes run.csv + metrics.json")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser(
        "compare", help="run adaptive_sat and baseline_smc; writes both logs + compare.json"
    )
    _add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_mc = sub.add_parser("mc", help="initial-error sweep; writes mc.json")
    _add_common(p_mc)
    p_mc.add_argument("--scales", default="0.1,1,10",
                      help="comma-separated initial-error scale factors")
    p_mc.add_argument("--n-random", dest="n_random", type=int, default=0,
                      help="number of seeded random trials")
    p_mc.set_defaults(func=cmd_mc)

    p_bound = sub.add_parser("bound", help="print analytic settling bounds as JSON")
    _add_common(p_bound, with_out=False)
    p_bound.set_defaults(func=cmd_bound)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
