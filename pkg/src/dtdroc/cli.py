"""Command-line entry point.

Subcommands: simulate, evaluate, compare, thold-sweep, selfcheck.
Exit codes: 0 success, 1 selfcheck failure, 2 config error, 3 empty
condition class in the scenario.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import harness, signals
from .config import ConfigError, ScenarioConfig, default_config, load_config, validate_config
from .report import emit_report
from .rocprobs import EmptyConditionClassError

EXIT_CONFIG = 2
EXIT_EMPTY_CLASS = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtdroc",
        description="Simulate AEC scenarios and evaluate doubletalk detectors "
                    "with a three-class ROC and Pareto-front analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="scenario config (YAML); defaults apply when omitted")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--grid", type=int, default=None, help="override threshold grid size")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    common(sub.add_parser("simulate", help="write signals and traces, no threshold sweep"))
    common(sub.add_parser("evaluate", help="single-detector Pareto front"))
    common(sub.add_parser("compare", help="two-detector front comparison"))
    p = sub.add_parser("thold-sweep", help="re-label the change window per hold time")
    common(p)
    p.add_argument("--t-hold", type=float, nargs="+",
                   default=[0.352, 0.672, 0.992, 1.3, 1.6],
                   help="hold times in seconds")
    common(sub.add_parser("selfcheck", help="run the scenario invariant suite"))
    return parser


def _load(args) -> ScenarioConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = validate_config(default_config())
    if args.seed is not None:
        data = cfg.data
        data["seed"] = args.seed
        for key in ("far", "near", "echo_path"):
            data[key]["seed"] = None
        cfg = validate_config(data)
    if args.grid is not None:
        cfg.data["grid"]["points"] = args.grid
    return cfg


def _simulate(cfg: ScenarioConfig, out: Path, figures: bool) -> None:
    bundle = harness.prepare(cfg)
    out.mkdir(parents=True, exist_ok=True)
    for name, sig in (("far", bundle.far), ("near", bundle.near),
                      ("echo", bundle.echo), ("mic", bundle.mic),
                      ("error", bundle.trace.error)):
        signals.save_signal(sig, out / f"{name}.f64", "raw-f64le")
    with open(out / "misalignment.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["block", "misalignment_db"])
        for k, m in enumerate(bundle.trace.misalignment_db):
            w.writerow([k, f"{m:.12g}"])
    for kind, stat in bundle.stats.items():
        with open(out / f"statistic_{kind}.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["sample_index", "value"])
            for i, v in enumerate(stat.values):
                w.writerow([i, f"{v:.12g}"])
    if figures:
        from . import plots
        plots.render_misalignment(list(bundle.trace.misalignment_db),
                                  cfg["filter"]["block_size"], cfg["sample_rate"],
                                  out / "misalignment.png")
    print(f"simulate: wrote signals and traces to {out}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "simulate":
            _simulate(cfg, args.out, not args.no_figures)
        elif args.command == "evaluate":
            report = harness.run_scenario(cfg)
            paths = emit_report(report, args.out, args.format, figures=not args.no_figures)
            print(f"evaluate: wrote {len(paths)} files to {args.out}")
        elif args.command == "compare":
            report = harness.compare_detectors(cfg)
            paths = emit_report(report, args.out, args.format, figures=not args.no_figures)
            print(f"compare: wrote {len(paths)} files to {args.out}")
        elif args.command == "thold-sweep":
            report = harness.thold_sweep(cfg, args.t_hold)
            paths = emit_report(report, args.out, args.format, figures=not args.no_figures)
            print(f"thold-sweep: wrote {len(paths)} files to {args.out}")
        elif args.command == "selfcheck":
            results = harness.selfcheck(cfg)
            failed = 0
            for name, ok, detail in results:
                print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail and not ok else ""))
                failed += 0 if ok else 1
            return 1 if failed else 0
    except EmptyConditionClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_CLASS
    return 0


if __name__ == "__main__":
    sys.exit(main())
