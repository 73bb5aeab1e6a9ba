"""Report serialization: delimited front tables, JSON round-trip, figures."""

import csv
import json
from pathlib import Path

from .harness import ExperimentReport
from .pareto import OperatingPoint, RATE_NAMES, aggregate_px_py

FRONT_COLUMNS = ("detector", "t1", "t2") + RATE_NAMES + ("px", "py")
PROB_COLUMNS = ("p_ff", "p_dd", "p_cc", "denom_far", "denom_dbl", "denom_chg")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def point_to_dict(p: OperatingPoint) -> dict:
    px, py = aggregate_px_py(p)
    d = {"detector": p.label, "t1": p.t1, "t2": p.t2}
    d.update(dict(zip(RATE_NAMES, p.rates)))
    d["px"] = px
    d["py"] = py
    if p.probs is not None:
        d.update({k: p.probs.to_dict()[k] for k in PROB_COLUMNS})
    return d


def _write_front_csv(path: Path, points: list) -> None:
    cols = FRONT_COLUMNS + PROB_COLUMNS
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for d in sorted(points, key=lambda d: (d["detector"], d["t1"], d.get("t2") or 0.0)):
            w.writerow([_fmt(d.get(c)) for c in cols])


def emit_report(report: ExperimentReport, out_dir, format: str = "csv",
                figures: bool = True) -> list:
    """Write the report under out_dir; returns the created paths.

    csv: one front table per detector plus merged front, px/py series,
    binary-ROC series and residuals, each with a stable column order and the
    config hash embedded in meta.csv. json: everything in report.json.
    Figures (px/py overlay, misalignment trace) render next to the data
    unless disabled.
    """
    if format not in ("csv", "json"):
        raise ValueError(f"unknown report format {format!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if format == "json":
        path = out / "report.json"
        with open(path, "w") as f:
            json.dump(report.__dict__, f, indent=2, sort_keys=True)
        written.append(path)
    else:
        for label, points in report.fronts.items():
            path = out / f"front_{_safe(label)}.csv"
            _write_front_csv(path, points)
            written.append(path)
        path = out / "front_merged.csv"
        _write_front_csv(path, report.merged)
        written.append(path)

        path = out / "pxpy.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["detector", "px", "py"])
            for label in sorted(report.pxpy):
                for px, py in report.pxpy[label]:
                    w.writerow([label, _fmt(px), _fmt(py)])
        written.append(path)

        path = out / "binary_roc.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["detector", "t1", "p_f", "p_m"])
            for label in sorted(report.binary):
                for row in report.binary[label]:
                    w.writerow([label, _fmt(row["t1"]), _fmt(row["p_f"]), _fmt(row["p_m"])])
        written.append(path)

        path = out / "residuals.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["detector", "residual_far", "residual_dbl", "change_row_shortfall"])
            for label in sorted(report.residuals):
                r = report.residuals[label]
                w.writerow([label, _fmt(r["far"]), _fmt(r["dbl"]), _fmt(r["chg_shortfall"])])
        written.append(path)

        path = out / "meta.csv"
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            keys = [k for k in sorted(report.meta) if k != "elapsed_s"]
            w.writerow(keys)
            w.writerow([_fmt(report.meta[k]) for k in keys])
        written.append(path)

    if figures:
        from . import plots
        written += plots.render_report_figures(report, out)
    return written


def load_report(path) -> ExperimentReport:
    """Reload a JSON report written by emit_report."""
    with open(path) as f:
        data = json.load(f)
    return ExperimentReport(**data)


def _safe(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)
