"""Matplotlib figures rendered alongside the delimited report output."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

MARKERS = ["o", "+", "*", "s", "D", "^", "v", "x"]


def render_pxpy(pxpy: dict, path: Path) -> None:
    """Overlay the projected fronts: costly rate py vs tolerable rate px."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    labels = [l for l in sorted(pxpy) if l != "merged"]
    for i, label in enumerate(labels):
        pts = pxpy[label]
        if not pts:
            continue
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ax.plot(xs, ys, marker=MARKERS[i % len(MARKERS)], linestyle="--",
                markersize=5, label=label)
    ax.set_xlabel("Px (mean of tolerable misclassification rates)")
    ax.set_ylabel("Py (mean of costly misclassification rates)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_misalignment(mis_db: list, block_size: int, sample_rate: int, path: Path) -> None:
    """Adaptive-filter misalignment in dB over time."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    t = [k * block_size / sample_rate for k in range(len(mis_db))]
    ax.plot(t, mis_db, linewidth=1.0)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("misalignment [dB]")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_binary_roc(binary: dict, path: Path) -> None:
    """Classical two-class curves: miss rate vs false-alarm rate per detector."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for i, label in enumerate(sorted(binary)):
        rows = sorted(binary[label], key=lambda r: r["p_f"])
        ax.plot([r["p_f"] for r in rows], [r["p_m"] for r in rows],
                marker=MARKERS[i % len(MARKERS)], markersize=3,
                linestyle="-", linewidth=0.8, label=label)
    ax.set_xlabel("P_f")
    ax.set_ylabel("P_m")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_figures(report, out_dir) -> list:
    out = Path(out_dir)
    written = []
    if report.pxpy:
        p = out / "pxpy.png"
        render_pxpy(report.pxpy, p)
        written.append(p)
    if report.misalignment_db:
        p = out / "misalignment.png"
        render_misalignment(report.misalignment_db,
                            block_size=report.meta.get("block_size", 256),
                            sample_rate=report.meta.get("sample_rate", 8000),
                            path=p)
        written.append(p)
    if report.binary:
        p = out / "binary_roc.png"
        render_binary_roc(report.binary, p)
        written.append(p)
    return written
