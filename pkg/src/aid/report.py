"""Render an evaluation report into figures and delimited output.

Consumes the JSON emitted by the evaluation harness and writes, side by
side: the CSV table, a precision-at-kappa curve per method, and an mAP bar
chart with per-repetition spread.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

METHOD_STYLES = {
    "baseline": {"color": "#888888", "linestyle": "--"},
    "hard": {"color": "#d95f02", "linestyle": "-."},
    "aid": {"color": "#1b9e77", "linestyle": "-"},
}


def load_report(path: str | Path) -> dict:
    with Path(path).open("r", encoding="utf-8") as f:
        return json.load(f)


def write_csv_from_dict(report: dict, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "metric", "kappa", "value"])
        for name, entry in report["methods"].items():
            w.writerow([name, "mAP", "", f"{entry['mAP']:.10g}"])
            w.writerow([name, "mAP_std", "", f"{entry['mAP_std']:.10g}"])
            for rep, v in enumerate(entry["per_rep"]["mAP"]):
                w.writerow([name, "mAP_rep", rep, f"{v:.10g}"])
            for i, v in enumerate(entry["p_at"], start=1):
                w.writerow([name, "p_at", i, f"{v:.10g}"])


def plot_precision_curves(report: dict, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, entry in report["methods"].items():
        curve = entry["p_at"]
        style = METHOD_STYLES.get(name, {})
        ax.plot(range(1, len(curve) + 1), curve, label=name, **style)
    ax.set_xlabel("kappa")
    ax.set_ylabel("precision of top-kappa results")
    ax.set_ylim(0.0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_map_bars(report: dict, path: str | Path) -> None:
    names = list(report["methods"])
    means = [report["methods"][n]["mAP"] for n in names]
    stds = [report["methods"][n]["mAP_std"] for n in names]
    colors = [METHOD_STYLES.get(n, {}).get("color", "#4477aa") for n in names]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(names, means, yerr=stds, capsize=4, color=colors)
    ax.set_ylabel("mAP")
    ax.set_ylim(0.0, 1.02)
    ax.grid(axis="y", alpha=0.3)
    for i, v in enumerate(means):
        ax.text(i, v + 0.01, f"{v:.3f}", ha="center", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(report_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Write report.csv, precision_at.png, and map.png into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = load_report(report_path)
    outputs = [
        out_dir / "report.csv",
        out_dir / "precision_at.png",
        out_dir / "map.png",
    ]
    write_csv_from_dict(report, outputs[0])
    plot_precision_curves(report, outputs[1])
    plot_map_bars(report, outputs[2])
    return outputs
