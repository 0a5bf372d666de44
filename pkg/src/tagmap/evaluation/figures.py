"""Precision/recall curve figures rendered next to the report files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import EvalReport


def render_report_figures(report: EvalReport, out_dir) -> list[Path]:
    """One figure per kind: per-class precision/recall vs threshold (thin)
    with the macro average (bold). Returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for kind in ("object", "region"):
        classes = [c for c in report.classes if c.kind == kind]
        if not classes:
            continue
        ts = list(report.thresholds_for(kind))
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True)
        for ax, metric in zip(axes, ("precision", "recall")):
            for c in sorted(classes, key=lambda c: c.name):
                vals = [getattr(c, metric)(t) for t in ts]
                if any(v is None for v in vals):
                    continue
                ax.plot(ts, vals, color="0.7", linewidth=0.8)
            macro = [report.macro(kind, metric, t) for t in ts]
            if all(v is not None for v in macro):
                ax.plot(ts, macro, color="C0", linewidth=2.2, marker="o", label="macro")
                ax.legend(loc="lower right", frameon=False)
            ax.set_xlabel("threshold [m]")
            ax.set_ylabel(metric)
            ax.set_ylim(-0.02, 1.02)
            ax.set_xticks(ts)
            ax.grid(True, alpha=0.3)
        fig.suptitle(f"{kind} classes")
        fig.tight_layout()
        path = out_dir / f"{kind}_precision_recall.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written
