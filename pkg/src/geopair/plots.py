"""Figure rendering for the report path: threshold curves and feature distributions."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .candidates import PairRecord
from .heuristics import KIND_NAMES, KIND_ORDER, SweepReport

FEATURE_LABELS = {
    "min_angle_deg": "min_angle (degrees)",
    "min_distance_m": "min_distance (meters)",
    "max_area": "max_area (ratio)",
}


def plot_sweep_curves(report: SweepReport, outdir: str | Path) -> list[Path]:
    """One accuracy-vs-threshold curve per heuristic kind, from the single-term specs."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for kind in KIND_ORDER:
        singles = [
            (r.spec.terms[0][1], r.accuracy)
            for r in report.results
            if len(r.spec.terms) == 1 and r.spec.terms[0][0] == kind
        ]
        if not singles:
            continue
        singles.sort()
        xs = [t for t, _ in singles]
        ys = [a for _, a in singles]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(xs, ys, marker="o")
        ax.set_xlabel(f"{KIND_NAMES[kind]} threshold")
        ax.set_ylabel("accuracy")
        ax.set_ylim(0.0, 1.05)
        ax.set_title(f"{report.task}: accuracy vs {KIND_NAMES[kind]} threshold")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = outdir / f"sweep_{report.task}_{KIND_NAMES[kind]}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def plot_feature_distributions(pairs: Sequence[PairRecord], outdir: str | Path) -> list[Path]:
    """Histogram of each feature; split by label when labels are present."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    featured = [p for p in pairs if p.features is not None]
    written: list[Path] = []
    if not featured:
        return written
    labeled = all(p.label is not None for p in featured)
    for name, label_text in FEATURE_LABELS.items():
        fig, ax = plt.subplots(figsize=(5, 3.5))
        if labeled:
            pos = [getattr(p.features, name) for p in featured if p.label == 1]
            neg = [getattr(p.features, name) for p in featured if p.label == 0]
            ax.hist([pos, neg], bins=30, label=["positive", "negative"], stacked=False)
            ax.legend()
        else:
            ax.hist([getattr(p.features, name) for p in featured], bins=30)
        ax.set_xlabel(label_text)
        ax.set_ylabel("pairs")
        ax.set_title(f"distribution of {name}")
        fig.tight_layout()
        path = outdir / f"feature_{name}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
