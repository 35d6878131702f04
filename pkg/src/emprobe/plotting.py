"""Figures written straight to files: t-SNE scatter, IG distribution, F1 bars.

Figures are built on :class:`matplotlib.figure.Figure` without pyplot, and
saved without timestamps and with a fixed SVG id salt so that reruns give
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .analysis.report import SCHEME_LABELS, ReportTable
from .projection import Projection2D

POSITIVE_COLOR = "#2ca02c"
NEGATIVE_COLOR = "#d62728"


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "svg"
    metadata = {"Date": None} if fmt in ("svg", "pdf") else {"Software": None}
    with matplotlib.rc_context({"svg.hashsalt": "emprobe", "svg.fonttype": "none"}):
        fig.savefig(path, format=fmt, metadata=metadata)
    return path


def plot_projection(path, proj: Projection2D, labels: Sequence[int], title: str = "") -> Path:
    """Scatter of 2-D coordinates; positives green, negatives red."""
    y = np.asarray(labels)
    fig = Figure(figsize=(5, 5))
    ax = fig.add_subplot()
    for value, color, name in ((-1, NEGATIVE_COLOR, "negative"), (1, POSITIVE_COLOR, "positive")):
        pts = proj.coords[y == value]
        ax.scatter(pts[:, 0], pts[:, 1], s=9, c=color, label=name, linewidths=0)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.legend(loc="best", frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_ig_distribution(path, ig: Sequence[float], title: str = "", threshold_fraction: float | None = 0.25
                         ) -> Path:
    """Per-dimension information gain sorted from highest to lowest."""
    values = np.sort(np.asarray(ig, dtype=np.float64))[::-1]
    fig = Figure(figsize=(6, 3.5))
    ax = fig.add_subplot()
    ax.bar(np.arange(values.size), values, width=1.0, color="#4c72b0")
    if threshold_fraction:
        cut = int(np.ceil(threshold_fraction * values.size - 1e-9))
        ax.axvline(cut - 0.5, color="black", linestyle="--", linewidth=0.8)
    ax.set_xlabel("dimension (sorted by gain)")
    ax.set_ylabel("information gain (bits)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_f1_bars(path, table: ReportTable, title: str = "") -> Path:
    """Grouped bars of F1 per method and scheme."""
    methods = table.methods
    schemes = [r.scheme for r in table.averages]
    width = 0.8 / max(1, len(schemes))
    fig = Figure(figsize=(max(5, 1.2 * len(methods) + 2), 3.8))
    ax = fig.add_subplot()
    x = np.arange(len(methods))
    for k, scheme in enumerate(schemes):
        vals = []
        for m in methods:
            try:
                vals.append(float(table.row(m, scheme).f1))
            except KeyError:
                vals.append(np.nan)
        ax.bar(x + (k - (len(schemes) - 1) / 2) * width, vals, width,
               label=SCHEME_LABELS.get(scheme, scheme))
    ax.set_xticks(x)
    ax.set_xticklabels(methods)
    ax.set_ylabel("F1 (%)")
    ax.set_ylim(0, 100)
    ax.legend(fontsize="small", frameon=False, loc="upper left", bbox_to_anchor=(1.0, 1.0))
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
