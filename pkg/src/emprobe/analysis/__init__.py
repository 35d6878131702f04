"""Evaluation metrics, information gain, and result tables.

Dimension pruning lives in :mod:`emprobe.analysis.pruning`; it is not imported
here because it depends on the SVM trainer.
"""

from .infogain import IGRanking, information_gain, label_entropy, rank_dimensions, write_ranking
from .metrics import ConfusionCounts, Metrics, confusion, f1_score, metrics
from .report import (
    SCHEME_ORDER,
    TOP_TEN,
    ReportRow,
    ReportTable,
    make_report,
    percent,
    render_markdown,
    write_report_csv,
    write_report_markdown,
)

__all__ = [
    "ConfusionCounts", "Metrics", "confusion", "f1_score", "metrics",
    "IGRanking", "information_gain", "label_entropy", "rank_dimensions", "write_ranking",
    "SCHEME_ORDER", "TOP_TEN", "ReportRow", "ReportTable", "make_report", "percent",
    "render_markdown", "write_report_csv", "write_report_markdown",
]
