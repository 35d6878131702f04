"""Per-method result tables with best/second-best marks and macro averages."""

from __future__ import annotations

import csv
from collections import OrderedDict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable

import numpy as np

from .metrics import Metrics

TOP_TEN = ("equals", "main", "setUp", "onCreate", "toString", "run", "hashCode", "init",
           "execute", "get")

SCHEME_ORDER = ("CharSeq", "TokenSeq", "HC_Binary", "HC_Norm", "HC_Binary_CX_Norm",
                "HC_Norm_CX_Norm", "code2vec")

SCHEME_LABELS = {
    "HC_Binary": "HC(Binary)",
    "HC_Norm": "HC(Norm)",
    "HC_Binary_CX_Norm": "HC(Binary)+CX(Norm)",
    "HC_Norm_CX_Norm": "HC(Norm)+CX(Norm)",
}

BEST, SECOND = "best", "second"


def percent(value: float) -> Decimal:
    """Ratio to a percentage with two decimals, rounded half-up on the decimal repr."""
    if value != value:  # NaN passes through as NaN
        return Decimal("NaN")
    return (Decimal(repr(float(value))) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class ReportRow:
    method: str
    scheme: str
    accuracy: Decimal
    precision: Decimal
    recall: Decimal
    f1: Decimal
    mark: str = ""  # "best", "second" or ""


@dataclass
class ReportTable:
    rows: list[ReportRow]
    averages: list[ReportRow] = field(default_factory=list)  # method is "average"

    @property
    def methods(self) -> list[str]:
        return list(OrderedDict.fromkeys(r.method for r in self.rows))

    @property
    def schemes(self) -> list[str]:
        return [r.scheme for r in self.averages]

    def row(self, method: str, scheme: str) -> ReportRow:
        for r in self.rows:
            if r.method == method and r.scheme == scheme:
                return r
        raise KeyError((method, scheme))

    def average(self, scheme: str) -> ReportRow:
        for r in self.averages:
            if r.scheme == scheme:
                return r
        raise KeyError(scheme)


def _order_key(order: tuple[str, ...], seen: list[str]):
    def key(name):
        return (order.index(name), 0) if name in order else (len(order), seen.index(name))
    return key


def _marks(f1s: list[Decimal]) -> list[str]:
    # competition ranking: ties at the top share "best" and leave no "second"
    out = []
    for v in f1s:
        if v.is_nan():
            out.append("")
            continue
        rank = 1 + sum(1 for w in f1s if not w.is_nan() and w > v)
        out.append(BEST if rank == 1 else SECOND if rank == 2 else "")
    return out


def make_report(results: Iterable[tuple[str, str, Metrics]]) -> ReportTable:
    """Build the per-method table and one macro-average row per scheme.

    Methods follow the Top-Ten order (others after, in input order); schemes
    follow the usual column order. Averages are unweighted means over methods
    of the unrounded ratios. A scheme with no results does not appear.
    """
    results = list(results)
    if not results:
        raise ValueError("no results to report")
    cells: dict[tuple[str, str], Metrics] = {}
    seen_methods: list[str] = []
    seen_schemes: list[str] = []
    for method, scheme, m in results:
        cells[(method, scheme)] = m
        if method not in seen_methods:
            seen_methods.append(method)
        if scheme not in seen_schemes:
            seen_schemes.append(scheme)
    methods = sorted(seen_methods, key=_order_key(TOP_TEN, seen_methods))
    schemes = sorted(seen_schemes, key=_order_key(SCHEME_ORDER, seen_schemes))

    rows = []
    for method in methods:
        present = [s for s in schemes if (method, s) in cells]
        f1s = [percent(cells[(method, s)].f1) for s in present]
        for s, mark in zip(present, _marks(f1s)):
            m = cells[(method, s)]
            rows.append(ReportRow(method, s, percent(m.accuracy), percent(m.precision),
                                  percent(m.recall), percent(m.f1), mark))

    averages = []
    for s in schemes:
        ms = [cells[(method, s)] for method in methods if (method, s) in cells]
        mean = {k: float(np.mean([getattr(m, k) for m in ms]))
                for k in ("accuracy", "precision", "recall", "f1")}
        averages.append(ReportRow("average", s, *(percent(mean[k]) for k in
                                                  ("accuracy", "precision", "recall", "f1"))))
    f1s = [r.f1 for r in averages]
    averages = [ReportRow(r.method, r.scheme, r.accuracy, r.precision, r.recall, r.f1, mark)
                for r, mark in zip(averages, _marks(f1s))]
    return ReportTable(rows, averages)


def _fmt(d: Decimal) -> str:
    return "" if d.is_nan() else f"{d:.2f}"


_HEADER = ["method", "scheme", "accuracy", "precision", "recall", "f1", "mark"]


def write_report_csv(path, table: ReportTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_HEADER)
        for r in table.rows + table.averages:
            writer.writerow([r.method, r.scheme, _fmt(r.accuracy), _fmt(r.precision),
                             _fmt(r.recall), _fmt(r.f1), r.mark])


def _markdown(header: list[str], body: list[list[str]]) -> list[str]:
    widths = [max(len(header[i]), *(len(row[i]) for row in body)) for i in range(len(header))]

    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    sep = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    return [line(header), sep] + [line(row) for row in body]


def _marked(r: ReportRow) -> str:
    text = _fmt(r.f1)
    return f"**{text}**" if r.mark == BEST else f"_{text}_" if r.mark == SECOND else text


def render_markdown(table: ReportTable, title: str = "Results") -> str:
    """Aligned Markdown: the per-method table then the averages table.

    Best F1 per method is bold, second best is italic.
    """
    label = lambda s: SCHEME_LABELS.get(s, s)  # noqa: E731
    body, last = [], None
    for r in table.rows:
        body.append([r.method if r.method != last else "", label(r.scheme), _fmt(r.precision),
                     _fmt(r.recall), _marked(r)])
        last = r.method
    out = [f"## {title}", ""]
    out += _markdown(["Method", "Scheme", "Precision", "Recall", "F1"], body)
    out += ["", "## Average", ""]
    out += _markdown(["Scheme", "Accuracy", "Precision", "Recall", "F1"],
                     [[label(r.scheme), _fmt(r.accuracy), _fmt(r.precision), _fmt(r.recall),
                       _marked(r)] for r in table.averages])
    return "\n".join(out) + "\n"


def write_report_markdown(path, table: ReportTable, title: str = "Results") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_markdown(table, title))
