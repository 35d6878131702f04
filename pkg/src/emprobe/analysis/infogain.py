"""Per-dimension information gain in bits.

Binary (0/1) columns use the plain conditional entropy. Continuous columns
use the best single-threshold stump, with candidate thresholds at midpoints
between consecutive distinct values; only the value order matters, so the
gain is invariant under strictly increasing transforms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _entropy(pos: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Binary entropy of ``pos / total`` (elementwise, 0 where total is 0)."""
    pos = np.asarray(pos, dtype=np.float64)
    total = np.asarray(total, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, pos / total, 0.0)
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return np.where(total > 0, h, 0.0)


def label_entropy(labels) -> float:
    y = np.asarray(labels)
    return float(_entropy(np.sum(y == 1), y.size))


def information_gain(column, labels) -> tuple[float, float | None]:
    """Return ``(gain_bits, threshold)``; threshold is None for 0/1 columns."""
    x = np.asarray(column, dtype=np.float64)
    y = np.asarray(labels)
    if x.shape != y.shape or x.size == 0:
        raise ValueError("column and labels must be equal, non-empty length")
    n = x.size
    pos = y == 1
    base = float(_entropy(pos.sum(), n))

    if np.all((x == 0) | (x == 1)):
        ones = x == 1
        n1 = int(ones.sum())
        p1 = int((pos & ones).sum())
        cond = (n1 * _entropy(p1, n1) + (n - n1) * _entropy(pos.sum() - p1, n - n1)) / n
        return max(0.0, base - float(cond)), None

    order = np.argsort(x, kind="stable")
    xs = x[order]
    cum_pos = np.cumsum(pos[order])
    # split after sorted position k-1 wherever the value changes
    cut = np.flatnonzero(xs[1:] != xs[:-1]) + 1
    if cut.size == 0:
        return 0.0, None
    left_n = cut
    left_pos = cum_pos[cut - 1]
    right_n = n - left_n
    right_pos = cum_pos[-1] - left_pos
    cond = (left_n * _entropy(left_pos, left_n) + right_n * _entropy(right_pos, right_n)) / n
    gains = base - cond
    best = int(np.flatnonzero(gains >= gains.max() - 1e-12)[0])
    threshold = float((xs[cut[best] - 1] + xs[cut[best]]) / 2)
    return max(0.0, float(gains[best])), threshold


@dataclass
class IGRanking:
    ig: np.ndarray
    thresholds: list
    order: np.ndarray  # column indices, highest gain first, lower index on ties

    def top(self, k: int) -> list[int]:
        return [int(i) for i in self.order[:k]]


def rank_dimensions(matrix, labels) -> IGRanking:
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ValueError("matrix must be non-empty and 2-D")
    results = [information_gain(x[:, j], labels) for j in range(x.shape[1])]
    ig = np.array([r[0] for r in results])
    return IGRanking(ig, [r[1] for r in results], np.argsort(-ig, kind="stable"))


def write_ranking(path, ranking: IGRanking, names: Sequence[str] | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dim", "name", "ig_bits", "threshold"])
        for j in ranking.order:
            thr = ranking.thresholds[j]
            writer.writerow([int(j), names[j] if names else "", f"{ranking.ig[j]:.9f}",
                             "" if thr is None else repr(thr)])
