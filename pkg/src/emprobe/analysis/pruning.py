"""Retrain on the top fraction of dimensions by information gain."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..svm import RBF, GridSpec, SvmConfig, grid_search
from .infogain import IGRanking, rank_dimensions
from .metrics import Metrics, confusion, metrics


@dataclass
class PruneResult:
    fraction: float
    kept_dims: list[int]  # ascending column indices
    metrics_full: Metrics
    metrics_pruned: Metrics
    config_full: SvmConfig | None = None
    config_pruned: SvmConfig | None = None
    ranking: IGRanking | None = None


def kept_dimensions(ranking: IGRanking, fraction: float) -> list[int]:
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    d = len(ranking.ig)
    # ceil with a small slack so 0.25 * 100 stays 25 under float error
    k = max(1, min(d, math.ceil(fraction * d - 1e-9)))
    return sorted(ranking.top(k))


def _fit_and_score(train, validation, test, grid, kernel_kind, seed):
    cfg, model, _ = grid_search(train, validation, grid, kernel_kind=kernel_kind, seed=seed)
    x_te, y_te = test
    return cfg, metrics(confusion(model.predict_labels(x_te), np.asarray(y_te)))


def prune_experiment(
    train: tuple[np.ndarray, np.ndarray],
    validation: tuple[np.ndarray, np.ndarray],
    test: tuple[np.ndarray, np.ndarray],
    fraction: float,
    grid: GridSpec = GridSpec(),
    kernel_kind: str = RBF,
    seed: int = 0,
    full: tuple[SvmConfig, Metrics] | None = None,
    ranking: IGRanking | None = None,
) -> PruneResult:
    """Compare test metrics of the full representation against a pruned one.

    Dimensions are ranked on the training split only. ``full`` and
    ``ranking`` let a caller reuse an already tuned full model and a
    computed ranking across several fractions.
    """
    x_tr, y_tr = np.asarray(train[0], dtype=np.float64), np.asarray(train[1])
    ranking = ranking or rank_dimensions(x_tr, y_tr)
    dims = kept_dimensions(ranking, fraction)
    if full is None:
        full = _fit_and_score((x_tr, y_tr), validation, test, grid, kernel_kind, seed)

    def cut(split):
        return np.asarray(split[0], dtype=np.float64)[:, dims], split[1]

    cfg_p, m_p = _fit_and_score(cut((x_tr, y_tr)), cut(validation), cut(test), grid,
                                kernel_kind, seed)
    return PruneResult(fraction, dims, full[1], m_p, full[0], cfg_p, ranking)
