"""Exact t-SNE to two dimensions.

Gaussian input affinities are calibrated per row to a target perplexity,
symmetrized, and matched by a Student-t kernel in the plane through gradient
descent on the KL divergence, with momentum, per-parameter gains and early
exaggeration. Everything is O(n^2) and single-threaded.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist


class ProjectionError(ValueError):
    pass


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    exaggeration_factor: float = 12.0
    exaggeration_iters: int = 250
    seed: int = 0
    min_gain: float = 0.01

    def __post_init__(self):
        if not self.perplexity > 1.0:
            raise ProjectionError(f"perplexity must exceed 1, got {self.perplexity}")
        for name in ("iterations", "momentum_switch_iter", "exaggeration_iters"):
            if getattr(self, name) < 1:
                raise ProjectionError(f"{name} must be at least 1")
        if self.learning_rate <= 0:
            raise ProjectionError("learning_rate must be positive")


@dataclass
class Projection2D:
    ids: list[str]
    coords: np.ndarray  # n x 2
    # KL against the unexaggerated P before each step, then once for the result
    kl_trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not np.all(np.isfinite(self.coords)):
            raise ProjectionError("projection produced non-finite coordinates")


def _row_entropy(d: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Entropy (bits) and probabilities of exp(-beta * d), shifted for stability."""
    w = np.exp(-beta * (d - d.min()))
    p = w / w.sum()
    nz = p > 0
    return float(-np.sum(p[nz] * np.log2(p[nz]))), p


def calibrate_affinities(
    distances_sq,
    perplexity: float,
    tol: float = 1e-5,
    max_steps: int = 50,
    return_beta: bool = False,
):
    """Row-stochastic conditional affinities with each row at the target perplexity.

    Each row bisects log(beta), beta being the Gaussian precision, until its
    entropy is within ``tol`` bits of log2(perplexity) or ``max_steps`` halvings
    are spent. The bracket spans e^±40 around the inverse median distance.
    """
    d2 = np.asarray(distances_sq, dtype=np.float64)
    if d2.ndim != 2 or d2.shape[0] != d2.shape[1]:
        raise ProjectionError("distance matrix must be square")
    n = d2.shape[0]
    if n < 3:
        raise ProjectionError(f"need at least 3 points, got {n}")
    if not np.allclose(d2, d2.T, rtol=1e-9, atol=1e-12):
        raise ProjectionError("distance matrix is not symmetric")
    if np.any(np.diag(d2) != 0) or np.any(d2 < 0):
        raise ProjectionError("distance matrix needs a zero diagonal and non-negative entries")
    if not 1.0 < perplexity <= n - 1:
        raise ProjectionError(f"perplexity must be in (1, {n - 1}], got {perplexity}")

    target = math.log2(perplexity)
    P = np.zeros((n, n))
    betas = np.zeros(n)
    for i in range(n):
        d = np.delete(d2[i], i)
        pos = d[d > 0]
        centre = -math.log(float(np.median(pos))) if pos.size else 0.0
        lo, hi = centre - 40.0, centre + 40.0
        log_beta = centre
        h, p = _row_entropy(d, math.exp(log_beta))
        for _ in range(max_steps):
            if abs(h - target) <= tol:
                break
            # entropy falls as beta grows
            if h > target:
                lo = log_beta
            else:
                hi = log_beta
            log_beta = (lo + hi) / 2
            h, p = _row_entropy(d, math.exp(log_beta))
        P[i, np.arange(n) != i] = p
        betas[i] = math.exp(log_beta)
    return (P, betas) if return_beta else P


def joint_affinities(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    return (P + P.T) / (2.0 * n)


def _student_t(Y: np.ndarray) -> np.ndarray:
    num = 1.0 / (1.0 + cdist(Y, Y, "sqeuclidean"))
    np.fill_diagonal(num, 0.0)
    return num


def kl_divergence(p_joint: np.ndarray, Y: np.ndarray) -> float:
    num = _student_t(Y)
    q = num / num.sum()
    nz = p_joint > 0
    return float(np.sum(p_joint[nz] * np.log(p_joint[nz] / q[nz])))


def kl_gradient(p_joint: np.ndarray, Y: np.ndarray, num: np.ndarray | None = None) -> np.ndarray:
    """Gradient of KL(P || Q) with respect to the 2-D coordinates."""
    num = _student_t(Y) if num is None else num
    q = num / num.sum()
    w = (p_joint - q) * num
    return 4.0 * (w.sum(axis=1)[:, None] * Y - w @ Y)


def _initial_coords(ids: Sequence[str], seed: int) -> np.ndarray:
    rows = []
    for rid in ids:
        key = int.from_bytes(hashlib.sha256(str(rid).encode("utf-8")).digest()[:8], "big")
        rows.append(np.random.default_rng([seed, key]).standard_normal(2))
    return 1e-4 * np.array(rows)


def tsne_project(matrix, cfg: TsneConfig = TsneConfig(), ids: Sequence[str] | None = None
                 ) -> Projection2D:
    """Embed the rows of ``matrix`` in the plane.

    Initial positions are drawn per id, so permuting rows (with their ids)
    permutes the result. Without ids, row indices stand in.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise ProjectionError("matrix must be 2-D")
    n = x.shape[0]
    ids = [str(i) for i in range(n)] if ids is None else [str(i) for i in ids]
    if len(ids) != n:
        raise ProjectionError(f"{len(ids)} ids for {n} rows")
    if len(set(ids)) != n:
        raise ProjectionError("ids must be unique")

    # work in sorted-id order so a row permutation cannot change float sums
    order = sorted(range(n), key=lambda i: ids[i])
    x = x[order]
    p = joint_affinities(calibrate_affinities(cdist(x, x, "sqeuclidean"), cfg.perplexity))
    p = np.maximum(p, 1e-300) * (1 - np.eye(n))
    Y = _initial_coords([ids[i] for i in order], cfg.seed)
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    trace = []
    nz = p > 0
    for it in range(cfg.iterations):
        exaggerate = it < cfg.exaggeration_iters
        momentum = cfg.momentum_initial if it < cfg.momentum_switch_iter else cfg.momentum_final
        num = _student_t(Y)
        q = num / num.sum()
        trace.append(float(np.sum(p[nz] * np.log(p[nz] / np.maximum(q[nz], 1e-300)))))
        grad = kl_gradient(p * cfg.exaggeration_factor if exaggerate else p, Y, num)
        same = np.sign(grad) == np.sign(update)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        np.maximum(gains, cfg.min_gain, out=gains)
        update = momentum * update - cfg.learning_rate * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)
    trace.append(kl_divergence(p, Y))
    out = np.empty_like(Y)
    out[order] = Y
    return Projection2D(ids, out, trace)


def write_projection_csv(path, proj: Projection2D, labels: Sequence) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "x", "y"])
        for rid, lab, (px, py) in zip(proj.ids, labels, proj.coords):
            writer.writerow([rid, lab, repr(float(px)), repr(float(py))])
