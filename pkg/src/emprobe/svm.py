"""Soft-margin binary SVM trained with sequential minimal optimization.

The solver follows Platt's scheme: an outer loop alternates between sweeps
over all examples and sweeps over the non-bound ones, picking the first
multiplier among KKT violators and the second by the largest ``|E1 - E2|``.
The full kernel matrix is computed once and cached; the error vector is
updated incrementally after every accepted pair step.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

log = logging.getLogger(__name__)

LINEAR = "linear"
RBF = "rbf"

DEFAULT_C_VALUES = tuple(2.0 ** k for k in range(-5, 16, 2))
DEFAULT_GAMMA_VALUES = tuple(2.0 ** k for k in range(-15, 4, 2))


class SvmError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str = LINEAR
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in (LINEAR, RBF):
            raise SvmError(f"unknown kernel {self.kind!r}")
        if self.kind == RBF and not (self.gamma and self.gamma > 0):
            raise SvmError("rbf kernel needs gamma > 0")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    kkt_tolerance: float = 1e-3
    max_passes: int = 100
    seed: int = 0
    max_updates: int | None = None  # None: 200 updates per example, at least 20000

    def __post_init__(self):
        if not self.C > 0:
            raise SvmError(f"C must be positive, got {self.C}")
        if not self.kkt_tolerance > 0:
            raise SvmError("kkt_tolerance must be positive")


@dataclass(frozen=True)
class GridSpec:
    C_values: tuple[float, ...] = DEFAULT_C_VALUES
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA_VALUES

    def __post_init__(self):
        if not self.C_values or not self.gamma_values:
            raise SvmError("grid lists must be non-empty")

    def cells(self, kernel_kind: str) -> list[tuple[float, float | None]]:
        gammas = sorted(self.gamma_values) if kernel_kind == RBF else [None]
        return [(c, g) for c in sorted(self.C_values) for g in gammas]


def gram(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise SvmError(f"vector length mismatch: {a.shape[1]} vs {b.shape[1]}")
    if spec.kind == LINEAR:
        return a @ b.T
    return np.exp(-spec.gamma * cdist(a, b, "sqeuclidean"))


def kernel_eval(a, b, spec: KernelSpec) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise SvmError(f"vector length mismatch: {a.shape} vs {b.shape}")
    if spec.kind == LINEAR:
        return float(a @ b)
    d = a - b
    return float(np.exp(-spec.gamma * (d @ d)))


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    sv_labels: np.ndarray
    bias: float
    kernel: KernelSpec

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if len(self.alphas) == 0:
            return np.full(x.shape[0], self.bias)
        if x.shape[1] != self.support_vectors.shape[1]:
            raise SvmError(
                f"input has {x.shape[1]} features, model expects {self.support_vectors.shape[1]}"
            )
        k = gram(x, self.support_vectors, self.kernel)
        return k @ (self.alphas * self.sv_labels) + self.bias

    def predict_labels(self, x: np.ndarray) -> np.ndarray:
        return np.where(self.decision_function(x) >= 0, 1, -1)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kernel": self.kernel.to_dict(),
                "bias": self.bias,
                "alphas": self.alphas.tolist(),
                "sv_labels": self.sv_labels.astype(int).tolist(),
                "support_vectors": self.support_vectors.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        obj = json.loads(text)
        k = obj["kernel"]
        svs = np.array(obj["support_vectors"], dtype=np.float64)
        return cls(
            support_vectors=svs,
            alphas=np.array(obj["alphas"], dtype=np.float64),
            sv_labels=np.array(obj["sv_labels"], dtype=np.int64),
            bias=float(obj["bias"]),
            kernel=KernelSpec(k["kind"], k["gamma"]),
        )


def predict(model: SvmModel, x) -> tuple[int, float]:
    """Label and margin for one vector; a zero margin is labelled +1."""
    margin = float(model.decision_function(np.asarray(x, dtype=np.float64)[None, :])[0])
    return (1 if margin >= 0 else -1), margin


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


class SMOSolver:
    """Solves the SVM dual for a precomputed kernel matrix."""

    eps = 1e-10

    def __init__(self, K: np.ndarray, y: np.ndarray, cfg: SvmConfig, debug: bool = False):
        self.K = K
        self.y = y.astype(np.float64)
        self.C = float(cfg.C)
        self.tol = cfg.kkt_tolerance
        self.max_passes = cfg.max_passes
        self.max_updates = cfg.max_updates or max(20000, 200 * len(y))
        self.rng = np.random.default_rng(cfg.seed)
        self.debug = debug
        n = len(y)
        self.n = n
        self.alpha = np.zeros(n)
        self.b = 0.0
        self.E = -self.y.copy()  # f(x_i) - y_i with f = 0
        self.updates = 0
        self.sweeps = 0
        self.converged = False

    def _nonbound(self) -> np.ndarray:
        return np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))

    def take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        alpha, y, K, C = self.alpha, self.y, self.K, self.C
        a1, a2 = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = self.E[i1], self.E[i2]
        s = y1 * y2
        if y1 != y2:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a2 + a1 - C), min(C, a2 + a1)
        if H - L < 1e-12 * C:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 1e-12:
            a2n = min(max(a2 + y2 * (E1 - E2) / eta, L), H)
        else:
            # Objective is linear (or concave) along the constraint line.
            f1 = y1 * (E1 - self.b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (E2 - self.b) - s * a1 * k12 - a2 * k22
            L1 = a1 + s * (a2 - L)
            H1 = a1 + s * (a2 - H)
            lobj = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12
            hobj = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12
            if lobj < hobj - self.eps:
                a2n = L
            elif lobj > hobj + self.eps:
                a2n = H
            else:
                a2n = a2
        if a2n < 1e-12 * C:
            a2n = 0.0
        elif a2n > C * (1 - 1e-12):
            a2n = C
        if abs(a2n - a2) < self.eps * (a2n + a2 + self.eps):
            return False
        a1n = a1 + s * (a2 - a2n)
        if a1n < 1e-12 * C:
            a1n = 0.0
        elif a1n > C * (1 - 1e-12):
            a1n = C

        d1 = y1 * (a1n - a1)
        d2 = y2 * (a2n - a2)
        b1 = self.b - E1 - d1 * k11 - d2 * k12
        b2 = self.b - E2 - d1 * k12 - d2 * k22
        if 0 < a1n < C:
            bn = b1
        elif 0 < a2n < C:
            bn = b2
        else:
            bn = 0.5 * (b1 + b2)

        if self.debug:
            before = dual_objective(alpha, y, K)
        self.E += d1 * K[i1] + d2 * K[i2] + (bn - self.b)
        alpha[i1], alpha[i2] = a1n, a2n
        self.b = bn
        self.updates += 1
        if self.debug:
            after = dual_objective(alpha, y, K)
            assert after >= before - 1e-9 * (1 + abs(before)), (before, after)
        return True

    def examine(self, i2: int) -> int:
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        E2 = self.E[i2]
        r2 = E2 * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0)):
            return 0
        nonbound = self._nonbound()
        if len(nonbound) > 1:
            errs = self.E[nonbound]
            i1 = nonbound[np.argmin(errs)] if E2 > 0 else nonbound[np.argmax(errs)]
            if self.take_step(int(i1), i2):
                return 1
        if len(nonbound):
            for i1 in np.roll(nonbound, -int(self.rng.integers(len(nonbound)))):
                if self.take_step(int(i1), i2):
                    return 1
        for i1 in np.roll(np.arange(self.n), -int(self.rng.integers(self.n))):
            if self.take_step(int(i1), i2):
                return 1
        return 0

    def solve(self) -> None:
        examine_all = True
        changed = 0
        while changed > 0 or examine_all:
            if self.sweeps >= self.max_passes or self.updates >= self.max_updates:
                log.info("SMO stopped unconverged after %d sweeps, %d updates (C=%g)",
                         self.sweeps, self.updates, self.C)
                break
            changed = 0
            if examine_all:
                self.sweeps += 1
                candidates = range(self.n)
            else:
                candidates = self._nonbound().tolist()
            for i in candidates:
                changed += self.examine(i)
                if self.updates >= self.max_updates:
                    break
            if examine_all:
                examine_all = False
                if changed == 0:
                    self.converged = True
                    break
            elif changed == 0:
                examine_all = True

    def final_bias(self) -> float:
        """Bias re-estimated from all free multipliers (or the feasible
        interval's midpoint when every multiplier sits at a bound)."""
        ay = self.alpha * self.y
        g = self.K @ ay  # decision values without bias
        free = self._nonbound()
        if len(free):
            return float(np.mean(self.y[free] - g[free]))
        # KKT: y_i (g_i + b) >= 1 for alpha=0, <= 1 for alpha=C
        lo, hi = -np.inf, np.inf
        at_zero = self.alpha == 0
        for i in range(self.n):
            bound = self.y[i] - g[i]
            upper_side = (self.y[i] > 0) == bool(at_zero[i])
            if upper_side:
                lo = max(lo, bound)
            else:
                hi = min(hi, bound)
        if np.isfinite(lo) and np.isfinite(hi):
            return float(0.5 * (lo + hi))
        return float(lo if np.isfinite(lo) else hi if np.isfinite(hi) else self.b)


def _check_training_data(x: np.ndarray, y: np.ndarray) -> None:
    if x.ndim != 2 or len(x) != len(y):
        raise SvmError("x must be 2-D with one row per label")
    if len(y) < 2:
        raise SvmError("need at least two training examples")
    labels = set(np.unique(y).tolist())
    if not labels <= {-1, 1}:
        raise SvmError(f"labels must be -1/+1, got {sorted(labels)}")
    if len(labels) < 2:
        raise SvmError("training data contains a single class")


def train_smo(x, y, cfg: SvmConfig = SvmConfig(), debug: bool = False,
              return_solver: bool = False):
    """Train a binary SVM; ``y`` holds -1/+1 labels."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y).astype(np.int64)
    _check_training_data(x, y)
    K = gram(x, x, cfg.kernel)
    solver = SMOSolver(K, y, cfg, debug=debug)
    solver.solve()
    bias = solver.final_bias()
    sv = np.flatnonzero(solver.alpha > 0)
    model = SvmModel(
        support_vectors=x[sv].copy(),
        alphas=solver.alpha[sv].copy(),
        sv_labels=y[sv].copy(),
        bias=bias,
        kernel=cfg.kernel,
    )
    return (model, solver) if return_solver else model


@dataclass
class GridRow:
    C: float
    gamma: float | None
    val_accuracy: float
    val_f1: float


def _accuracy_f1(pred: np.ndarray, truth: np.ndarray) -> tuple[float, float]:
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == -1)))
    fn = int(np.sum((pred == -1) & (truth == 1)))
    acc = float(np.mean(pred == truth))
    denom = 2 * tp + fp + fn
    return acc, (2 * tp / denom if denom else 0.0)


def grid_search(
    train: tuple[np.ndarray, np.ndarray],
    validation: tuple[np.ndarray, np.ndarray],
    grid: GridSpec = GridSpec(),
    kernel_kind: str = RBF,
    kkt_tolerance: float = 1e-3,
    max_passes: int = 100,
    seed: int = 0,
) -> tuple[SvmConfig, SvmModel, list[GridRow]]:
    """Train one model per grid cell and keep the best validation F1.

    Cells are visited by increasing C, then increasing gamma, and only a
    strictly better F1 replaces the incumbent, so ties go to the smaller C
    and then the smaller gamma.
    """
    x_tr, y_tr = train
    x_val, y_val = validation
    y_val = np.asarray(y_val)
    best = None
    rows = []
    for c, g in grid.cells(kernel_kind):
        cfg = SvmConfig(C=c, kernel=KernelSpec(kernel_kind, g), kkt_tolerance=kkt_tolerance,
                        max_passes=max_passes, seed=seed)
        try:
            model = train_smo(x_tr, y_tr, cfg)
        except SvmError as exc:
            raise SvmError(f"grid cell C={c}, gamma={g}: {exc}") from exc
        acc, f1 = _accuracy_f1(model.predict_labels(x_val), y_val)
        rows.append(GridRow(c, g, acc, f1))
        if best is None or f1 > best[0]:
            best = (f1, cfg, model)
    return best[1], best[2], rows


def write_grid_table(path, rows: Sequence[GridRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["C", "gamma", "val_accuracy", "val_f1"])
        for r in rows:
            writer.writerow([repr(r.C), "" if r.gamma is None else repr(r.gamma),
                             f"{r.val_accuracy:.6f}", f"{r.val_f1:.6f}"])
