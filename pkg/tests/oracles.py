"""Slow, obviously-correct reference implementations used by the tests."""

import itertools
import math
from fractions import Fraction

import numpy as np


def dual_enumeration(K, y, C, tol=1e-9):
    """Exact SVM dual optimum by enumerating every at-zero / free / at-C partition.

    For each partition the free multipliers and the bias solve the KKT
    equality system; the partition is kept when the bounds and the
    inequality conditions hold. Returns ``(alpha, bias)`` of the feasible
    candidate with the largest dual objective.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    Q = np.outer(y, y) * K
    best = None
    for states in itertools.product((0, 1, 2), repeat=n):  # 0: zero, 1: free, 2: C
        st = np.array(states)
        free = np.flatnonzero(st == 1)
        upper = np.flatnonzero(st == 2)
        alpha = np.where(st == 2, C, 0.0)
        if len(free):
            m = len(free)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q[np.ix_(free, free)]
            A[:m, m] = y[free]
            A[m, :m] = y[free]
            rhs = np.empty(m + 1)
            rhs[:m] = 1 - C * Q[np.ix_(free, upper)].sum(axis=1)
            rhs[m] = -C * y[upper].sum()
            try:
                sol = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                continue
            if not np.allclose(A @ sol, rhs, atol=1e-8):
                continue
            alpha[free] = sol[:m]
            bias = sol[m]
            if np.any(alpha[free] <= tol) or np.any(alpha[free] >= C - tol):
                continue
        else:
            if abs(C * y[upper].sum()) > tol:
                continue
            bias = None
        g = K @ (alpha * y)
        if bias is None:
            lo, hi = -np.inf, np.inf
            for i in range(n):
                edge = y[i] - g[i]
                # alpha=0 needs y(g+b) >= 1, alpha=C needs y(g+b) <= 1
                if (y[i] > 0) == (st[i] == 0):
                    lo = max(lo, edge)
                else:
                    hi = min(hi, edge)
            if lo > hi + tol:
                continue
            bias = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else (
                lo if np.isfinite(lo) else hi)
        margins = y * (g + bias)
        if np.any(margins[st == 0] < 1 - 1e-7) or np.any(margins[st == 2] > 1 + 1e-7):
            continue
        obj = alpha.sum() - 0.5 * alpha @ Q @ alpha
        if best is None or obj > best[0] + 1e-12:
            best = (obj, alpha.copy(), float(bias))
    if best is None:
        raise AssertionError("no feasible partition found")
    return best[1], best[2]


def brute_metrics(pred, truth):
    """Accuracy, precision, recall, F1 as exact fractions (0 on empty denominators)."""
    tp = tn = fp = fn = 0
    for p, t in zip(pred, truth):
        if p == 1 and t == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif t == 1:
            fn += 1
        else:
            tn += 1
    n = tp + tn + fp + fn
    prec = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    rec = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else Fraction(0)
    return (tp, tn, fp, fn), (Fraction(tp + tn, n), prec, rec, f1)


def _h(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    p = sum(1 for v in labels if v == 1) / n
    return -sum(q * math.log2(q) for q in (p, 1 - p) if q > 0)


def exhaustive_ig(column, labels):
    """Best gain over every threshold midway between sorted distinct values."""
    xs = [float(v) for v in column]
    ys = list(labels)
    base = _h(ys)
    if set(xs) <= {0.0, 1.0}:
        left = [y for x, y in zip(xs, ys) if x == 0]
        right = [y for x, y in zip(xs, ys) if x == 1]
        return base - (len(left) * _h(left) + len(right) * _h(right)) / len(ys)
    values = sorted(set(xs))
    best = 0.0
    for a, b in zip(values, values[1:]):
        t = (a + b) / 2
        left = [y for x, y in zip(xs, ys) if x <= t]
        right = [y for x, y in zip(xs, ys) if x > t]
        best = max(best, base - (len(left) * _h(left) + len(right) * _h(right)) / len(ys))
    return best


def bisect_row(d2_row, perplexity, steps=200):
    """Gaussian conditional row with entropy log2(perplexity), by bisection on sigma."""
    d = np.asarray(d2_row, dtype=np.float64)
    target = math.log2(perplexity)

    def row(sigma):
        w = np.exp(-(d - d.min()) / (2 * sigma * sigma))
        return w / w.sum()

    def entropy(p):
        p = p[p > 0]
        return float(-(p * np.log2(p)).sum())

    lo, hi = 1e-6, 1e6
    for _ in range(steps):
        mid = math.sqrt(lo * hi)
        if entropy(row(mid)) > target:
            hi = mid
        else:
            lo = mid
    return row(math.sqrt(lo * hi))
