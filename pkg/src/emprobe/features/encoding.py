"""Binary and standardized encodings of raw feature counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schema import N_COMPLEXITY, N_METHOD

HC_BINARY = "HC_Binary"
HC_NORM = "HC_Norm"
HC_BINARY_CX_NORM = "HC_Binary_CX_Norm"
HC_NORM_CX_NORM = "HC_Norm_CX_Norm"
SCHEMES = (HC_BINARY, HC_NORM, HC_BINARY_CX_NORM, HC_NORM_CX_NORM)

DISPLAY_NAMES = {
    HC_BINARY: "HC(Binary)",
    HC_NORM: "HC(Norm)",
    HC_BINARY_CX_NORM: "HC(Binary)+CX(Norm)",
    HC_NORM_CX_NORM: "HC(Norm)+CX(Norm)",
}

METHOD_COLUMNS = tuple(range(N_METHOD))
COMPLEXITY_COLUMNS = tuple(range(N_METHOD, N_METHOD + N_COMPLEXITY))


@dataclass(frozen=True)
class ScalerStats:
    columns: tuple[int, ...]
    mean: np.ndarray
    std: np.ndarray

    def transform(self, matrix: np.ndarray, columns) -> np.ndarray:
        """Standardize ``columns`` of ``matrix``; zero-variance columns give 0."""
        columns = tuple(columns)
        missing = sorted(set(columns) - set(self.columns))
        if missing:
            raise ValueError(f"scaler was not fit on columns {missing}")
        pos = [self.columns.index(c) for c in columns]
        x = np.asarray(matrix, dtype=np.float64)[:, columns]
        mean, std = self.mean[pos], self.std[pos]
        out = np.zeros_like(x)
        ok = std > 0
        out[:, ok] = (x[:, ok] - mean[ok]) / std[ok]
        return out


def fit_scaler(train_counts: np.ndarray, columns=None) -> ScalerStats:
    """Per-column mean and population standard deviation of the train rows."""
    x = np.atleast_2d(np.asarray(train_counts, dtype=np.float64))
    if x.shape[0] == 0:
        raise ValueError("cannot fit a scaler on zero rows")
    columns = tuple(range(x.shape[1])) if columns is None else tuple(columns)
    sub = x[:, columns]
    mean = sub.mean(axis=0)
    std = np.sqrt(((sub - mean) ** 2).mean(axis=0))
    return ScalerStats(columns, mean, std)


def scheme_width(scheme: str) -> int:
    return N_METHOD if scheme in (HC_BINARY, HC_NORM) else N_METHOD + N_COMPLEXITY


def encode_matrix(counts: np.ndarray, scheme: str, scaler: ScalerStats | None = None) -> np.ndarray:
    """Encode a matrix of raw counts (one row per method) under ``scheme``."""
    counts = np.atleast_2d(np.asarray(counts))
    if counts.shape[1] < N_METHOD + (0 if scheme in (HC_BINARY, HC_NORM) else N_COMPLEXITY):
        raise ValueError(f"counts have {counts.shape[1]} columns, too few for {scheme}")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme != HC_BINARY and scaler is None:
        raise ValueError(f"{scheme} needs a fitted scaler")

    if scheme in (HC_BINARY, HC_BINARY_CX_NORM):
        head = (counts[:, :N_METHOD] > 0).astype(np.float64)
    else:
        head = scaler.transform(counts, METHOD_COLUMNS)
    if scheme in (HC_BINARY, HC_NORM):
        return head
    return np.hstack([head, scaler.transform(counts, COMPLEXITY_COLUMNS)])


def encode(counts: np.ndarray, scheme: str, scaler: ScalerStats | None = None) -> np.ndarray:
    """Encode one row of raw counts."""
    return encode_matrix(np.asarray(counts)[None, :], scheme, scaler)[0]
