"""Feature matrices as CSV and sequence encodings as JSONL."""

from __future__ import annotations

import csv
import json
from typing import Iterable, Sequence

import numpy as np


def write_feature_csv(path, ids: Sequence[str], labels: Sequence[int], names: Sequence[str],
                      matrix: np.ndarray) -> None:
    """Header ``id,label,<names>``; integers as-is, floats via ``repr`` (lossless)."""
    m = np.asarray(matrix)
    if m.shape != (len(ids), len(names)):
        raise ValueError(f"matrix shape {m.shape} does not match {len(ids)} ids x {len(names)} names")
    integral = np.issubdtype(m.dtype, np.integer)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", *names])
        for rid, lab, row in zip(ids, labels, m):
            cells = [str(int(v)) for v in row] if integral else [repr(float(v)) for v in row]
            writer.writerow([rid, int(lab), *cells])


def read_feature_csv(path) -> tuple[list[str], np.ndarray, list[str], np.ndarray]:
    """Return ``(ids, labels, names, matrix)``; the matrix is float64."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ids, labels, rows = [], [], []
        for row in reader:
            ids.append(row[0])
            labels.append(int(row[1]))
            rows.append([float(v) for v in row[2:]])
    names = header[2:]
    matrix = np.array(rows, dtype=np.float64).reshape(len(ids), len(names))
    return ids, np.array(labels, dtype=np.int64), names, matrix


def write_sequences(path, rows: Iterable[tuple[str, int, list[int]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rid, lab, indices in rows:
            fh.write(json.dumps({"id": rid, "label": int(lab), "indices": list(indices)}))
            fh.write("\n")
