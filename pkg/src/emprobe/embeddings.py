"""Import externally produced code vectors (e.g. 384-d code2vec) by method id."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

CODE2VEC_DIM = 384


class EmbeddingError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    dim: int
    ids: list[str]
    matrix: np.ndarray  # rows aligned with ``ids``

    def __post_init__(self):
        self._index = {rid: i for i, rid in enumerate(self.ids)}

    def __len__(self):
        return len(self.ids)

    def __contains__(self, rid):
        return rid in self._index

    @property
    def rows(self) -> dict[str, np.ndarray]:
        return {rid: self.matrix[i] for rid, i in self._index.items()}

    def vectors(self, ids: Iterable[str]) -> np.ndarray:
        ids = list(ids)
        missing = [i for i in ids if i not in self._index]
        if missing:
            raise EmbeddingError(f"no embedding for ids {_preview(missing)}")
        return self.matrix[[self._index[i] for i in ids]]


def _preview(ids, limit: int = 10) -> str:
    ids = sorted(ids)
    shown = ", ".join(ids[:limit])
    return shown + (f" (+{len(ids) - limit} more)" if len(ids) > limit else "")


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _csv_rows(path) -> Iterator[tuple[int, str, list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if lineno == 1 and len(row) > 1 and not _is_number(row[1].strip()):
                continue  # header
            yield lineno, row[0].strip(), [v.strip() for v in row[1:]]


def _jsonl_rows(path) -> Iterator[tuple[int, str, list]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield lineno, str(obj["id"]), list(obj["vector"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise EmbeddingError(f"{path}:{lineno}: malformed row ({exc})") from None


def _looks_like_jsonl(path: Path) -> bool:
    if path.suffix.lower() in (".jsonl", ".json", ".ndjson"):
        return True
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                return line.lstrip().startswith("{")
    return False


def import_embeddings(path, expected_dim: int = CODE2VEC_DIM, required_ids=None) -> EmbeddingTable:
    """Read a CSV (``id,v0,...``) or JSONL (``{"id", "vector"}``) embedding file.

    When ``required_ids`` is given the file must contain exactly those ids.
    Rows are returned sorted by id so repeated imports are identical.
    """
    path = Path(path)
    reader = _jsonl_rows if _looks_like_jsonl(path) else _csv_rows
    vectors: dict[str, list[float]] = {}
    for lineno, rid, values in reader(path):
        if len(values) != expected_dim:
            raise EmbeddingError(f"{rid}: got {len(values)}, expected {expected_dim} (line {lineno})")
        if rid in vectors:
            raise EmbeddingError(f"{rid}: duplicate id (line {lineno})")
        row = []
        for col, v in enumerate(values):
            try:
                x = float(v)
            except (TypeError, ValueError):
                raise EmbeddingError(f"{rid}: column {col} is not a number: {v!r}") from None
            if not math.isfinite(x):
                raise EmbeddingError(f"{rid}: non-finite value {v!r} at column {col} (line {lineno})")
            row.append(x)
        vectors[rid] = row

    if required_ids is not None:
        required = set(required_ids)
        missing = required - vectors.keys()
        surplus = vectors.keys() - required
        if missing:
            raise EmbeddingError(f"missing embeddings for ids {_preview(missing)}")
        if surplus:
            raise EmbeddingError(f"unexpected embedding ids {_preview(surplus)}")

    ids = sorted(vectors)
    matrix = np.array([vectors[i] for i in ids], dtype=np.float64).reshape(len(ids), expected_dim)
    return EmbeddingTable(expected_dim, ids, matrix)


def write_embeddings_csv(path, table: EmbeddingTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"v{i}" for i in range(table.dim)])
        for rid, row in zip(table.ids, table.matrix):
            writer.writerow([rid] + [repr(float(x)) for x in row])
