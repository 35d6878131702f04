"""Balanced per-target datasets: one binary problem per method name."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .records import SPLITS, MethodRecord, iter_jsonl, write_jsonl

POSITIVE = "positive"
NEGATIVE = "negative"


class InsufficientDataError(ValueError):
    pass


@dataclass
class LabeledDataset:
    target: str
    train: list[tuple[str, str]]
    validation: list[tuple[str, str]]
    test: list[tuple[str, str]]
    seed: int

    def split(self, name: str) -> list[tuple[str, str]]:
        return getattr(self, name)

    def ids(self, name: str) -> list[str]:
        return [rid for rid, _ in self.split(name)]

    def labels(self, name: str) -> np.ndarray:
        """Labels of a split as +1/-1."""
        return np.array([1 if lab == POSITIVE else -1 for _, lab in self.split(name)])

    def sizes(self) -> dict[str, int]:
        return {s: len(self.split(s)) for s in SPLITS}


def _sample(rng: np.random.Generator, ids: list[str], k: int) -> list[str]:
    if k >= len(ids):
        return list(ids)
    picked = rng.choice(len(ids), size=k, replace=False)
    return [ids[i] for i in sorted(picked)]


def assemble_dataset(
    corpus: Sequence[MethodRecord],
    target: str,
    n_train: int = 1000,
    seed: int = 0,
    allow_small: bool = False,
) -> LabeledDataset:
    """Sample a balanced dataset for ``target``.

    Train gets ``n_train`` positives and ``n_train`` negatives drawn without
    replacement. Validation and test keep every positive of their split and
    an equal number of sampled negatives. With ``allow_small`` a shortfall
    shrinks both classes to the smaller available count instead of raising.
    """
    pools = {s: ([], []) for s in SPLITS}
    for rec in sorted(corpus, key=lambda r: r.id):
        pos, neg = pools[rec.split]
        (pos if rec.label == target else neg).append(rec.id)

    rng = np.random.default_rng(seed)
    out = {}
    for split in SPLITS:
        pos, neg = pools[split]
        want = n_train if split == "train" else len(pos)
        for kind, pool in (("positives", pos), ("negatives", neg)):
            if len(pool) < want and not allow_small:
                raise InsufficientDataError(
                    f"insufficient {kind} for {target!r} in {split}: {len(pool)} < {want}"
                )
        k = min(want, len(pos), len(neg))
        chosen_pos = _sample(rng, pos, k)
        chosen_neg = _sample(rng, neg, k)
        rows = [(i, POSITIVE) for i in chosen_pos] + [(i, NEGATIVE) for i in chosen_neg]
        out[split] = sorted(rows)
    return LabeledDataset(target, out["train"], out["validation"], out["test"], seed)


def write_manifest(path, ds: LabeledDataset) -> None:
    write_jsonl(
        path,
        ({"id": rid, "label": lab, "split": split}
         for split in SPLITS for rid, lab in ds.split(split)),
    )


def read_manifest(path, target: str, seed: int) -> LabeledDataset:
    rows = {s: [] for s in SPLITS}
    for obj in iter_jsonl(path):
        rows[obj["split"]].append((obj["id"], obj["label"]))
    return LabeledDataset(target, rows["train"], rows["validation"], rows["test"], seed)
