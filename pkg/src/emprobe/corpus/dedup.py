"""Near-clone detection with two Jaccard thresholds and union-find grouping.

Two methods are duplicates when the Jaccard index over their sets of
identifier/literal texts reaches ``t0`` and the Jaccard index over the
multisets of all token texts reaches ``t1``. Candidate pairs come from a
prefix-filtered set-similarity join over the key sets, so only pairs that
can possibly reach ``t0`` are verified.
"""

from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .lexer import IDENTIFIER, LITERAL_KINDS
from .records import MethodRecord, ensure_prepared


@dataclass(frozen=True)
class DedupConfig:
    t0: float = 0.8
    t1: float = 0.7

    def __post_init__(self):
        for name in ("t0", "t1"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class DuplicatePair:
    a: str
    b: str
    key_jaccard: float
    multiset_jaccard: float


@dataclass(frozen=True)
class RemovedRecord:
    group_id: int
    kept_id: str
    removed_id: str
    key_jaccard: float
    multiset_jaccard: float


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self):
        self.parent = {}
        self.rank = {}

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            self.rank[x] = 0
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1

    def groups(self) -> dict:
        out = defaultdict(list)
        for x in self.parent:
            out[self.find(x)].append(x)
        return out


def _tokens(record: MethodRecord):
    # records read straight from a corpus file carry no tokens yet
    return ensure_prepared(record).tokens


def key_set(record: MethodRecord) -> frozenset:
    return frozenset(
        t.text for t in _tokens(record) if t.kind == IDENTIFIER or t.kind in LITERAL_KINDS
    )


def token_multiset(record: MethodRecord) -> Counter:
    return Counter(t.text for t in _tokens(record))


def set_jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


def multiset_jaccard(a: Counter, b: Counter) -> float:
    size_a = sum(a.values())
    size_b = sum(b.values())
    if size_a == 0 and size_b == 0:
        return 1.0
    if size_a == 0 or size_b == 0:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    inter = sum(min(count, b[text]) for text, count in a.items() if text in b)
    return inter / (size_a + size_b - inter)


def similarity(a: MethodRecord, b: MethodRecord) -> tuple[float, float]:
    """Return ``(key_jaccard, multiset_jaccard)`` for two tokenized records."""
    return (
        set_jaccard(key_set(a), key_set(b)),
        multiset_jaccard(token_multiset(a), token_multiset(b)),
    )


def _candidate_pairs(keys: Sequence[frozenset], t0: float) -> Iterable[tuple[int, int]]:
    n = len(keys)
    if t0 <= 0.0:
        for i in range(n):
            for j in range(i + 1, n):
                yield i, j
        return

    empties = [i for i, k in enumerate(keys) if not k]
    for x in range(len(empties)):
        for y in range(x + 1, len(empties)):
            yield empties[x], empties[y]

    freq = Counter(tok for k in keys for tok in k)
    order = lambda tok: (freq[tok], tok)  # noqa: E731
    index = defaultdict(list)
    # Visit sets by increasing size so the size filter only looks backwards.
    by_size = sorted((i for i in range(n) if keys[i]), key=lambda i: (len(keys[i]), i))
    for i in by_size:
        tokens = sorted(keys[i], key=order)
        size = len(tokens)
        prefix = size - math.ceil(t0 * size - 1e-9) + 1
        min_size = t0 * size - 1e-9
        seen = set()
        for tok in tokens[:prefix]:
            for j in index[tok]:
                if j in seen or len(keys[j]) < min_size:
                    continue
                seen.add(j)
                yield (j, i) if j < i else (i, j)
            index[tok].append(i)


def duplicate_pairs(records: Sequence[MethodRecord], cfg: DedupConfig) -> list[DuplicatePair]:
    """All unordered record pairs meeting both thresholds, sorted by id."""
    keys = [key_set(r) for r in records]
    bags = [token_multiset(r) for r in records]
    pairs = []
    for i, j in _candidate_pairs(keys, cfg.t0):
        kj = set_jaccard(keys[i], keys[j])
        if kj < cfg.t0:
            continue
        mj = multiset_jaccard(bags[i], bags[j])
        if mj < cfg.t1:
            continue
        a, b = sorted((records[i].id, records[j].id))
        pairs.append(DuplicatePair(a, b, kj, mj))
    pairs.sort(key=lambda p: (p.a, p.b))
    return pairs


def _representative(members: list[MethodRecord]) -> MethodRecord:
    train = [m for m in members if m.split == "train"]
    return min(train or members, key=lambda m: m.id)


def dedup(
    corpus: Sequence[MethodRecord], cfg: DedupConfig = DedupConfig()
) -> tuple[list[MethodRecord], list[RemovedRecord]]:
    """Remove near-clones, keeping one representative per duplicate group.

    Groups are the transitive closure of the duplicate relation. The kept
    member is the smallest id among the group's train records, or the
    smallest id overall when the group has no train record, so evaluation
    splits never keep a clone of a training method.
    """
    by_id = {r.id: r for r in corpus}
    uf = UnionFind()
    for pair in duplicate_pairs(corpus, cfg):
        uf.union(pair.a, pair.b)

    removed: dict[str, tuple[str, int]] = {}
    groups = sorted(
        (sorted(ids) for ids in uf.groups().values() if len(ids) > 1),
        key=lambda ids: _representative([by_id[i] for i in ids]).id,
    )
    report = []
    for gid, ids in enumerate(groups):
        keep = _representative([by_id[i] for i in ids])
        for rid in ids:
            if rid == keep.id:
                continue
            removed[rid] = (keep.id, gid)
            kj, mj = similarity(keep, by_id[rid])
            report.append(RemovedRecord(gid, keep.id, rid, kj, mj))
    kept = [r for r in corpus if r.id not in removed]
    return kept, report


def write_dedup_report(path, rows: Iterable[RemovedRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group_id", "kept_id", "removed_id", "key_jaccard", "multiset_jaccard"])
        for row in rows:
            writer.writerow(
                [row.group_id, row.kept_id, row.removed_id,
                 f"{row.key_jaccard:.6f}", f"{row.multiset_jaccard:.6f}"]
            )
