"""Character- and token-index encodings used by the sequence baselines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from ..corpus.lexer import strip_comments
from ..corpus.records import NAME_PLACEHOLDER, MethodRecord, ensure_prepared

CHAR = "char"
TOKEN = "token"
UNK_INDEX = 0


def masked_text(record: MethodRecord) -> str:
    """Method source with comments removed and the masked name spliced in."""
    record = ensure_prepared(record)
    text = record.source
    for tok in sorted(
        (t for t in record.tokens if t.text == NAME_PLACEHOLDER and t.offset >= 0),
        key=lambda t: t.offset,
        reverse=True,
    ):
        end = tok.offset + len(record.declared_name)
        if text[tok.offset:end] == record.declared_name:
            text = text[: tok.offset] + NAME_PLACEHOLDER + text[end:]
    return strip_comments(text)


def symbols(record: MethodRecord, mode: str) -> list[str]:
    if mode == CHAR:
        return [c for c in masked_text(record) if ord(c) < 128]
    if mode == TOKEN:
        return [t.text for t in ensure_prepared(record).tokens]
    raise ValueError(f"unknown vocabulary mode {mode!r}")


@dataclass
class SequenceVocab:
    mode: str
    map: dict[str, int] = field(default_factory=dict)
    unk_index: int = UNK_INDEX

    def __len__(self):
        return len(self.map)

    def inverse(self) -> dict[int, str]:
        return {i: s for s, i in self.map.items()}

    def to_json(self) -> str:
        return json.dumps({"mode": self.mode, "unk_index": self.unk_index, "map": self.map},
                          ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "SequenceVocab":
        obj = json.loads(text)
        return cls(obj["mode"], dict(obj["map"]), obj["unk_index"])


def build_vocab(records: Iterable[MethodRecord], mode: str) -> SequenceVocab:
    """Index distinct symbols from 1 in order of first appearance."""
    vocab = SequenceVocab(mode)
    for rec in records:
        for sym in symbols(rec, mode):
            if sym not in vocab.map:
                vocab.map[sym] = len(vocab.map) + 1
    return vocab


def encode_sequence(record: MethodRecord, vocab: SequenceVocab) -> list[int]:
    return [vocab.map.get(s, vocab.unk_index) for s in symbols(record, vocab.mode)]
