"""Method records, own-name masking and JSONL corpus I/O."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .lexer import IDENTIFIER, Token, tokenize

SPLITS = ("train", "validation", "test")
NAME_PLACEHOLDER = "METHOD_NAME"

_SPLIT_ALIASES = {
    "train": "train",
    "training": "train",
    "val": "validation",
    "valid": "validation",
    "validation": "validation",
    "test": "test",
    "testing": "test",
}


class CorpusError(ValueError):
    """Malformed corpus input (bad JSON, missing keys, duplicate ids)."""


class StructureError(ValueError):
    """The method declaration could not be located in the token stream."""


@dataclass(frozen=True)
class MethodRecord:
    id: str
    declared_name: str
    source: str
    split: str
    label: str = ""
    path: str = ""
    tokens: tuple[Token, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.declared_name)
        if self.split not in SPLITS:
            raise CorpusError(f"{self.id}: unknown split {self.split!r}")

    def with_tokens(self, tokens: Iterable[Token]) -> "MethodRecord":
        return dataclasses.replace(self, tokens=tuple(tokens))


def find_declaration(tokens) -> int:
    """Index of the declared method name: the first identifier followed by
    ``(`` that precedes the first ``{`` and is not an annotation name."""
    for i, tok in enumerate(tokens):
        if tok.text == "{":
            break
        if (
            tok.kind == IDENTIFIER
            and i + 1 < len(tokens)
            and tokens[i + 1].text == "("
            and (i == 0 or tokens[i - 1].text not in ("@", "."))
        ):
            return i
    raise StructureError("no method declaration found before the body")


def mask_own_name(record: MethodRecord) -> MethodRecord:
    """Replace the declared name, and unqualified self-calls, by a placeholder.

    A call counts as a self-call when the name is followed by ``(`` and is
    either unqualified or qualified by ``this.``. Calls on other receivers
    (``other.equals(x)``) are left alone.
    """
    tokens = list(record.tokens)
    decl = find_declaration(tokens)
    if tokens[decl].text != record.declared_name:
        raise StructureError(
            f"{record.id}: declared name {tokens[decl].text!r} "
            f"does not match {record.declared_name!r}"
        )
    placeholder = lambda tok: Token(IDENTIFIER, NAME_PLACEHOLDER, tok.offset)  # noqa: E731
    tokens[decl] = placeholder(tokens[decl])
    for i in range(decl + 1, len(tokens) - 1):
        tok = tokens[i]
        if tok.kind != IDENTIFIER or tok.text != record.declared_name:
            continue
        if tokens[i + 1].text != "(":
            continue
        prev = tokens[i - 1].text
        if prev == "." and not (i >= 2 and tokens[i - 2].text == "this"):
            continue
        tokens[i] = placeholder(tok)
    return record.with_tokens(tokens)


def prepare(record: MethodRecord) -> MethodRecord:
    """Tokenize and mask a freshly ingested record."""
    return mask_own_name(record.with_tokens(tokenize(record.source)))


def ensure_prepared(record: MethodRecord) -> MethodRecord:
    """``prepare`` the record unless it already carries tokens."""
    return record if record.tokens else prepare(record)


def infer_split(path: str, record_id: str) -> str:
    """Split from a ``train``/``validation``/``test`` path component.

    Falls back to a stable 80/10/10 assignment keyed by a hash of the id.
    """
    for part in Path(path).parts:
        alias = _SPLIT_ALIASES.get(part.lower())
        if alias:
            return alias
    bucket = int(hashlib.sha1(record_id.encode("utf-8")).hexdigest(), 16) % 10
    if bucket < 8:
        return "train"
    return "validation" if bucket == 8 else "test"


def record_from_json(obj: dict) -> MethodRecord:
    missing = [k for k in ("id", "name", "code") if k not in obj]
    if missing:
        raise CorpusError(f"record missing keys {missing}: {str(obj)[:80]}")
    rid = str(obj["id"])
    path = str(obj.get("path", ""))
    split = obj.get("split") or infer_split(path, rid)
    split = _SPLIT_ALIASES.get(str(split).lower(), split)
    return MethodRecord(
        id=rid,
        declared_name=str(obj["name"]),
        source=str(obj["code"]),
        split=split,
        label=str(obj.get("label") or obj["name"]),
        path=path,
    )


def record_to_json(record: MethodRecord) -> dict:
    return {
        "id": record.id,
        "name": record.declared_name,
        "path": record.path,
        "code": record.source,
        "split": record.split,
        "label": record.label,
    }


def iter_jsonl(path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from None


def read_corpus(path) -> list[MethodRecord]:
    records = [record_from_json(obj) for obj in iter_jsonl(path)]
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise CorpusError(f"duplicate id {rec.id!r} in {path}")
        seen.add(rec.id)
    return records


def write_jsonl(path, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=False))
            fh.write("\n")


def write_corpus(path, records: Iterable[MethodRecord]) -> None:
    write_jsonl(path, (record_to_json(r) for r in records))
