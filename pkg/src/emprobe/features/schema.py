"""The 47-slot handcrafted feature schema and token-level counting.

The first 33 slots are name-specific cues (ten groups, one per Top-Ten
method name); the last 14 are simple complexity counts. Each slot carries a
``predicate_id`` of the form ``kind:argument`` that selects the counting
rule, so a serialized schema documents exactly what was counted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..corpus.lexer import IDENTIFIER, KEYWORD, PRIMITIVE_TYPES, Token, strip_comments
from ..corpus.records import (
    NAME_PLACEHOLDER,
    MethodRecord,
    StructureError,
    ensure_prepared,
    find_declaration,
)

METHOD_FEATURE = "method_feature"
COMPLEXITY_FEATURE = "complexity_feature"

SCHEMA_VERSION = "1.0"

# (name, predicate_id), grouped by the method name each cue targets.
METHOD_FEATURES = [
    # equals
    ("Instance", "keyword:instanceof"),
    ("Boolean", "ident:boolean|Boolean"),
    ("equals", "call:equals"),
    ("This", "keyword:this"),
    # main
    ("Println", "call:println"),
    ("String", "ident:String"),
    # setUp
    ("Super", "keyword:super"),
    ("setup", "call-contains:setup"),
    ("New", "keyword:new"),
    ("build", "call:build"),
    ("add", "call:add"),
    # onCreate
    ("Bundle", "ident:Bundle"),
    ("onCreate", "call:onCreate"),
    ("setContentView", "call:setContentView"),
    ("R", "ident-dot:R"),
    # toString
    ("toString", "call:toString"),
    ("format", "call:format"),
    ("StringBuilder", "ident:StringBuilder|StringBuffer"),
    ("append", "call:append"),
    ("+", "operator:+"),
    # run
    ("Handler", "ident:Handler"),
    ("error", "ident-contains:error"),
    ("message", "ident-contains:message"),
    # hashCode
    ("hashCode", "call:hashCode"),
    ("TernaryOperator", "ternary:"),
    # init
    ("init", "call-contains:init"),
    ("set", "call-prefix:set"),
    ("create", "call-contains:create"),
    # execute
    ("CommandLine", "ident:CommandLine"),
    ("execute", "call-contains:execute"),
    ("response", "ident-contains:response"),
    # get
    ("Return", "return-value:"),
    ("get", "call-prefix:get"),
]

COMPLEXITY_FEATURES = [
    ("LOC", "cx:loc"),
    ("Block", "cx:block"),
    ("BasicBlock", "cx:basic_block"),
    ("Parameter", "cx:parameter"),
    ("LocalVariable", "cx:local_variable"),
    ("GlobalVariable", "cx:global_variable"),
    ("Loop", "cx:loop"),
    ("Jump", "cx:jump"),
    ("Decision", "cx:decision"),
    ("Condition", "cx:condition"),
    ("Instance_CX", "cx:instance"),
    ("Function", "cx:function"),
    ("TryCatch", "cx:try_catch"),
    ("Thread", "cx:thread"),
]

N_METHOD = len(METHOD_FEATURES)
N_COMPLEXITY = len(COMPLEXITY_FEATURES)


@dataclass(frozen=True)
class FeatureEntry:
    name: str
    predicate_id: str
    group: str


@dataclass(frozen=True)
class FeatureSchema:
    entries: tuple[FeatureEntry, ...]
    version: str = SCHEMA_VERSION

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        groups = [e.group for e in self.entries]
        n_method = groups.count(METHOD_FEATURE)
        if groups != [METHOD_FEATURE] * n_method + [COMPLEXITY_FEATURE] * (len(groups) - n_method):
            raise ValueError("method features must precede complexity features")

    def __len__(self):
        return len(self.entries)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "entries": [
                    {"name": e.name, "predicate_id": e.predicate_id, "group": e.group}
                    for e in self.entries
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "FeatureSchema":
        obj = json.loads(text)
        entries = tuple(FeatureEntry(**e) for e in obj["entries"])
        return cls(entries, obj["version"])


def default_schema() -> FeatureSchema:
    entries = [FeatureEntry(n, p, METHOD_FEATURE) for n, p in METHOD_FEATURES]
    entries += [FeatureEntry(n, p, COMPLEXITY_FEATURE) for n, p in COMPLEXITY_FEATURES]
    return FeatureSchema(tuple(entries))


_TYPE_ARG_TOKENS = frozenset({"extends", "super", "?", ",", ".", "&", "[", "]", "@"})
_CLOSERS = {">": 1, ">>": 2, ">>>": 3}
_CONDITION_OPS = frozenset({"==", "!=", "<", ">", "<=", ">=", "&&", "||", "!"})
_STATEMENT_START = frozenset({"{", ";", "}", ":"})


class TokenView:
    """Structural facts about one method's token stream, computed lazily."""

    def __init__(self, tokens: Sequence[Token], source: str = ""):
        self.tokens = list(tokens)
        self.texts = [t.text for t in self.tokens]
        self.kinds = [t.kind for t in self.tokens]
        self.source = source
        try:
            self.decl = find_declaration(self.tokens)
        except StructureError:
            self.decl = -1

    def text(self, i: int) -> str:
        return self.texts[i] if 0 <= i < len(self.texts) else ""

    @cached_property
    def param_span(self) -> tuple[int, int]:
        """Half-open index range strictly inside the declaration's parentheses."""
        if self.decl < 0:
            return (0, 0)
        start = self.decl + 2
        depth = 1
        for i in range(start, len(self.texts)):
            t = self.texts[i]
            if t == "(":
                depth += 1
            elif t == ")":
                depth -= 1
                if depth == 0:
                    return (start, i)
        return (start, start)

    @cached_property
    def body_start(self) -> int:
        for i in range(self.param_span[1], len(self.texts)):
            if self.texts[i] == "{":
                return i
        return len(self.texts)

    @cached_property
    def generic_spans(self) -> list[tuple[int, int]]:
        """Closed index ranges of type-argument lists, ``<`` through ``>``."""
        spans = []
        i = 0
        n = len(self.texts)
        while i < n:
            if self.texts[i] == "<" and self._may_open_generic(i):
                end = self._match_generic(i)
                if end is not None:
                    spans.append((i, end))
                    i = end + 1
                    continue
            i += 1
        return spans

    def _may_open_generic(self, i: int) -> bool:
        prev = self.text(i - 1)
        if i > 0 and self.kinds[i - 1] == IDENTIFIER:
            return True
        if prev == ".":
            return True
        # type parameters of the method itself, e.g. ``public <T> T f()``
        return i < self.body_start and (i == 0 or self.kinds[i - 1] == KEYWORD)

    def _match_generic(self, start: int):
        depth = 0
        for j in range(start, len(self.texts)):
            t = self.texts[j]
            if t == "<":
                depth += 1
            elif t in _CLOSERS:
                depth -= _CLOSERS[t]
                if depth == 0:
                    return j
                if depth < 0:
                    return None
            elif t in _TYPE_ARG_TOKENS or self.kinds[j] == IDENTIFIER or t in PRIMITIVE_TYPES:
                continue
            else:
                return None
        return None

    @cached_property
    def in_generic(self) -> frozenset:
        return frozenset(j for a, b in self.generic_spans for j in range(a, b + 1))

    @cached_property
    def generic_end(self) -> dict:
        return dict(self.generic_spans)

    def is_call(self, i: int) -> bool:
        """Identifier ``i`` is a method invocation (not the declaration,
        an annotation, or a constructor after ``new``)."""
        return (
            self.kinds[i] == IDENTIFIER
            and i != self.decl
            and self.text(i + 1) == "("
            and self.text(i - 1) not in ("@", "new")
        )

    @cached_property
    def calls(self) -> list[str]:
        return [self.texts[i] for i in range(len(self.texts)) if self.is_call(i)]

    @cached_property
    def identifiers(self) -> list[str]:
        return [t for t, k in zip(self.texts, self.kinds) if k == IDENTIFIER]

    # -- declarations --------------------------------------------------------

    def _skip_type(self, i: int):
        """Index just past a type starting at ``i``, or None if none parses."""
        t = self.text(i)
        if t in PRIMITIVE_TYPES:
            i += 1
        elif i < len(self.texts) and self.kinds[i] == IDENTIFIER and t != "yield":
            i += 1
            while True:
                if i in self.generic_end and self.text(i) == "<":
                    i = self.generic_end[i] + 1
                if self.text(i) == "." and i + 1 < len(self.texts) and self.kinds[i + 1] == IDENTIFIER:
                    i += 2
                    continue
                break
        else:
            return None
        while self.text(i) == "[" and self.text(i + 1) == "]":
            i += 2
        return i

    def _skip_modifiers(self, i: int) -> int:
        while True:
            if self.text(i) == "final":
                i += 1
            elif self.text(i) == "@" and i + 1 < len(self.texts) and self.kinds[i + 1] == IDENTIFIER:
                i += 2
                while self.text(i) == "." and i + 1 < len(self.texts):
                    i += 2
                if self.text(i) == "(":
                    depth = 0
                    while i < len(self.texts):
                        if self.texts[i] == "(":
                            depth += 1
                        elif self.texts[i] == ")":
                            depth -= 1
                            if depth == 0:
                                i += 1
                                break
                        i += 1
            else:
                return i

    def _local_declaration_at(self, i: int):
        """Variable names declared by a statement starting at ``i``, if any."""
        j = self._skip_type(self._skip_modifiers(i))
        if j is None or j >= len(self.texts) or self.kinds[j] != IDENTIFIER:
            return None
        if self.text(j + 1) not in ("=", ";", ",", ":", "[", ")"):
            return None
        names = [self.texts[j]]
        # further declarators of the same statement: ``int a = 1, b, c;``
        depth = 0
        k = j + 1
        while k < len(self.texts):
            t = self.texts[k]
            if t in ("(", "{", "["):
                depth += 1
            elif t in (")", "}", "]"):
                if depth == 0:
                    break
                depth -= 1
            elif t in (";", ":") and depth == 0:
                break
            elif t == "," and depth == 0 and k + 1 < len(self.texts) and self.kinds[k + 1] == IDENTIFIER:
                names.append(self.texts[k + 1])
            k += 1
        return names

    @cached_property
    def local_declarations(self) -> list[list[str]]:
        out = []
        for i in range(self.body_start + 1, len(self.texts)):
            prev = self.text(i - 1)
            starts = prev in _STATEMENT_START or (
                prev == "(" and self.text(i - 2) in ("for", "try")
            )
            if not starts:
                continue
            names = self._local_declaration_at(i)
            if names:
                out.append(names)
        return out

    @cached_property
    def parameter_names(self) -> list[str]:
        start, end = self.param_span
        names = []
        depth = 0
        last_ident = None
        for i in range(start, end):
            t = self.texts[i]
            if t == "(":
                depth += 1
            elif t == ")":
                depth -= 1
            elif depth == 0 and i not in self.in_generic:
                if t == ",":
                    if last_ident:
                        names.append(last_ident)
                    last_ident = None
                elif self.kinds[i] == IDENTIFIER and self.text(i - 1) != "@":
                    last_ident = t
        if last_ident:
            names.append(last_ident)
        return names

    @cached_property
    def other_declared(self) -> set:
        """Catch parameters and lambda parameters."""
        names = set()
        n = len(self.texts)
        for i in range(n):
            if self.texts[i] == "->":
                if i > 0 and self.kinds[i - 1] == IDENTIFIER:
                    names.add(self.texts[i - 1])
                elif self.text(i - 1) == ")":
                    k = i - 2
                    while k >= 0 and self.texts[k] != "(":
                        if self.kinds[k] == IDENTIFIER and self.text(k + 1) in (",", ")"):
                            names.add(self.texts[k])
                        k -= 1
            elif self.texts[i] == "catch" and self.text(i + 1) == "(":
                k = i + 2
                while k < n and self.texts[k] != ")":
                    k += 1
                if self.kinds[k - 1] == IDENTIFIER:
                    names.add(self.texts[k - 1])
        return names

    # -- complexity counts ---------------------------------------------------

    def loc(self) -> int:
        text = strip_comments(self.source) if self.source else " ".join(self.texts)
        return sum(1 for line in text.splitlines() if line.strip())

    def loops(self) -> int:
        count = 0
        do_braces = set()
        stack = []
        skip_while = False
        for i, t in enumerate(self.texts):
            if t == "{":
                stack.append(self.text(i - 1) == "do")
            elif t == "}":
                if stack and stack.pop():
                    skip_while = True
                    continue
            elif t == "do":
                count += 1
                if self.text(i + 1) != "{":
                    do_braces.add(self._statement_end(i + 1))
            elif t == "while":
                if skip_while or (i - 1) in do_braces:
                    skip_while = False
                    continue
                count += 1
            elif t == "for":
                count += 1
            skip_while = False
        return count

    def _statement_end(self, i: int) -> int:
        depth = 0
        for k in range(i, len(self.texts)):
            t = self.texts[k]
            if t in "({[":
                depth += 1
            elif t in ")}]":
                depth -= 1
            elif t == ";" and depth == 0:
                return k
        return len(self.texts)

    def ternaries(self) -> int:
        return sum(
            1 for i, t in enumerate(self.texts) if t == "?" and i not in self.in_generic
        )

    def decisions(self) -> int:
        return self.texts.count("if") + self.texts.count("case") + self.ternaries()

    def jumps(self) -> int:
        return self.texts.count("break") + self.texts.count("continue")

    def conditions(self) -> int:
        return sum(
            1 for i, t in enumerate(self.texts)
            if t in _CONDITION_OPS and i not in self.in_generic
        )

    def global_variables(self) -> int:
        declared = set(self.parameter_names) | self.other_declared
        for names in self.local_declarations:
            declared.update(names)
        used = set()
        n = len(self.texts)
        for i in range(self.body_start + 1, n):
            if self.kinds[i] != IDENTIFIER:
                continue
            t = self.texts[i]
            if t in declared or t == NAME_PLACEHOLDER or i in self.in_generic:
                continue
            prev, nxt = self.text(i - 1), self.text(i + 1)
            if nxt == "(" or prev in ("new", "@", "instanceof", "break", "continue"):
                continue
            if prev == "." and self.text(i - 2) != "this":
                continue
            if nxt == "<" and (i + 1) in self.generic_end:
                continue
            if (i + 1 < n and self.kinds[i + 1] == IDENTIFIER) or (nxt == "[" and self.text(i + 2) == "]"):
                continue
            if t[0].isupper() and nxt in (".", "::"):
                continue
            if prev == "(" and nxt == ")" and t[0].isupper():
                continue  # cast
            if nxt == ":" and self.text(i - 1) in _STATEMENT_START:
                continue  # label
            used.add(t)
        return len(used)


def _count_predicate(view: TokenView, predicate_id: str) -> int:
    kind, _, arg = predicate_id.partition(":")
    texts, kinds = view.texts, view.kinds
    if kind == "keyword":
        return texts.count(arg)
    if kind == "ident":
        wanted = set(arg.split("|"))
        return sum(1 for t in texts if t in wanted)
    if kind == "ident-dot":
        return sum(
            1 for i, t in enumerate(texts)
            if t == arg and kinds[i] == IDENTIFIER and view.text(i + 1) == "."
        )
    if kind == "ident-contains":
        needle = arg.lower()
        return sum(1 for t in view.identifiers if needle in t.lower())
    if kind == "operator":
        return texts.count(arg)
    if kind == "call":
        return view.calls.count(arg)
    if kind == "call-contains":
        needle = arg.lower()
        return sum(1 for c in view.calls if needle in c.lower())
    if kind == "call-prefix":
        return sum(1 for c in view.calls if c.startswith(arg) and len(c) > len(arg))
    if kind == "ternary":
        return view.ternaries()
    if kind == "return-value":
        return sum(1 for i, t in enumerate(texts) if t == "return" and view.text(i + 1) != ";")
    if kind == "cx":
        return _COMPLEXITY[arg](view)
    raise ValueError(f"unknown predicate {predicate_id!r}")


_COMPLEXITY = {
    "loc": TokenView.loc,
    "block": lambda v: v.texts.count("{"),
    "basic_block": lambda v: 1 + v.decisions() + v.jumps(),
    "parameter": lambda v: len(v.parameter_names),
    "local_variable": lambda v: len(v.local_declarations),
    "global_variable": TokenView.global_variables,
    "loop": TokenView.loops,
    "jump": TokenView.jumps,
    "decision": TokenView.decisions,
    "condition": TokenView.conditions,
    "instance": lambda v: v.texts.count("new"),
    "function": lambda v: len(v.calls),
    "try_catch": lambda v: v.texts.count("try"),
    "thread": lambda v: sum(1 for t in v.texts if t in ("Thread", "Runnable", "synchronized")),
}


def extract_counts(record: MethodRecord, schema: FeatureSchema | None = None) -> np.ndarray:
    """Occurrence count of every schema predicate over a masked record."""
    schema = schema or default_schema()
    record = ensure_prepared(record)
    view = TokenView(record.tokens, record.source)
    return np.array([_count_predicate(view, e.predicate_id) for e in schema.entries], dtype=np.int64)


def count_matrix(records: Sequence[MethodRecord], schema: FeatureSchema | None = None) -> np.ndarray:
    schema = schema or default_schema()
    if not records:
        return np.zeros((0, len(schema)), dtype=np.int64)
    return np.vstack([extract_counts(r, schema) for r in records])
