"""Seeded generators for small synthetic corpora and embeddings.

These back the bundled demo experiment and the test fixtures: a 2-class
``equals``/``toString`` corpus with planted cue tokens, a clone-planted
corpus for deduplication checks, and Gaussian embeddings with a known set
of informative dimensions.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .corpus.records import write_jsonl
from .embeddings import EmbeddingTable, write_embeddings_csv

_SYLLABLES = (
    "ka ro mi tu ne sa lo vi da pe zu fo gri bal tor men sil vak dru pon "
    "cer hul jin wex qua yor fen lat mos brin".split()
)


def _word(rng: np.random.Generator, parts: int = 3) -> str:
    n = int(rng.integers(2, parts + 1))
    return "".join(_SYLLABLES[int(i)] for i in rng.integers(len(_SYLLABLES), size=n))


def _camel(rng, parts: int = 3) -> str:
    w = _word(rng, parts)
    return w[0].upper() + w[1:]


def _fields(rng, k: int) -> list[str]:
    out = []
    while len(out) < k:
        w = _word(rng)
        if w not in out:
            out.append(w)
    return out


def _equals_method(rng) -> str:
    cls = _camel(rng)
    other = str(rng.choice(["o", "obj", "other", "that0"]))
    that = "that" if other != "that0" else "rhs"
    fields = _fields(rng, int(rng.integers(2, 5)))
    lines = ["@Override", f"public boolean equals(Object {other}) {{"]
    if rng.random() < 0.8:
        lines.append(f"    if (this == {other}) return true;")
    if rng.random() < 0.75:
        lines.append(f"    if (!({other} instanceof {cls})) return false;")
    else:
        lines.append(f"    if ({other} == null || getClass() != {other}.getClass()) return false;")
    lines.append(f"    {cls} {that} = ({cls}) {other};")
    terms = []
    for f in fields:
        kind = rng.random()
        if kind < 0.4:
            terms.append(f"{f} == {that}.{f}")
        elif kind < 0.7:
            terms.append(f"Objects.equals({f}, {that}.{f})")
        else:
            terms.append(f"{f}.equals({that}.{f})")
    if rng.random() < 0.15:
        lines.append(f"    // compare {' and '.join(fields)}")
    lines.append("    return " + "\n        && ".join(terms) + ";")
    lines.append("}")
    return "\n".join(lines)


def _tostring_method(rng) -> str:
    cls = _camel(rng)
    fields = _fields(rng, int(rng.integers(2, 5)))
    lines = ["@Override", "public String toString() {"]
    style = rng.random()
    if style < 0.4:
        sb = str(rng.choice(["sb", "builder", "buf"]))
        ctor = "StringBuilder" if rng.random() < 0.8 else "StringBuffer"
        lines.append(f"    {ctor} {sb} = new {ctor}();")
        lines.append(f'    {sb}.append("{cls}{{");')
        for f in fields:
            lines.append(f'    {sb}.append("{f}=").append({f});')
        lines.append(f'    {sb}.append("}}");')
        lines.append(f"    return {sb}.toString();")
    elif style < 0.75:
        parts = " + \", \" + ".join(f'"{f}=" + {f}' for f in fields)
        lines.append(f'    return "{cls}{{" + {parts} + "}}";')
    elif style < 0.9:
        fmt = ", ".join(f"{f}=%s" for f in fields)
        lines.append(f'    return String.format("{cls}[{fmt}]", {", ".join(fields)});')
    else:
        chain = "".join(f'.add("{f}", {f})' for f in fields)
        lines.append(f"    return MoreObjects.toStringHelper(this){chain}.toString();")
    if rng.random() < 0.05:
        lines.insert(2, f"    boolean {_word(rng)} = {fields[0]} != null;")
    lines.append("}")
    return "\n".join(lines)


def make_two_class_corpus(n: int = 200, seed: int = 7) -> list[dict]:
    """Balanced ``equals``/``toString`` corpus with 70/15/15 splits."""
    rng = np.random.default_rng(seed)
    rows = []
    half = n // 2
    n_train, n_val = int(round(half * 0.7)), int(round(half * 0.15))
    for name, make in (("equals", _equals_method), ("toString", _tostring_method)):
        for i in range(half):
            split = "train" if i < n_train else "validation" if i < n_train + n_val else "test"
            rows.append({
                "id": f"{name}-{i:04d}",
                "name": name,
                "path": f"synthetic/{split}/{name}/{i:04d}.java",
                "code": make(rng),
                "split": split,
            })
    return rows


def _random_method(rng, name: str) -> str:
    """A generic method body with at least a dozen distinct identifiers."""
    params = _fields(rng, int(rng.integers(2, 4)))
    locs = _fields(rng, int(rng.integers(4, 7)))
    calls = _fields(rng, int(rng.integers(3, 6)))
    ret = str(rng.choice(["int", "long", "void", "String"]))
    lines = [f"public {ret} {name}({', '.join('int ' + p for p in params)}) {{"]
    for i, v in enumerate(locs):
        a, b = rng.choice(params + locs[:i] if i else params, size=2)
        op = str(rng.choice(["+", "-", "*"]))
        lines.append(f"    int {v} = {a} {op} {b} + {int(rng.integers(0, 1000))};")
    for c in calls:
        arg = str(rng.choice(locs))
        if rng.random() < 0.5:
            lines.append(f"    if ({arg} > {int(rng.integers(0, 50))}) {{ {c}({arg}); }}")
        else:
            lines.append(f'    {c}({arg}, "{_word(rng)}");')
    if ret == "void":
        lines.append(f"    {str(rng.choice(calls))}({locs[-1]});")
    elif ret == "String":
        lines.append(f"    return String.valueOf({locs[-1]});")
    else:
        lines.append(f"    return {locs[-1]};")
    lines.append("}")
    return "\n".join(lines)


def make_clone_corpus(n_methods: int = 500, n_pairs: int = 50, seed: int = 11):
    """Random methods plus planted clone pairs.

    Half of the clones are exact copies, half rename one local variable
    everywhere it occurs. Returns ``(rows, planted)`` where ``planted`` is the
    set of ``(original_id, clone_id)`` pairs with ids in sorted order.
    """
    from .corpus.lexer import tokenize

    rng = np.random.default_rng(seed)
    names = ("equals", "main", "setUp", "onCreate", "toString", "run", "hashCode",
             "init", "execute", "get")
    n_base = n_methods - n_pairs
    rows = []
    for i in range(n_base):
        name = names[i % len(names)]
        rows.append({"id": f"m{i:04d}", "name": name, "path": "synthetic/train/x.java",
                     "code": _random_method(rng, name), "split": "train"})
    originals = rng.choice(n_base, size=n_pairs, replace=False)
    planted = set()
    for k, idx in enumerate(sorted(originals.tolist())):
        src = rows[idx]
        code = src["code"]
        if k % 2:
            # rename a local variable declared as ``int <v> =``
            toks = tokenize(code)
            locals_ = [toks[j + 1].text for j in range(len(toks) - 2)
                       if toks[j].text == "int" and toks[j + 2].text == "="]
            old = locals_[0]
            new = old + "Renamed"
            pieces, last = [], 0
            for t in toks:
                if t.text == old:
                    pieces.append(code[last:t.offset])
                    pieces.append(new)
                    last = t.offset + len(old)
            pieces.append(code[last:])
            code = "".join(pieces)
        cid = f"m{n_base + k:04d}"
        rows.append({"id": cid, "name": src["name"], "path": src["path"], "code": code,
                     "split": "train"})
        planted.add(tuple(sorted((src["id"], cid))))
    return rows, planted


def make_embeddings(ids, labels, dim: int = 384, informative=(), shift: float = 1.5,
                    seed: int = 0) -> EmbeddingTable:
    """Standard normal vectors; ``informative`` dims are shifted by ``shift * y``."""
    rng = np.random.default_rng(seed)
    ids = list(ids)
    x = rng.standard_normal((len(ids), dim))
    y = np.asarray(labels, dtype=np.float64)
    for d in informative:
        x[:, d] += shift * y
    order = np.argsort(ids, kind="stable")
    return EmbeddingTable(dim, [ids[i] for i in order], np.round(x[order], 6))


def bundled_corpus_path() -> Path:
    return Path(str(resources.files("emprobe") / "data" / "synthetic_corpus.jsonl"))


def write_demo_experiment(outdir, seed: int = 0) -> Path:
    """Write corpus, 384-d embeddings and an experiment config into ``outdir``.

    Returns the config path.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    corpus = outdir / "corpus.jsonl"
    corpus.write_text(bundled_corpus_path().read_text(encoding="utf-8"), encoding="utf-8")
    rows = [json.loads(line) for line in corpus.read_text(encoding="utf-8").splitlines() if line]
    labels = [1 if r["name"] == "equals" else -1 for r in rows]
    table = make_embeddings([r["id"] for r in rows], labels, dim=384,
                            informative=range(0, 384, 48), shift=0.6, seed=seed)
    write_embeddings_csv(outdir / "embeddings.csv", table)
    config = {
        "corpus_path": "corpus.jsonl",
        "workdir": "work",
        "targets": ["equals"],
        "n_train": 70,
        "seed": seed,
        "embedding_path": "embeddings.csv",
        "embedding_dim": 384,
    }
    path = outdir / "exp.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return path


def regenerate_bundled_corpus(path=None) -> None:
    write_jsonl(path or bundled_corpus_path(), make_two_class_corpus())
