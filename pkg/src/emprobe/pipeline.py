"""Seeded, resumable pipeline stages over a work directory.

Each stage records a manifest under ``.stages/`` with a key hashed from its
slice of the configuration and the keys of the stages it reads from. Output
names carry the seed and a prefix of that key, so a rerun with unchanged
inputs finds a fresh manifest and does nothing.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .analysis.infogain import rank_dimensions, write_ranking
from .analysis.metrics import Metrics, confusion, metrics
from .analysis.pruning import prune_experiment
from .analysis.report import (
    SCHEME_LABELS,
    make_report,
    render_markdown,
    write_report_csv,
)
from .config import CODE2VEC, RunConfig
from .corpus.datasets import (
    InsufficientDataError,
    LabeledDataset,
    assemble_dataset,
    read_manifest,
    write_manifest,
)
from .corpus.dedup import dedup, write_dedup_report
from .corpus.lexer import LexError
from .corpus.records import (
    SPLITS,
    CorpusError,
    StructureError,
    prepare,
    read_corpus,
    write_corpus,
)
from .embeddings import EmbeddingError, import_embeddings
from .features.encoding import encode_matrix, fit_scaler
from .features.io import read_feature_csv, write_feature_csv, write_sequences
from .features.schema import SCHEMA_VERSION, count_matrix, default_schema
from .features.sequences import CHAR, TOKEN, build_vocab, encode_sequence
from .plotting import plot_f1_bars, plot_ig_distribution, plot_projection
from .projection import ProjectionError, tsne_project, write_projection_csv
from .svm import KernelSpec, SvmConfig, SvmError, SvmModel, grid_search, write_grid_table

log = logging.getLogger(__name__)

STAGES = ("ingest", "dedup", "split", "featurize", "embed", "train", "evaluate", "ig", "prune",
          "tsne", "report")

PREREQUISITES = {
    "ingest": (),
    "dedup": ("ingest",),
    "split": ("dedup",),
    "featurize": ("split",),
    "embed": ("split",),
    "train": ("featurize", "embed"),
    "evaluate": ("train",),
    "ig": ("featurize", "embed"),
    "prune": ("evaluate",),
    "tsne": ("featurize", "embed"),
    "report": ("evaluate",),
}
# read when fresh, and then part of the key, but never required
OPTIONAL_INPUTS = {"report": ("prune",)}

DATA_ERRORS = (CorpusError, StructureError, LexError, InsufficientDataError, EmbeddingError,
               SvmError, ProjectionError)

EXIT_OK, EXIT_VALIDATION, EXIT_DATA = 0, 1, 2


class PipelineError(Exception):
    """A run that cannot proceed; ``exit_code`` says why."""

    def __init__(self, message: str, exit_code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass
class StageOutcome:
    name: str
    status: str  # "ran", "skipped" or "failed"
    seconds: float
    outputs: list[str] = field(default_factory=list)
    message: str = ""


@dataclass
class ExitReport:
    workdir: str
    stages: list[StageOutcome] = field(default_factory=list)
    exit_code: int = EXIT_OK
    error: str = ""

    @property
    def outputs(self) -> list[str]:
        return [p for s in self.stages for p in s.outputs]

    def to_json(self) -> str:
        d = asdict(self)
        d["outputs"] = self.outputs
        return json.dumps(d, indent=2)


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _hash_json(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode("utf-8")).hexdigest()


class Workspace:
    """Manifests, freshness checks and output naming under one work directory."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.root = cfg.workdir_path
        self.stage_dir = self.root / ".stages"
        self._file_hashes: dict[tuple, str] = {}

    # -- manifests -------------------------------------------------------
    def manifest_path(self, stage: str) -> Path:
        return self.stage_dir / f"{stage}.json"

    def manifest(self, stage: str) -> dict | None:
        path = self.manifest_path(stage)
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def write_manifest(self, stage: str, key: str, outputs: dict[str, Path]) -> dict:
        rel = {name: p.relative_to(self.root).as_posix() for name, p in sorted(outputs.items())}
        digests = {r: _sha256_file(self.root / r) for r in sorted(rel.values())}
        old = self.manifest(stage)
        if old:
            # drop superseded outputs of this same stage
            for r in set(old.get("outputs", {}).values()) - set(rel.values()):
                (self.root / r).unlink(missing_ok=True)
        obj = {"stage": stage, "key": key, "outputs": rel, "digests": digests}
        self.stage_dir.mkdir(parents=True, exist_ok=True)
        self.manifest_path(stage).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                                             encoding="utf-8")
        return obj

    def outputs(self, stage: str) -> dict[str, Path]:
        m = self.manifest(stage)
        return {name: self.root / r for name, r in m["outputs"].items()} if m else {}

    # -- keys ------------------------------------------------------------
    def _file_hash(self, path: Path) -> str:
        st = path.stat()
        k = (str(path), st.st_mtime_ns, st.st_size)
        if k not in self._file_hashes:
            self._file_hashes[k] = _sha256_file(path)
        return self._file_hashes[k]

    def _config_slice(self, stage: str) -> dict:
        c = self.cfg
        grid = asdict(c.grid)
        return {
            "ingest": lambda: {"corpus": self._file_hash(c.resolve(c.corpus_path))},
            "dedup": lambda: asdict(c.dedup),
            "split": lambda: {"targets": list(c.targets), "n_train": c.n_train, "seed": c.seed,
                              "allow_small": c.allow_small},
            "featurize": lambda: {"schemes": list(c.schemes), "sequences": c.sequences,
                                  "schema": SCHEMA_VERSION},
            "embed": lambda: {
                "embeddings": self._file_hash(c.resolve(c.embedding_path))
                if c.embedding_path else None,
                "dim": c.embedding_dim,
            },
            "train": lambda: {"grid": grid, "seed": c.seed, "schemes": list(c.all_schemes)},
            "evaluate": lambda: {},
            "ig": lambda: {},
            "prune": lambda: {"fractions": list(c.prune_fractions), "grid": grid, "seed": c.seed},
            "tsne": lambda: {**asdict(c.tsne.params), "max_points": c.tsne.max_points,
                             "split": c.tsne.split, "seed": c.seed},
            "report": lambda: {},
        }[stage]()

    def expected_key(self, stage: str) -> str:
        inputs = {}
        for p in PREREQUISITES[stage]:
            m = self.manifest(p)
            inputs[p] = m["key"] if m else None
        for p in OPTIONAL_INPUTS.get(stage, ()):
            inputs[p] = self.manifest(p)["key"] if self.is_fresh(p) else None
        return _hash_json({"stage": stage, "version": __version__,
                           "config": self._config_slice(stage), "inputs": inputs})

    def _self_consistent(self, stage: str) -> bool:
        m = self.manifest(stage)
        if m is None or m.get("key") != self.expected_key(stage):
            return False
        for rel, digest in m["digests"].items():
            path = self.root / rel
            if not path.is_file() or self._file_hash(path) != digest:
                return False
        return True

    def stale_ancestor(self, stage: str) -> str | None:
        """Earliest stage on the dependency path whose outputs are missing or out of date."""
        for p in PREREQUISITES[stage]:
            bad = self.stale_ancestor(p)
            if bad:
                return bad
        return None if self._self_consistent(stage) else stage

    def is_fresh(self, stage: str) -> bool:
        return self.stale_ancestor(stage) is None

    def path(self, subdir: str, logical: str, ext: str, key: str) -> Path:
        p = self.root / subdir / f"{logical}-s{self.cfg.seed}-{key[:12]}.{ext}"
        p.parent.mkdir(parents=True, exist_ok=True)
        return p


# -- helpers shared by stages ----------------------------------------------

def _load_records(ws: Workspace, stage: str, name: str):
    return [prepare(r) for r in read_corpus(ws.outputs(stage)[name])]


def _datasets(ws: Workspace) -> dict[str, LabeledDataset]:
    outs = ws.outputs("split")
    return {t: read_manifest(outs[f"dataset/{t}"], t, ws.cfg.seed) for t in ws.cfg.targets}


def _matrix(ws: Workspace, target: str, scheme: str, split: str):
    """``(ids, labels, names, matrix)`` for one scheme and split."""
    stage = "embed" if scheme == CODE2VEC else "featurize"
    return read_feature_csv(ws.outputs(stage)[f"{target}/{scheme}/{split}"])


def _xy(ws, target, scheme, split):
    _, y, _, x = _matrix(ws, target, scheme, split)
    return x, y


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


_METRIC_FIELDS = ("accuracy", "precision", "recall", "f1")


def _metrics_from(row: dict, prefix: str = "") -> Metrics:
    return Metrics(*(float(row[prefix + k]) for k in _METRIC_FIELDS))


# -- stages -----------------------------------------------------------------

def stage_ingest(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    records = read_corpus(cfg.resolve(cfg.corpus_path))
    if not records:
        raise CorpusError("corpus is empty")
    for rec in records:
        prepare(rec)  # fail early on lexing or declaration problems
    out = ws.path("corpus", "ingested", "jsonl", key)
    write_corpus(out, sorted(records, key=lambda r: r.id))
    return {"corpus": out}


def stage_dedup(ws: Workspace, key: str) -> dict[str, Path]:
    records = _load_records(ws, "ingest", "corpus")
    kept, removed = dedup(records, ws.cfg.dedup)
    log.info("dedup kept %d of %d methods", len(kept), len(records))
    out = ws.path("corpus", "kept", "jsonl", key)
    report = ws.path("corpus", "dedup-report", "csv", key)
    write_corpus(out, kept)
    write_dedup_report(report, removed)
    return {"kept": out, "dedup_report": report}


def stage_split(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    kept = read_corpus(ws.outputs("dedup")["kept"])
    outs = {}
    for t in cfg.targets:
        ds = assemble_dataset(kept, t, n_train=cfg.n_train, seed=cfg.seed,
                              allow_small=cfg.allow_small)
        for split in SPLITS:
            if len(ds.split(split)) == 0:
                raise InsufficientDataError(f"dataset for {t!r} has an empty {split} split")
        outs[f"dataset/{t}"] = p = ws.path(f"datasets/{t}", "manifest", "jsonl", key)
        write_manifest(p, ds)
    return outs


def stage_featurize(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    schema = default_schema()
    by_id = {r.id: r for r in _load_records(ws, "dedup", "kept")}
    outs = {"schema": ws.path("features", "schema", "json", key)}
    outs["schema"].write_text(schema.to_json() + "\n", encoding="utf-8")

    vocabs = {}
    if cfg.sequences:
        pool = [r for r in by_id.values() if r.split in ("train", "validation")]
        for mode, name in ((CHAR, "charseq"), (TOKEN, "tokenseq")):
            vocabs[name] = build_vocab(pool, mode)
            outs[f"vocab/{name}"] = p = ws.path("features", f"vocab-{name}", "json", key)
            p.write_text(vocabs[name].to_json() + "\n", encoding="utf-8")

    names = schema.names
    for t, ds in _datasets(ws).items():
        counts = {s: count_matrix([by_id[i] for i in ds.ids(s)], schema) for s in SPLITS}
        scaler = fit_scaler(counts["train"])
        outs[f"{t}/scaler"] = p = ws.path(f"features/{t}", "scaler", "json", key)
        p.write_text(json.dumps({"columns": list(scaler.columns),
                                 "mean": [repr(float(v)) for v in scaler.mean],
                                 "std": [repr(float(v)) for v in scaler.std]}) + "\n",
                     encoding="utf-8")
        for s in SPLITS:
            ids, labels = ds.ids(s), ds.labels(s)
            outs[f"{t}/counts/{s}"] = p = ws.path(f"features/{t}", f"counts-{s}", "csv", key)
            write_feature_csv(p, ids, labels, names, counts[s])
            for scheme in cfg.schemes:
                x = encode_matrix(counts[s], scheme, scaler)
                outs[f"{t}/{scheme}/{s}"] = p = ws.path(f"features/{t}", f"{scheme}-{s}", "csv", key)
                write_feature_csv(p, ids, labels, names[: x.shape[1]], x)
            for name, vocab in vocabs.items():
                outs[f"{t}/{name}/{s}"] = p = ws.path(f"features/{t}", f"{name}-{s}", "jsonl", key)
                write_sequences(p, ((i, lab, encode_sequence(by_id[i], vocab))
                                    for i, lab in zip(ids, labels)))
    return outs


def stage_embed(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    if not cfg.embedding_path:
        return {}
    ingested = read_corpus(ws.outputs("ingest")["corpus"])
    table = import_embeddings(cfg.resolve(cfg.embedding_path), cfg.embedding_dim,
                              required_ids={r.id for r in ingested})
    names = [f"v{i}" for i in range(cfg.embedding_dim)]
    outs = {}
    for t, ds in _datasets(ws).items():
        for s in SPLITS:
            ids = ds.ids(s)
            outs[f"{t}/{CODE2VEC}/{s}"] = p = ws.path(f"features/{t}", f"{CODE2VEC}-{s}", "csv", key)
            write_feature_csv(p, ids, ds.labels(s), names, table.vectors(ids))
    return outs


def stage_train(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    outs = {}
    for t in cfg.targets:
        for scheme in cfg.all_schemes:
            chosen, model, rows = grid_search(
                _xy(ws, t, scheme, "train"), _xy(ws, t, scheme, "validation"), cfg.grid.spec(),
                kernel_kind=cfg.grid.kernel, kkt_tolerance=cfg.grid.kkt_tolerance,
                max_passes=cfg.grid.max_passes, seed=cfg.seed)
            log.info("%s/%s: C=%g gamma=%s", t, scheme, chosen.C, chosen.kernel.gamma)
            outs[f"{t}/{scheme}/model"] = p = ws.path(f"models/{t}", scheme, "json", key)
            p.write_text(model.to_json() + "\n", encoding="utf-8")
            outs[f"{t}/{scheme}/grid"] = p = ws.path(f"models/{t}", f"{scheme}-grid", "csv", key)
            write_grid_table(p, rows)
            outs[f"{t}/{scheme}/chosen"] = p = ws.path(f"models/{t}", f"{scheme}-chosen", "json", key)
            p.write_text(json.dumps({"C": chosen.C, "gamma": chosen.kernel.gamma}) + "\n",
                         encoding="utf-8")
    return outs


_METRICS_HEADER = ["target", "scheme", "C", "gamma", *_METRIC_FIELDS, "tp", "tn", "fp", "fn"]


def stage_evaluate(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    models = ws.outputs("train")
    rows = []
    for t in cfg.targets:
        for scheme in cfg.all_schemes:
            model = SvmModel.from_json(models[f"{t}/{scheme}/model"].read_text(encoding="utf-8"))
            x, y = _xy(ws, t, scheme, "test")
            c = confusion(model.predict_labels(x), y)
            m = metrics(c)
            cell = json.loads(models[f"{t}/{scheme}/chosen"].read_text(encoding="utf-8"))
            gamma = "" if cell["gamma"] is None else repr(float(cell["gamma"]))
            rows.append([t, scheme, repr(float(cell["C"])), gamma, *(repr(getattr(m, k)) for k in _METRIC_FIELDS),
                         c.tp, c.tn, c.fp, c.fn])
    out = ws.path("reports", "metrics", "csv", key)
    _write_rows(out, _METRICS_HEADER, rows)
    return {"metrics": out}


def _feature_names(ws, target, scheme) -> list[str]:
    return _matrix(ws, target, scheme, "train")[2]


def stage_ig(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    outs = {}
    for t in cfg.targets:
        for scheme in cfg.all_schemes:
            x, y = _xy(ws, t, scheme, "train")
            ranking = rank_dimensions(x, y)
            outs[f"{t}/{scheme}/ig"] = p = ws.path("reports/ig", f"{t}-{scheme}", "csv", key)
            write_ranking(p, ranking, _feature_names(ws, t, scheme))
            outs[f"{t}/{scheme}/ig_plot"] = p = ws.path("reports/ig", f"{t}-{scheme}", "svg", key)
            plot_ig_distribution(p, ranking.ig, f"{t}: {SCHEME_LABELS.get(scheme, scheme)}")
    return outs


_PRUNE_HEADER = ["target", "scheme", "fraction", "kept", "total", "C", "gamma",
                 *(f"full_{k}" for k in _METRIC_FIELDS), *(f"pruned_{k}" for k in _METRIC_FIELDS),
                 "kept_dims"]


def stage_prune(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    evaluated = {(r["target"], r["scheme"]): r for r in _read_rows(ws.outputs("evaluate")["metrics"])}
    rows = []
    for t in cfg.targets:
        for scheme in cfg.all_schemes:
            row = evaluated[(t, scheme)]
            gamma = None if row["gamma"] == "" else float(row["gamma"])
            full = (SvmConfig(C=float(row["C"]), kernel=KernelSpec(cfg.grid.kernel, gamma),
                              kkt_tolerance=cfg.grid.kkt_tolerance, max_passes=cfg.grid.max_passes,
                              seed=cfg.seed), _metrics_from(row))
            splits = [_xy(ws, t, scheme, s) for s in SPLITS]
            ranking = rank_dimensions(*splits[0])
            for frac in cfg.prune_fractions:
                r = prune_experiment(*splits, frac, cfg.grid.spec(), kernel_kind=cfg.grid.kernel,
                                     seed=cfg.seed, full=full, ranking=ranking)
                g = r.config_pruned.kernel.gamma
                rows.append([t, scheme, repr(frac), len(r.kept_dims), len(ranking.ig),
                             repr(r.config_pruned.C), "" if g is None else repr(g),
                             *(repr(getattr(r.metrics_full, k)) for k in _METRIC_FIELDS),
                             *(repr(getattr(r.metrics_pruned, k)) for k in _METRIC_FIELDS),
                             " ".join(map(str, r.kept_dims))])
    out = ws.path("reports", "pruning", "csv", key)
    _write_rows(out, _PRUNE_HEADER, rows)
    return {"pruning": out}


def stage_tsne(ws: Workspace, key: str) -> dict[str, Path]:
    cfg = ws.cfg
    settings = cfg.tsne
    outs = {}
    for t in cfg.targets:
        for scheme in cfg.all_schemes:
            ids, y, _, x = _matrix(ws, t, scheme, settings.split)
            if len(ids) > settings.max_points:
                rng = np.random.default_rng(cfg.seed)
                keep = np.sort(rng.choice(len(ids), size=settings.max_points, replace=False))
                ids, y, x = [ids[i] for i in keep], y[keep], x[keep]
            n = len(ids)
            # the usual rule of thumb: perplexity at most a third of the neighbours
            perplexity = min(settings.params.perplexity, (n - 1) / 3)
            if n < 4 or perplexity <= 1:
                log.warning("t-SNE skipped for %s/%s: only %d points", t, scheme, n)
                continue
            params = settings.params
            if perplexity != params.perplexity:
                log.info("t-SNE %s/%s: perplexity lowered to %.3g for %d points",
                         t, scheme, perplexity, n)
                params = type(params)(**{**asdict(params), "perplexity": perplexity})
            proj = tsne_project(x, params, ids=ids)
            outs[f"{t}/{scheme}/tsne"] = p = ws.path("reports/tsne", f"{t}-{scheme}", "csv", key)
            write_projection_csv(p, proj, y)
            outs[f"{t}/{scheme}/tsne_plot"] = p = ws.path("reports/tsne", f"{t}-{scheme}", "svg", key)
            plot_projection(p, proj, y, f"{t}: {SCHEME_LABELS.get(scheme, scheme)}")
    return outs


def _pct(text: str) -> str:
    return f"{float(text) * 100:.2f}"


def stage_report(ws: Workspace, key: str) -> dict[str, Path]:
    from .reference import (
        REFERENCE_AVERAGES,
        classifier_results,
        handcrafted_results,
    )

    evaluated = _read_rows(ws.outputs("evaluate")["metrics"])
    table = make_report((r["target"], r["scheme"], _metrics_from(r)) for r in evaluated)
    outs = {"results_csv": ws.path("reports", "results", "csv", key),
            "results_md": ws.path("reports", "results", "md", key),
            "f1_plot": ws.path("reports", "f1", "svg", key),
            "reference_md": ws.path("reports", "reference", "md", key)}
    write_report_csv(outs["results_csv"], table)

    md = [render_markdown(table, "Test results"), "## Selected grid cells", ""]
    md += ["| Method | Scheme | C | gamma |", "|---|---|---|---|"]
    md += [f"| {r['target']} | {SCHEME_LABELS.get(r['scheme'], r['scheme'])} | {r['C']} | "
           f"{r['gamma'] or '-'} |" for r in evaluated]
    if ws.is_fresh("prune"):
        md += ["", "## Pruning by information gain", "",
               "| Method | Scheme | Fraction | Dims | F1 full | F1 pruned |", "|---|---|---|---|---|---|"]
        for r in _read_rows(ws.outputs("prune")["pruning"]):
            md.append(f"| {r['target']} | {SCHEME_LABELS.get(r['scheme'], r['scheme'])} | "
                      f"{float(r['fraction']):g} | {r['kept']}/{r['total']} | "
                      f"{_pct(r['full_f1'])} | {_pct(r['pruned_f1'])} |")
    outs["results_md"].write_text("\n".join(md) + "\n", encoding="utf-8")
    plot_f1_bars(outs["f1_plot"], table, "Test F1")

    ref = [render_markdown(make_report(handcrafted_results()),
                           "Full-scale reference: handcrafted encodings"),
           render_markdown(make_report(classifier_results()),
                           "Full-scale reference: classifiers"),
           "## Full-scale reference averages (accuracy, precision, recall, F1)", ""]
    ref += [f"- {SCHEME_LABELS.get(s, s)}: " + ", ".join(f"{v:.2f}" for v in vals)
            for s, vals in REFERENCE_AVERAGES.items()]
    outs["reference_md"].write_text("\n".join(ref) + "\n", encoding="utf-8")
    return outs


STAGE_FUNCS: dict[str, Callable[[Workspace, str], dict[str, Path]]] = {
    "ingest": stage_ingest, "dedup": stage_dedup, "split": stage_split,
    "featurize": stage_featurize, "embed": stage_embed, "train": stage_train,
    "evaluate": stage_evaluate, "ig": stage_ig, "prune": stage_prune, "tsne": stage_tsne,
    "report": stage_report,
}


def parse_stages(text: str | None) -> tuple[str, ...]:
    if not text:
        return STAGES
    names = [s.strip() for s in text.split(",") if s.strip()]
    unknown = [s for s in names if s not in STAGES]
    if unknown:
        raise PipelineError(f"unknown stages {unknown}; choose from {','.join(STAGES)}")
    return tuple(names)


def run(cfg: RunConfig, stages=STAGES) -> ExitReport:
    """Run the requested stages in pipeline order and report what happened.

    Errors do not raise: they end the run and set ``exit_code`` (1 for a
    missing or stale prerequisite, 2 for bad input data).
    """
    ws = Workspace(cfg)
    ws.root.mkdir(parents=True, exist_ok=True)
    report = ExitReport(str(ws.root))
    wanted = set(stages)
    for stage in (s for s in STAGES if s in wanted):
        start = time.perf_counter()
        try:
            for p in PREREQUISITES[stage]:
                bad = p if ws.manifest(p) is None else ws.stale_ancestor(p)
                if bad is not None:
                    what = "must run first" if ws.manifest(bad) is None else "is out of date; rerun it"
                    raise PipelineError(f"{bad} {what}", EXIT_VALIDATION)
            key = ws.expected_key(stage)
            if ws._self_consistent(stage):
                status = "skipped"
            else:
                ws.write_manifest(stage, key, STAGE_FUNCS[stage](ws, key))
                status = "ran"
        except PipelineError as exc:
            return _fail(report, stage, start, str(exc), exc.exit_code)
        except DATA_ERRORS as exc:
            return _fail(report, stage, start, f"{type(exc).__name__}: {exc}", EXIT_DATA)
        outputs = sorted(str(p) for p in ws.outputs(stage).values())
        report.stages.append(StageOutcome(stage, status, time.perf_counter() - start, outputs))
    return report


def _fail(report: ExitReport, stage: str, start: float, message: str, code: int) -> ExitReport:
    log.error("%s: %s", stage, message)
    report.stages.append(StageOutcome(stage, "failed", time.perf_counter() - start, [], message))
    report.exit_code = code
    report.error = message
    return report
