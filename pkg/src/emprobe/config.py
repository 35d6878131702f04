"""Experiment configuration: one JSON file plus dotted ``key=value`` overrides."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .corpus.dedup import DedupConfig
from .embeddings import CODE2VEC_DIM
from .features.encoding import SCHEMES
from .projection import ProjectionError, TsneConfig
from .svm import DEFAULT_C_VALUES, DEFAULT_GAMMA_VALUES, LINEAR, RBF, GridSpec

WORKDIR_ENV = "EMPROBE_WORKDIR"
CODE2VEC = "code2vec"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    C_values: tuple[float, ...] = DEFAULT_C_VALUES
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA_VALUES
    kernel: str = RBF
    kkt_tolerance: float = 1e-3
    max_passes: int = 100

    def spec(self) -> GridSpec:
        return GridSpec(tuple(self.C_values), tuple(self.gamma_values))


@dataclass(frozen=True)
class TsneSettings:
    params: TsneConfig = TsneConfig()
    max_points: int = 500  # per projection, sampled with the run seed
    split: str = "test"


@dataclass(frozen=True)
class RunConfig:
    corpus_path: str
    targets: tuple[str, ...]
    workdir: str = "work"
    n_train: int = 1000
    seed: int = 0
    allow_small: bool = False
    dedup: DedupConfig = DedupConfig()
    schemes: tuple[str, ...] = SCHEMES
    sequences: bool = True
    embedding_path: str | None = None
    embedding_dim: int = CODE2VEC_DIM
    grid: GridConfig = GridConfig()
    prune_fractions: tuple[float, ...] = (0.25,)
    tsne: TsneSettings = TsneSettings()
    base_dir: str = "."  # relative paths resolve against this

    @property
    def all_schemes(self) -> tuple[str, ...]:
        """Classifier schemes, with code2vec appended when embeddings are configured."""
        return self.schemes + ((CODE2VEC,) if self.embedding_path else ())

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def workdir_path(self) -> Path:
        return self.resolve(os.environ.get(WORKDIR_ENV) or self.workdir)

    def to_dict(self) -> dict:
        """Plain-JSON view, without the machine-specific base directory."""
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def validate(self) -> None:
        if not self.targets:
            raise ConfigError("targets must be non-empty")
        if len(set(self.targets)) != len(self.targets):
            raise ConfigError("targets must be distinct")
        if self.n_train < 1:
            raise ConfigError("n_train must be at least 1")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(f"unknown schemes {unknown}; choose from {list(SCHEMES)}")
        if self.grid.kernel not in (LINEAR, RBF):
            raise ConfigError(f"unknown kernel {self.grid.kernel!r}")
        if not self.grid.C_values or any(c <= 0 for c in self.grid.C_values):
            raise ConfigError("grid.C_values must be non-empty and positive")
        if self.grid.kernel == RBF and (not self.grid.gamma_values
                                        or any(g <= 0 for g in self.grid.gamma_values)):
            raise ConfigError("grid.gamma_values must be non-empty and positive")
        for f in self.prune_fractions:
            if not 0 < f <= 1:
                raise ConfigError(f"prune fraction {f} outside (0, 1]")
        if self.tsne.max_points < 3:
            raise ConfigError("tsne.max_points must be at least 3")
        if not self.all_schemes:
            raise ConfigError("no schemes to train")

    def check_paths(self) -> None:
        if not self.resolve(self.corpus_path).is_file():
            raise ConfigError(f"corpus not found: {self.resolve(self.corpus_path)}")
        if self.embedding_path and not self.resolve(self.embedding_path).is_file():
            raise ConfigError(f"embeddings not found: {self.resolve(self.embedding_path)}")


def _set_dotted(obj: dict, key: str, value: Any) -> None:
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = obj.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"cannot set {key!r}: {part!r} is not a section")
        obj = nxt
    obj[parts[-1]] = value


def parse_override(text: str) -> tuple[str, Any]:
    """``a.b=3`` gives ``("a.b", 3)``; values parse as JSON, falling back to strings."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {unknown}")
    try:
        return cls(**data)
    except (TypeError, ValueError, ProjectionError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def config_from_dict(data: dict, base_dir=".") -> RunConfig:
    data = json.loads(json.dumps(data))  # deep copy through JSON
    for key in ("corpus_path", "targets"):
        if key not in data:
            raise ConfigError(f"config is missing {key!r}")
    if isinstance(data["targets"], str):
        data["targets"] = [data["targets"]]
    data["targets"] = tuple(data["targets"])
    if "schemes" in data:
        data["schemes"] = tuple(data["schemes"])
    if "prune_fractions" in data:
        data["prune_fractions"] = tuple(float(f) for f in data["prune_fractions"])
    if "dedup" in data:
        data["dedup"] = _build(DedupConfig, data["dedup"], "dedup")
    if "grid" in data:
        grid = dict(data["grid"])
        for k in ("C_values", "gamma_values"):
            if k in grid:
                grid[k] = tuple(float(v) for v in grid[k])
        data["grid"] = _build(GridConfig, grid, "grid")
    if "tsne" in data:
        tsne = dict(data["tsne"])
        extra = {k: tsne.pop(k) for k in ("max_points", "split") if k in tsne}
        data["tsne"] = TsneSettings(_build(TsneConfig, tsne, "tsne"), **extra)
    data["base_dir"] = str(base_dir)
    cfg = _build(RunConfig, data, "config")
    cfg.validate()
    return cfg


def _flatten_tsne(d: dict) -> dict:
    t = d.get("tsne")
    if isinstance(t, dict) and "params" in t:
        d["tsne"] = {**t["params"], "max_points": t["max_points"], "split": t["split"]}
    return d


def config_to_dict(cfg: RunConfig) -> dict:
    """Inverse of :func:`config_from_dict` (tsne parameters flattened)."""
    return _flatten_tsne(cfg.to_dict())


def load_config(path, overrides=()) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    for text in overrides:
        key, value = parse_override(text)
        _set_dotted(data, key, value)
    return config_from_dict(data, base_dir=path.parent.resolve())
