"""Declarative run configuration loaded from TOML or JSON.

Every field has a default, so an empty file is a valid config. Unknown keys
are rejected so that typos fail loudly instead of silently using a default.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .corpus import PeriodSpec, TokenFilter
from .errors import ConfigError
from .evaluation.perturbation import DEFAULT_ALPHAS
from .methods import Dw2vConfig, MethodSettings, SvdConfig
from .sgns import TrainConfig


@dataclass(frozen=True)
class IngestConfig:
    inputs: tuple = ()
    format: str = "auto"
    year_start: int = 1990
    year_end: int = 2000
    period_length: int = 1
    lowercase: bool = True
    strip_pos_tags: bool = True
    alpha_only: bool = True
    on_error: str = "skip"

    def period_spec(self) -> PeriodSpec:
        return PeriodSpec(self.year_start, self.year_end, self.period_length)

    def token_filter(self) -> TokenFilter:
        return TokenFilter(self.lowercase, self.strip_pos_tags, self.alpha_only)


@dataclass(frozen=True)
class VocabConfig:
    min_count: int = 5
    max_vocab: Optional[int] = None


@dataclass(frozen=True)
class CoocConfig:
    window: int = 2
    tagged_contexts: bool = False


@dataclass(frozen=True)
class EvalConfig:
    probe_words: tuple = ()
    t: str = ""
    alphas: tuple = DEFAULT_ALPHAS
    methods: tuple = ("tsgns", "tsvd", "ppmi")
    top_k: int = 10
    policy: str = "last"
    ks: tuple = (10, 50)


@dataclass(frozen=True)
class RunConfig:
    ingest: IngestConfig = field(default_factory=IngestConfig)
    vocab: VocabConfig = field(default_factory=VocabConfig)
    cooc: CoocConfig = field(default_factory=CoocConfig)
    svd: SvdConfig = field(default_factory=SvdConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    dw2v: Dw2vConfig = field(default_factory=Dw2vConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return _listify(asdict(self))

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def method_settings(self) -> MethodSettings:
        return MethodSettings(self.cooc.window, self.cooc.tagged_contexts, self.svd, self.train, self.dw2v)

    def with_overrides(self, seed: Optional[int] = None, workers: Optional[int] = None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, svd=replace(cfg.svd, seed=seed), train=replace(cfg.train, seed=seed),
                          dw2v=replace(cfg.dw2v, seed=seed))
        if workers is not None:
            cfg = replace(cfg, train=replace(cfg.train, workers=workers))
        return cfg


def _listify(obj):
    if isinstance(obj, dict):
        return {k: _listify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_listify(v) for v in obj]
    return obj


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"[{where}] must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    kwargs = {}
    defaults = cls()
    for name, value in data.items():
        default = getattr(defaults, name)
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{where}.{name}" if where else name)
        elif isinstance(default, tuple) and isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in [{where or 'root'}]: {exc}") from None


def config_from_dict(data: dict) -> RunConfig:
    return _build(RunConfig, data, "")


def load_config(path=None) -> RunConfig:
    """Read a ``.toml`` or ``.json`` config; ``None`` gives all defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    """JSON rendering of the effective config (``None`` values included)."""
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
