"""Pipeline configuration loaded from YAML or JSON."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from ..codebook import CodebookConfig
from ..exceptions import ConfigError
from .openface import ColumnConfig


@dataclass
class PipelineConfig:
    codebook: CodebookConfig = field(default_factory=CodebookConfig)
    columns: ColumnConfig = field(default_factory=ColumnConfig)
    au_window_s: float = 2.0
    au_step_s: float = 1.0
    chunk_s: float | None = None
    hmm: dict = field(default_factory=lambda: {"n_states": 4, "max_iter": 100, "emission_smoothing": 1e-3})
    lstm: dict = field(default_factory=lambda: {
        "hidden": 32, "dropout": 0.2, "learning_rate": 0.01, "epochs": 100, "batch_size": 32, "patience": 10,
    })
    pca_variance: float = 0.90
    folds: int = 10
    repeats: int = 5
    val_fraction: float = 0.10

    def to_dict(self):
        return asdict(self)


def _build(cls, data, where):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {where} keys: {', '.join(sorted(unknown))}")
    return cls(**data)


def load_config(path=None):
    """Read a config file; missing sections keep their defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    data = dict(data)
    cb = _build(CodebookConfig, data.pop("codebook", {}) or {}, "codebook")
    cols = _build(ColumnConfig, data.pop("columns", {}) or {}, "columns")
    base = PipelineConfig()
    for key in ("hmm", "lstm"):
        if key in data:
            data[key] = {**getattr(base, key), **(data[key] or {})}
    cfg = _build(PipelineConfig, data, "top-level")
    cfg.codebook, cfg.columns = cb, cols
    return cfg
