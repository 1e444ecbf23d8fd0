"""Run configuration: a flat TOML file plus per-key command-line overrides."""
from __future__ import annotations

import dataclasses
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ensemble import DEFAULT_VIEWS, ViewSpec
from .exceptions import ConfigError
from .tfidf import MODES

CONFIG_ENV = "POLARITY_CONFIG"


@dataclass
class RunConfig:
    train: list = field(default_factory=list)
    test: Optional[str] = None
    embeddings: Optional[str] = None
    embeddings_format: str = "auto"
    vocab_limit: Optional[int] = None
    stopwords: Optional[str] = None
    model: str = "model.bundle"
    tfidf_mode: str = "smoothed"
    min_df: int = 1
    l2_normalize: bool = True
    drop_urls: bool = False
    oov_seed: int = 0
    oov_half_width: float = 0.25
    views: list = field(default_factory=lambda: list(DEFAULT_VIEWS))
    weights: Optional[list] = None
    C: float = 1.0
    max_epochs: int = 200
    tol: float = 1e-6
    eta0: float = 0.1
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.tfidf_mode not in MODES:
            raise ConfigError(f"tfidf_mode must be one of {MODES}, got {self.tfidf_mode!r}")
        if self.embeddings_format not in ("auto", "binary", "text"):
            raise ConfigError(f"embeddings_format must be auto, binary or text, got {self.embeddings_format!r}")
        if self.min_df < 1:
            raise ConfigError("min_df must be >= 1")
        if self.vocab_limit is not None and self.vocab_limit < 0:
            raise ConfigError("vocab_limit must be >= 0")
        if not self.oov_half_width > 0:
            raise ConfigError("oov_half_width must be > 0")
        if not (self.C > 0 and self.tol >= 0 and self.eta0 > 0 and self.max_epochs >= 1):
            raise ConfigError("C, eta0 and max_epochs must be positive and tol non-negative")
        try:
            specs = [ViewSpec.parse(v) for v in self.views]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not specs:
            raise ConfigError("views must name at least one view")
        if self.weights is not None:
            if len(self.weights) != len(specs):
                raise ConfigError(f"{len(specs)} views but {len(self.weights)} weights")
            if any(w < 0 for w in self.weights) or not any(w > 0 for w in self.weights):
                raise ConfigError("weights must be non-negative and not all zero")
        return self

    @property
    def needs_embeddings(self) -> bool:
        return any(ViewSpec.parse(v).needs_embeddings for v in self.views)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_LIST_ITEM = {"train": str, "views": str, "weights": float}


def _scalar_type(name):
    default = RunConfig()
    sample = getattr(default, name)
    hints = {
        "test": str, "embeddings": str, "vocab_limit": int, "stopwords": str, "weights": list,
    }
    return hints.get(name, type(sample))


def coerce(name: str, value):
    """Convert a TOML value or command-line string to the field's type."""
    if name not in _FIELDS:
        raise ConfigError(f"unknown configuration key {name!r}")
    kind = _scalar_type(name)
    if isinstance(value, str) and value.strip().lower() in ("none", "null", "") and _FIELDS[name].default is None:
        return None
    try:
        if kind is list:
            if isinstance(value, str):
                value = [v for v in (p.strip() for p in value.split(",")) if v]
            if not isinstance(value, list):
                raise TypeError("expected a list")
            item = _LIST_ITEM[name]
            return [item(v) for v in value]
        if kind is bool:
            if isinstance(value, bool):
                return value
            lowered = str(value).strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(f"not an integer: {value!r}")
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise ValueError(f"not a number: {value!r}")
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {name}: {exc}") from None


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Read ``path`` (or ``$POLARITY_CONFIG``) and apply ``overrides``.

    Relative paths inside the file are resolved against the file's directory.
    """
    values: dict = {}
    path = path or os.environ.get(CONFIG_ENV)
    base = None
    if path:
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = path.parent
        for key, value in raw.items():
            if isinstance(value, dict):
                raise ConfigError(f"{path}: tables are not supported (key {key!r})")
            values[key] = coerce(key, value)
        for key in ("train", "test", "embeddings", "stopwords", "model"):
            if key in values and values[key] is not None:
                values[key] = _resolve(values[key], base)
    for key, value in (overrides or {}).items():
        values[key] = coerce(key, value)
    return RunConfig(**values).validate()


def _resolve(value, base: Path):
    if isinstance(value, list):
        return [_resolve(v, base) for v in value]
    p = Path(value).expanduser()
    return str(p if p.is_absolute() else base / p)
