"""Workspace configuration and loading.

A workspace is described by a ``key = value`` text file; relative paths are
resolved against the file's directory.  Precedence: explicit overrides
(CLI flags) > ``KSDW_*`` environment variables > file > defaults.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .graph import load_graph
from .indexing import build_classification_index, build_inverted_index
from .patterns import PatternRegistry, builtin_registry
from .pipeline import (DEFAULT_SNIPPET_CAP, DEFAULT_TOP_N, SearchContext)
from .store import RelationalStore, ingest_csv, load_manifest

logger = logging.getLogger(__name__)

ENV_PREFIX = "KSDW_"

REQUIRED_PATTERNS = ("table", "column", "foreign_key", "join_relationship",
                     "inheritance_child", "bridge_table", "metadata_filter")


class ConfigError(Exception):
    pass


@dataclass
class WorkspaceConfig:
    graph: Path
    manifest: Path
    csv_dir: Path
    patterns: Optional[Path] = None
    suite: Optional[Path] = None
    feedback_log: Path = Path("feedback.ndjson")
    ui_dir: Optional[Path] = None
    top_n: int = DEFAULT_TOP_N
    snippet_cap: int = DEFAULT_SNIPPET_CAP
    layer_weights: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        for name in ("graph", "manifest", "csv_dir", "patterns", "suite"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise ConfigError(f"{name} path does not exist: {path}")
        if self.top_n < 1:
            raise ConfigError("top_n must be >= 1")
        if self.snippet_cap < 0:
            raise ConfigError("snippet_cap must be >= 0")


_PATH_KEYS = ("graph", "patterns", "manifest", "csv_dir", "suite",
              "feedback_log", "ui_dir")
_INT_KEYS = ("top_n", "snippet_cap")


def _parse_weights(text: str) -> dict[str, float]:
    weights = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(f"bad layer weight entry {part!r} (want layer:weight)")
        layer, value = part.split(":", 1)
        try:
            weights[layer.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"bad layer weight {value!r}") from None
    return weights


def read_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def load_config(path: str | Path,
                overrides: Optional[dict[str, str]] = None) -> WorkspaceConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    base = path.parent
    values = read_config_file(path)
    for key in list(values):
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            values[key] = env
    for key, value in os.environ.items():
        if key.startswith(ENV_PREFIX):
            values.setdefault(key[len(ENV_PREFIX):].lower(), value)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    kwargs = {}
    for key, value in values.items():
        if key in _PATH_KEYS:
            kwargs[key] = (base / value).resolve() if not Path(value).is_absolute() \
                else Path(value)
        elif key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from None
        elif key == "layer_weights":
            kwargs[key] = _parse_weights(value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    for required in ("graph", "manifest", "csv_dir"):
        if required not in kwargs:
            raise ConfigError(f"config is missing the {required!r} key")
    config = WorkspaceConfig(**kwargs)
    config.validate()
    return config


@dataclass
class Workspace:
    config: WorkspaceConfig
    context: SearchContext
    row_counts: dict[str, int]


def load_workspace(config: WorkspaceConfig) -> Workspace:
    """Load graph, patterns and base data; build both indexes."""
    graph = load_graph(config.graph)
    if config.patterns:
        registry = PatternRegistry()
        registry.register_file(config.patterns)
    else:
        registry = builtin_registry()
    missing = [name for name in REQUIRED_PATTERNS if name not in registry]
    if missing:
        raise ConfigError(f"pattern file lacks required patterns: {missing}")
    store = RelationalStore()
    row_counts = ingest_csv(store, load_manifest(config.manifest), config.csv_dir)
    classification = build_classification_index(graph)
    inverted = build_inverted_index(store)
    context = SearchContext(graph, registry, store, classification, inverted,
                            layer_weights=config.layer_weights,
                            top_n=config.top_n, snippet_cap=config.snippet_cap)
    return Workspace(config, context, row_counts)
