"""Experiment configuration: a plain key=value text file.

There are no environment-variable overrides except the output directory
(``PARAQA_OUT``), so the resolved-config snapshot written next to every
run's artifacts is a complete provenance record: re-running a snapshot
reproduces the outputs bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

HIDDEN_DIM_CHOICES = (50, 100, 200)
EMBED_DIM_CHOICES = (100, 200)
DROPOUT_CHOICES = (0.2, 0.3, 0.4)
TASKS = ("kb", "sentsel")
MODES = ("para4qa", "avgpara", "seppara", "dataaugment", "base")

_PATH_KEYS = ("lexical_rules", "template_rules", "pivot_fwd", "pivot_back",
              "kb_triples", "kb_aliases", "embedding_file", "pairs_file")


@dataclass
class ExperimentConfig:
    task: str = "kb"
    mode: str = "para4qa"
    seed: int = 13
    hidden_dim: int = 100
    embed_dim: int = 100
    dropout: float = 0.2
    lr: float = 0.01
    decay: float = 0.95
    clip_norm: float = 5.0
    batch_size: int = 150
    max_epochs: int = 50
    patience: int = 5
    use_counts: bool = False
    lexical_cap: int = 10
    template_cap: int = 10
    pivot_top: int = 15
    pivot_k: int = 3
    pivot_beam: int = 8
    pivot_maxlen: int = 20
    lexical_rules: str | None = None
    template_rules: str | None = None
    pivot_fwd: str | None = None
    pivot_back: str | None = None
    kb_triples: str | None = None
    kb_aliases: str | None = None
    embedding_file: str | None = None
    pairs_file: str | None = None
    out_dir: str = "runs"

    def validate(self):
        if self.task not in TASKS:
            raise ConfigError(f"task: must be one of {TASKS}, got {self.task!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {MODES}, got {self.mode!r}")
        if self.hidden_dim not in HIDDEN_DIM_CHOICES:
            raise ConfigError(
                f"hidden_dim: must be one of {HIDDEN_DIM_CHOICES}, got {self.hidden_dim}")
        if self.embed_dim not in EMBED_DIM_CHOICES:
            raise ConfigError(
                f"embed_dim: must be one of {EMBED_DIM_CHOICES}, got {self.embed_dim}")
        if self.dropout not in DROPOUT_CHOICES:
            raise ConfigError(
                f"dropout: must be one of {DROPOUT_CHOICES}, got {self.dropout}")
        for name in ("lr", "decay", "clip_norm"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be positive")
        for name in ("batch_size", "max_epochs", "lexical_cap", "template_cap",
                     "pivot_top", "pivot_k", "pivot_beam", "pivot_maxlen"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")
        if self.patience < 0:
            raise ConfigError("patience: must be >= 0")
        if self.task == "kb" and (self.kb_triples is None or self.kb_aliases is None):
            raise ConfigError("kb_triples/kb_aliases: required for the kb task")
        if self.mode == "seppara" and self.pairs_file is None:
            raise ConfigError("pairs_file: required for seppara mode")
        if (self.pivot_fwd is None) != (self.pivot_back is None):
            raise ConfigError("pivot_fwd/pivot_back: both or neither")
        for name in _PATH_KEYS:
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{name}: path does not exist: {value}")

    @property
    def resolved_out_dir(self) -> str:
        return os.environ.get("PARAQA_OUT", self.out_dir)

    def snapshot(self) -> str:
        """All keys, including defaults, one per line."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, bool):
                value = int(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_BOOL_KEYS = {"use_counts"}
_INT_KEYS = {"seed", "hidden_dim", "embed_dim", "batch_size", "max_epochs",
             "patience", "lexical_cap", "template_cap", "pivot_top",
             "pivot_k", "pivot_beam", "pivot_maxlen"}
_FLOAT_KEYS = {"dropout", "lr", "decay", "clip_norm"}


def load_config(path) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                if key in _BOOL_KEYS:
                    values[key] = raw.lower() in ("1", "true", "yes")
                elif key in _INT_KEYS:
                    values[key] = int(raw)
                elif key in _FLOAT_KEYS:
                    values[key] = float(raw)
                else:
                    values[key] = raw
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: {key}: {e}") from e
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg
