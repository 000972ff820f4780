# src/utils/config.py
"""Run settings: defaults < config file < KERNELGUARD_* environment < flags."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from dotenv import dotenv_values

from .errors import ConfigError

ENV_PREFIX = "KERNELGUARD_"
CONFIG_KEYS = ("kernel", "lambda", "mu", "k", "candidates", "min_lines", "types", "project", "threads", "normalize")
KERNEL_CHOICES = ("stk", "sstk", "ptk")
CLONE_TYPE_CHOICES = ("T1", "T2", "VST3", "ST3", "MT3", "WT3T4")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}

# config key -> RunConfig attribute
_ATTR = {"lambda": "lam", "candidates": "candidate_limit", "types": "clone_types"}


@dataclass(frozen=True)
class RunConfig:
    kernel: str = "ptk"
    lam: float = 0.4
    mu: float = 0.4
    k: int = 1
    candidate_limit: int = 100
    min_lines: int = 6
    clone_types: tuple[str, ...] = ("T1", "T2", "VST3", "ST3")
    project: Optional[str] = None
    threads: int = 0
    normalize: bool = True

    def validate(self) -> "RunConfig":
        if self.kernel not in KERNEL_CHOICES:
            raise ConfigError(f"kernel must be one of {', '.join(KERNEL_CHOICES)}, got {self.kernel!r}")
        for name, v in (("lambda", self.lam), ("mu", self.mu)):
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must be in (0, 1], got {v}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.candidate_limit < 1:
            raise ConfigError(f"candidates must be >= 1, got {self.candidate_limit}")
        if self.k > self.candidate_limit:
            raise ConfigError(f"k ({self.k}) exceeds candidates ({self.candidate_limit})")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")
        if self.min_lines < 1:
            raise ConfigError(f"min-lines must be >= 1, got {self.min_lines}")
        unknown = [t for t in self.clone_types if t not in CLONE_TYPE_CHOICES]
        if unknown or not self.clone_types:
            raise ConfigError(f"unknown clone types {unknown} (choose from {', '.join(CLONE_TYPE_CHOICES)})")
        return self

    def resolved_threads(self) -> int:
        return self.threads or (os.cpu_count() or 1)


def _coerce(key: str, raw: Any) -> Any:
    if raw is None:
        return None
    try:
        if key in ("lambda", "mu"):
            return float(raw)
        if key in ("k", "candidates", "min_lines", "threads"):
            return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} expects a number, got {raw!r}") from None
    if key == "normalize":
        if isinstance(raw, bool):
            return raw
        v = str(raw).strip().lower()
        if v in _TRUE:
            return True
        if v in _FALSE:
            return False
        raise ConfigError(f"normalize expects true/false, got {raw!r}")
    if key == "types":
        if isinstance(raw, (list, tuple)):
            return tuple(str(t).strip().upper() for t in raw)
        return tuple(t.strip().upper() for t in str(raw).split(",") if t.strip())
    if key == "kernel":
        return str(raw).strip().lower()
    return str(raw).strip() or None


def _from_mapping(values: Mapping[str, Any], source: str, prefix: str = "") -> dict[str, Any]:
    out = {}
    for name, raw in values.items():
        key = name.strip().lower().replace("-", "_")
        if prefix:
            if not name.upper().startswith(prefix):
                continue
            key = key[len(prefix):]
        if key not in CONFIG_KEYS:
            if not prefix:
                raise ConfigError(f"unknown key {name!r} in {source}")
            continue
        out[key] = _coerce(key, raw)
    return out


def read_config_file(path: Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return _from_mapping(dotenv_values(path), str(path))


def from_env(environ: Optional[Mapping[str, str]] = None) -> dict[str, Any]:
    return _from_mapping(os.environ if environ is None else environ, "environment", ENV_PREFIX)


def load_run_config(
    flags: Optional[Mapping[str, Any]] = None,
    config_path: Optional[Path] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Flags set to None fall through to the environment, then the file, then the defaults."""
    layered: dict[str, Any] = {}
    if config_path is not None:
        layered.update(read_config_file(config_path))
    layered.update(from_env(environ))
    layered.update({k: _coerce(k, v) for k, v in (flags or {}).items() if k in CONFIG_KEYS and v is not None})
    known = {f.name for f in fields(RunConfig)}
    updates = {_ATTR.get(k, k): v for k, v in layered.items() if _ATTR.get(k, k) in known}
    return replace(RunConfig(), **updates).validate()
