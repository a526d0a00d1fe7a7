"""Run configuration: every threshold in one place, plus the flat
key = value config file that overrides the defaults."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .ingest import DEFAULT_EXTENSIONS


class ConfigError(Exception):
    """A config file or value is invalid; message names the offending key."""


@dataclass(frozen=True)
class Config:
    extensions: tuple[str, ...] = tuple(sorted(DEFAULT_EXTENSIONS))
    keyword_file: str | None = None
    extend_keywords: bool = False
    post_days: int = 182
    period_days: int = 14
    decay_rate: float = math.log(2)
    min_files: int = 3
    min_observations: int = 4
    alpha: float = 0.01
    support_threshold: float = 0.40
    trend_threshold: float = 0.40
    bootstrap_iterations: int = 512
    a12_threshold: float = 0.56
    seed: int = 0
    replication_mode: bool = False

    def validate(self) -> None:
        if not self.extensions:
            raise ConfigError("extensions: must not be empty")
        if self.post_days < 1:
            raise ConfigError("post_days: must be >= 1")
        if self.period_days < 1:
            raise ConfigError("period_days: must be >= 1")
        if not self.decay_rate > 0:
            raise ConfigError("decay_rate: must be positive")
        if self.min_files < 1:
            raise ConfigError("min_files: must be >= 1")
        if self.min_observations < 2:
            raise ConfigError("min_observations: must be >= 2")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha: must lie in (0, 1)")
        if not self.support_threshold > 0:
            raise ConfigError("support_threshold: must be positive")
        if not self.trend_threshold > 0:
            raise ConfigError("trend_threshold: must be positive")
        if self.bootstrap_iterations < 100:
            raise ConfigError("bootstrap_iterations: must be >= 100")
        if not 0 < self.a12_threshold <= 1:
            raise ConfigError("a12_threshold: must lie in (0, 1]")


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def _parse_extensions(key: str, raw: str) -> tuple[str, ...]:
    parts = tuple(
        p.strip().lower().lstrip(".") for p in raw.split(",") if p.strip()
    )
    if not parts:
        raise ConfigError(f"{key}: expected a comma-separated extension list")
    return parts


_PARSERS = {
    "extensions": _parse_extensions,
    "keyword_file": lambda key, raw: raw,
    "extend_keywords": _parse_bool,
    "post_days": _parse_int,
    "period_days": _parse_int,
    "decay_rate": _parse_float,
    "min_files": _parse_int,
    "min_observations": _parse_int,
    "alpha": _parse_float,
    "support_threshold": _parse_float,
    "trend_threshold": _parse_float,
    "bootstrap_iterations": _parse_int,
    "a12_threshold": _parse_float,
    "seed": _parse_int,
    "replication_mode": _parse_bool,
}

assert set(_PARSERS) == {f.name for f in fields(Config)}


def load_config(path: str | Path, base: Config | None = None) -> Config:
    """Parse a flat key = value file over the defaults (or a given base).

    Blank lines and '#' comments are skipped; unknown keys and malformed
    values raise ConfigError naming the key; the result is validated.
    """
    cfg = base if base is not None else Config()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    overrides: dict[str, object] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
        overrides[key] = parser(key, raw_value)
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg
