"""Run configuration: a flat ``key = value`` file plus command-line overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields
import math
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional

from utils.errors import ConfigError

COMMANDS = ("bound", "distance-curve", "optimality-check", "simulate", "channels")
EXTENSIONS = ("none", "identity", "square")
FORMATS = ("csv", "json")
_JSON_ONLY = ("optimality-check", "simulate")
_UINT64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class RunConfig:
    command: str
    channel: str = "depolarizing"
    extension: str = "none"
    n_max: Optional[int] = None
    theta_max: Optional[float] = None
    dim: Optional[int] = None
    input: Optional[str] = None
    povm: Optional[str] = None
    theta_start: Optional[float] = None
    theta_stop: Optional[float] = None
    points: int = 19
    theta: Optional[float] = None
    shots: int = 10000
    trials: int = 100
    seed: int = 0
    workers: Optional[int] = None
    out: Optional[Path] = None
    format: Optional[str] = None
    estimates_out: Optional[Path] = None
    settings: Optional[Path] = None

    @property
    def output_format(self) -> str:
        if self.format is not None:
            return self.format
        return "json" if self.command in _JSON_ONLY else "csv"

    def channel_params(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {}
        for key in ("n_max", "theta_max", "dim"):
            value = getattr(self, key)
            if value is not None:
                params[key] = value
        return params


def _integer(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {text!r}") from exc


def _real(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {text!r}")
    return value


def _text(key: str, text: str) -> str:
    if not text:
        raise ConfigError(f"{key} must not be empty")
    return text


def _path(key: str, text: str) -> Path:
    return Path(_text(key, text))


_CONVERTERS: Dict[str, Callable[[str, str], Any]] = {
    "command": _text,
    "channel": _text,
    "extension": _text,
    "n_max": _integer,
    "theta_max": _real,
    "dim": _integer,
    "input": _text,
    "povm": _text,
    "theta_start": _real,
    "theta_stop": _real,
    "points": _integer,
    "theta": _real,
    "shots": _integer,
    "trials": _integer,
    "seed": _integer,
    "workers": _integer,
    "out": _path,
    "format": _text,
    "estimates_out": _path,
    "settings": _path,
}

RUN_KEYS = tuple(f.name for f in fields(RunConfig))


def parse_run_file(path: Path) -> Dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read run config {path}: {exc}") from exc
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{number}: expected key = value, got {raw.strip()!r}")
        key = key.strip().replace("-", "_")
        if key in values:
            raise ConfigError(f"{path}:{number}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def build_run_config(values: Mapping[str, str]) -> RunConfig:
    unknown = sorted(set(values) - set(RUN_KEYS))
    if unknown:
        raise ConfigError(f"unknown run config keys: {', '.join(unknown)}")
    if "command" not in values:
        raise ConfigError("run config needs a command")
    typed = {key: _CONVERTERS[key](key, str(text).strip()) for key, text in values.items()}
    config = RunConfig(**typed)
    _validate(config)
    return config


def merge(file_values: Mapping[str, str], overrides: Mapping[str, Optional[str]]) -> Dict[str, str]:
    merged = dict(file_values)
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return merged


def _validate(config: RunConfig) -> None:
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}; choose from {', '.join(COMMANDS)}")
    if config.extension not in EXTENSIONS:
        raise ConfigError(f"extension must be one of {', '.join(EXTENSIONS)}")
    if config.format is not None and config.format not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
    if config.command in _JSON_ONLY and config.output_format != "json":
        raise ConfigError(f"{config.command} writes JSON reports only")
    if config.command == "distance-curve" and config.points < 3:
        raise ConfigError("distance-curve needs at least 3 grid points")
    if config.points < 1:
        raise ConfigError("points must be positive")
    if config.theta_start is not None and config.theta_stop is not None and config.points > 1:
        if not config.theta_start < config.theta_stop:
            raise ConfigError("theta_start must be below theta_stop")
    if config.shots < 1:
        raise ConfigError("shots must be positive")
    if config.trials < 2:
        raise ConfigError("trials must be at least 2")
    if not 0 <= config.seed <= _UINT64_MAX:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if config.workers is not None and config.workers < 1:
        raise ConfigError("workers must be positive")
