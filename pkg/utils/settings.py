"""Numeric settings shared by every module."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
import json
from pathlib import Path
from typing import Any, Dict

from utils.errors import ConfigError


@dataclass(frozen=True)
class NumericSettings:
    trace_preservation_tol: float = 1e-10
    hermitian_tol: float = 1e-10
    psd_clamp: float = 1e-10
    jacobi_rel_tol: float = 1e-13
    jacobi_max_sweeps: int = 100
    eps_prob: float = 1e-12
    p_floor: float = 1e-12
    degeneracy_tol: float = 1e-9
    match_ambiguity_tol: float = 1e-6
    quasi_classical_tol: float = 1e-8
    optimality_tol: float = 1e-8
    completeness_tol: float = 1e-10
    fd_rel_step: float = 1e-6
    frame_rel_step: float = 1e-4
    poisson_tail: float = 1e-12
    domain_inset: float = 1e-6
    mle_grid_points: int = 200
    mle_xtol: float = 1e-9
    mle_open_span: float = 20.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **values: Any) -> "NumericSettings":
        known = {item.name for item in fields(self)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown numeric settings: {', '.join(unknown)}")
        return replace(self, **values)

    @classmethod
    def from_file(cls, path: Path) -> "NumericSettings":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read numeric settings from {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError(f"numeric settings in {path} must be a JSON object")
        return DEFAULT_SETTINGS.with_overrides(**payload)


DEFAULT_SETTINGS = NumericSettings()
