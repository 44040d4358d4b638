"""Residuals of the measurement optimality condition.

For each outcome the condition reads E^1/2 K_k' rho0^1/2 = lambda E^1/2 K_k rho0^1/2
for every k with one real lambda per outcome. The k-index is stacked and
lambda fitted by least squares, so an approximately optimal POVM still gets
a well-defined, scale-free residual.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Tuple

import numpy as np

from canonical.frames import CanonicalFrame
from channels.states import QuantumState
from fisher.povm import Povm
from linalg.core import psd_sqrt
from utils.errors import DimensionError, ValidationError
from utils.settings import DEFAULT_SETTINGS, NumericSettings


@dataclass(frozen=True)
class OptimalityReport:
    lambdas: Tuple[float, ...]
    residuals: Tuple[float, ...]
    max_residual: float
    satisfied: bool
    labels: Tuple[str, ...] = ()
    theta: float = math.nan

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "labels": list(self.labels),
            "lambdas": list(self.lambdas),
            "residuals": list(self.residuals),
            "max_residual": self.max_residual,
            "satisfied": self.satisfied,
        }


def optimality_check(
    povm: Povm,
    frame: CanonicalFrame,
    rho0: QuantumState,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> OptimalityReport:
    if not rho0.is_pure:
        raise ValidationError("optimality check needs a pure input state")
    if povm.dim != rho0.dim or frame.kraus_ops.shape[1] != rho0.dim:
        raise DimensionError("POVM, frame and input state dimensions differ")
    root_rho = psd_sqrt(rho0.density, settings=settings)
    moved = np.einsum("kij,jl->kil", frame.kraus_ops, root_rho)
    moved_derivs = np.einsum("kij,jl->kil", frame.kraus_derivs, root_rho)
    floor = settings.eps_prob
    lambdas = []
    residuals = []
    for effect in povm.effects:
        root_effect = psd_sqrt(effect, settings=settings)
        b = np.einsum("ij,kjl->kil", root_effect, moved)
        a = np.einsum("ij,kjl->kil", root_effect, moved_derivs)
        norm_b = float(np.linalg.norm(b))
        norm_a = float(np.linalg.norm(a))
        if norm_b < floor:
            lambdas.append(0.0)
            residuals.append(math.inf if norm_a >= math.sqrt(floor) else 0.0)
            continue
        fitted = float(np.vdot(b, a).real / norm_b ** 2)
        lambdas.append(fitted)
        residuals.append(float(np.linalg.norm(a - fitted * b)) / max(norm_b, floor))
    worst = max(residuals) if residuals else 0.0
    return OptimalityReport(
        lambdas=tuple(lambdas),
        residuals=tuple(residuals),
        max_residual=worst,
        satisfied=worst <= settings.optimality_tol,
        labels=povm.labels,
        theta=frame.theta,
    )
