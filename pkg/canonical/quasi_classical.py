"""Quasi-classical detection and the eigenprojector POVM it licenses."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from canonical.frames import CanonicalFrame, smooth_frame_curve
from channels.family import ParamKrausFamily, output_state
from channels.states import QuantumState
from fisher.povm import Povm
from linalg.core import commutator_norm, frobenius, identity
from utils.log import get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

logger = get_logger("canonical", "quasi_classical")


@dataclass(frozen=True)
class QuasiClassicalReport:
    is_quasi_classical: bool
    max_commutator: float
    max_offdiag_overlap: float
    max_imag_mu: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "is_quasi_classical": self.is_quasi_classical,
            "max_commutator": self.max_commutator,
            "max_offdiag_overlap": self.max_offdiag_overlap,
            "max_imag_mu": self.max_imag_mu,
            "degenerate": self.degenerate,
        }


def quasi_classical_check(
    family: ParamKrausFamily,
    thetas: Sequence[float],
    psi0: QuantumState,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> QuasiClassicalReport:
    frames = smooth_frame_curve(family, thetas, psi0, settings=settings)
    outputs = [output_state(family, frame.theta, psi0) for frame in frames]
    max_commutator = max(commutator_norm(a, b) for a, b in combinations(outputs, 2))
    max_offdiag = 0.0
    max_imag = 0.0
    for frame in frames:
        overlaps = frame.derivative_overlaps()
        off = overlaps - np.diag(np.diag(overlaps))
        max_offdiag = max(max_offdiag, float(np.max(np.abs(off))) if off.size else 0.0)
        max_imag = max(max_imag, float(np.max(np.abs(np.diag(overlaps).imag))))
    tol = settings.quasi_classical_tol
    report = QuasiClassicalReport(
        is_quasi_classical=max_commutator <= tol and max_offdiag <= tol and max_imag <= tol,
        max_commutator=max_commutator,
        max_offdiag_overlap=max_offdiag,
        max_imag_mu=max_imag,
        degenerate=any(frame.is_degenerate for frame in frames),
    )
    if not report.is_quasi_classical and report.degenerate:
        logger.warning("%s: quasi-classical check failed on a grid with degenerate canonical blocks", family.label)
    return report


def quasiclassical_optimal_povm(
    frame: CanonicalFrame,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> Povm:
    """Projectors onto the supported |f_k>, plus the complement if it is non-zero."""
    effects = []
    labels = []
    for k in np.flatnonzero(frame.support):
        f = frame.normalized_vectors[k]
        effects.append(np.outer(f, f.conj()))
        labels.append(f"f{k}")
    dim = frame.input_state.dim
    complement = identity(dim) - sum(effects, np.zeros((dim, dim), dtype=np.complex128))
    if frobenius(complement) > settings.completeness_tol:
        effects.append(0.5 * (complement + complement.conj().T))
        labels.append("complement")
    warnings = tuple(
        f"degenerate canonical probabilities {list(block)} at theta={frame.theta!r}; "
        "eigenprojectors inside the block are not unique"
        for block in frame.degenerate_blocks
    )
    for message in warnings:
        logger.warning(message)
    return Povm.from_effects(effects, labels, warnings=warnings, settings=settings)
