"""Cost of remixing a canonical Kraus set with a smooth unitary."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from canonical.frames import CanonicalFrame
from channels.states import QuantumState
from fisher.bounds import derivative_bound
from fisher.optimality import optimality_check
from fisher.povm import Povm
from linalg.core import as_matrix, is_anti_hermitian
from utils.errors import DimensionError, ValidationError
from utils.settings import DEFAULT_SETTINGS, NumericSettings


class RemixPenalty(NamedTuple):
    remixed: float
    predicted: float


def _require_local_quasi_classical(frame: CanonicalFrame, tol: float) -> None:
    overlaps = frame.derivative_overlaps()
    off = overlaps - np.diag(np.diag(overlaps))
    worst_off = float(np.max(np.abs(off))) if off.size else 0.0
    worst_imag = float(np.max(np.abs(np.diag(overlaps).imag)))
    if worst_off > tol or worst_imag > tol:
        raise ValidationError(
            f"frame at theta={frame.theta!r} is not quasi-classical "
            f"(off-diagonal {worst_off:.3e}, imaginary {worst_imag:.3e})"
        )


def remix_penalty(
    frame: CanonicalFrame,
    generator: np.ndarray,
    theta: float,
    rho0: QuantumState,
    povm: Povm,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> RemixPenalty:
    """Bound of O_k = sum_j u_jk K_j with u(theta) = exp(theta G), and its prediction.

    For a quasi-classical canonical set the cross terms vanish and the bound
    grows by exactly 4 sum_j p_j sum_k |u'_jk|^2, which is never negative.
    """
    g = as_matrix(generator, name="generator")
    if g.shape != (frame.n_kraus, frame.n_kraus):
        raise DimensionError(f"generator must be {frame.n_kraus}x{frame.n_kraus}, got {g.shape}")
    if not is_anti_hermitian(g, settings.hermitian_tol):
        raise ValidationError("remix generator must be anti-Hermitian")
    if not math.isclose(frame.theta, float(theta), rel_tol=0.0, abs_tol=1e-12):
        raise ValidationError(f"frame was built at theta={frame.theta!r}, not {theta!r}")
    _require_local_quasi_classical(frame, settings.quasi_classical_tol)
    report = optimality_check(povm, frame, rho0, settings=settings)
    if not report.satisfied:
        raise ValidationError(f"POVM does not satisfy the optimality condition (residual {report.max_residual:.3e})")

    u = expm(float(theta) * g)
    du = g @ u
    derivs = np.einsum("jk,jab->kab", du, frame.kraus_ops) + np.einsum("jk,jab->kab", u, frame.kraus_derivs)
    remixed = derivative_bound(derivs, rho0)
    canonical = derivative_bound(frame.kraus_derivs, rho0)
    predicted = canonical + 4.0 * float(np.sum(frame.probabilities[:, None] * np.abs(du) ** 2))
    return RemixPenalty(remixed=remixed, predicted=predicted)
