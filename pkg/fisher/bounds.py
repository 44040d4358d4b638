"""Fisher-information quantities for one-parameter channels."""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from canonical.frames import CanonicalFrame
from channels.family import ParamKrausFamily, output_derivative, output_state
from channels.states import QuantumState
from fisher.povm import Povm
from linalg.core import eig_hermitian
from utils.errors import DimensionError, DivergentFisherTermError, ValidationError
from utils.settings import DEFAULT_SETTINGS, NumericSettings

KrausSource = Union[ParamKrausFamily, CanonicalFrame]


def kraus_bound(source: KrausSource, theta: float, rho0: QuantumState) -> float:
    """C(theta) = 4 tr(sum_k K_k'^H K_k' rho0) for the supplied Kraus set.

    The value depends on which decomposition is supplied: the raw family or a
    canonical frame.
    """
    if isinstance(source, CanonicalFrame):
        if not math.isclose(source.theta, float(theta), rel_tol=0.0, abs_tol=1e-12):
            raise ValidationError(f"frame was built at theta={source.theta!r}, not {theta!r}")
        derivs = source.kraus_derivs
    else:
        derivs = source.kraus_derivatives(theta)
    return derivative_bound(derivs, rho0)


def derivative_bound(derivs: np.ndarray, rho0: QuantumState) -> float:
    if rho0.dim != derivs.shape[1]:
        raise DimensionError(f"input state has dimension {rho0.dim}, Kraus operators act on {derivs.shape[1]}")
    value = 4.0 * np.einsum("kji,kjl,li->", derivs.conj(), derivs, rho0.density).real
    return max(float(value), 0.0)


def fisher_terms(
    povm: Povm,
    rho: np.ndarray,
    drho: np.ndarray,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> np.ndarray:
    """Per-outcome contributions (tr E rho')^2 / tr E rho."""
    probs = povm.probabilities(rho)
    slopes = povm.probabilities(drho)
    terms = np.zeros_like(probs)
    floor = settings.eps_prob
    for i, (p, dp) in enumerate(zip(probs, slopes)):
        if p < floor:
            if abs(dp) >= math.sqrt(floor):
                raise DivergentFisherTermError(povm.labels[i], float(p), float(dp))
            continue
        terms[i] = dp * dp / p
    return terms


def classical_fisher(
    povm: Povm,
    family: ParamKrausFamily,
    theta: float,
    rho0: QuantumState,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> float:
    if povm.dim != family.dim:
        raise DimensionError(f"POVM acts on dimension {povm.dim}, {family.label} on {family.dim}")
    rho = output_state(family, theta, rho0)
    drho = output_derivative(family, theta, rho0)
    return float(fisher_terms(povm, rho, drho, settings=settings).sum())


def sld_fisher(
    family: ParamKrausFamily,
    theta: float,
    rho0: QuantumState,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> float:
    """Quantum Fisher information from the symmetric logarithmic derivative.

    Used as an independent oracle for the canonical-frame bound.
    """
    rho = output_state(family, theta, rho0)
    drho = output_derivative(family, theta, rho0)
    decomposition = eig_hermitian(rho, settings=settings)
    vecs = decomposition.eigenvectors
    rotated = vecs.conj().T @ drho @ vecs
    sums = decomposition.eigenvalues[:, None] + decomposition.eigenvalues[None, :]
    mask = sums > settings.eps_prob
    value = 2.0 * np.sum(np.abs(rotated[mask]) ** 2 / sums[mask])
    return max(float(value), 0.0)
