"""Parametrised Kraus families and the channel maps they induce."""

from __future__ import annotations

from dataclasses import dataclass, replace
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from channels.states import QuantumState
from linalg.core import as_matrix, frobenius, identity
from utils.errors import DimensionError, DomainError, ValidationError
from utils.log import get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

KrausMap = Callable[[float], Sequence[np.ndarray]]

logger = get_logger("channels", "family")


@dataclass(frozen=True)
class FamilyDiagnostics:
    max_trace_deficiency: float
    max_derivative_error: float
    thetas: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class ParamKrausFamily:
    """A map theta -> {K_k(theta)} together with the derivatives K_k'(theta).

    Kraus sets are returned as ``(n_kraus, dim, dim)`` complex arrays.
    """

    dim: int
    n_kraus: int
    theta_domain: Tuple[float, float]
    kraus_fn: KrausMap
    deriv_fn: KrausMap
    label: str
    trace_tol: float = DEFAULT_SETTINGS.trace_preservation_tol
    analytic_derivative: bool = True

    @classmethod
    def from_callable(
        cls,
        *,
        dim: int,
        theta_domain: Tuple[float, float],
        kraus_at: KrausMap,
        kraus_deriv_at: Optional[KrausMap] = None,
        label: str = "custom",
        trace_tol: Optional[float] = None,
        settings: NumericSettings = DEFAULT_SETTINGS,
    ) -> "ParamKrausFamily":
        lo, hi = theta_domain
        if not lo < hi:
            raise ValidationError(f"empty parameter domain {theta_domain!r}")
        sample = _stack(kraus_at(_interior_point(lo, hi)), dim)
        family = cls(
            dim=dim,
            n_kraus=sample.shape[0],
            theta_domain=(float(lo), float(hi)),
            kraus_fn=kraus_at,
            deriv_fn=kraus_deriv_at or (lambda theta: ()),
            label=label,
            trace_tol=settings.trace_preservation_tol if trace_tol is None else trace_tol,
            analytic_derivative=kraus_deriv_at is not None,
        )
        if kraus_deriv_at is None:
            family = replace(family, deriv_fn=_central_difference(family, settings))
            logger.debug("family %s uses finite-difference derivatives", label)
        return family

    def contains(self, theta: float) -> bool:
        lo, hi = self.theta_domain
        return lo < theta < hi

    def check_theta(self, theta: float) -> float:
        theta = float(theta)
        if not math.isfinite(theta) or not self.contains(theta):
            raise DomainError(f"theta={theta!r} outside the open domain {self.theta_domain} of {self.label}")
        return theta

    def kraus(self, theta: float) -> np.ndarray:
        return _stack(self.kraus_fn(self.check_theta(theta)), self.dim, self.n_kraus)

    def kraus_derivatives(self, theta: float) -> np.ndarray:
        return _stack(self.deriv_fn(self.check_theta(theta)), self.dim, self.n_kraus)

    def trace_deficiency(self, theta: float) -> float:
        ops = self.kraus(theta)
        total = np.einsum("kji,kjl->il", ops.conj(), ops)
        return frobenius(total - identity(self.dim))

    def diagnostics(
        self,
        thetas: Sequence[float],
        *,
        settings: NumericSettings = DEFAULT_SETTINGS,
    ) -> FamilyDiagnostics:
        """Trace deficiency and analytic-vs-finite-difference derivative error on a grid."""
        numeric = _central_difference(self, settings)
        deficiency = 0.0
        mismatch = 0.0
        for theta in thetas:
            deficiency = max(deficiency, self.trace_deficiency(theta))
            analytic = self.kraus_derivatives(theta)
            estimate = _stack(numeric(theta), self.dim, self.n_kraus)
            per_op = np.linalg.norm(analytic - estimate, axis=(1, 2))
            mismatch = max(mismatch, float(per_op.max()))
        return FamilyDiagnostics(deficiency, mismatch, tuple(float(t) for t in thetas))


def _interior_point(lo: float, hi: float) -> float:
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def _stack(ops: Sequence[np.ndarray], dim: int, n_kraus: Optional[int] = None) -> np.ndarray:
    stacked = np.array([as_matrix(op, name="Kraus operator") for op in ops], dtype=np.complex128)
    if stacked.ndim != 3 or stacked.shape[1:] != (dim, dim):
        raise DimensionError(f"Kraus operators must be {dim}x{dim}, got {stacked.shape[1:]}")
    if n_kraus is not None and stacked.shape[0] != n_kraus:
        raise DimensionError(f"expected {n_kraus} Kraus operators, got {stacked.shape[0]}")
    return stacked


def _central_difference(family: ParamKrausFamily, settings: NumericSettings) -> KrausMap:
    lo, hi = family.theta_domain

    def derivative(theta: float) -> np.ndarray:
        step = settings.fd_rel_step * max(1.0, abs(theta))
        step = min(step, 0.5 * (theta - lo), 0.5 * (hi - theta))
        plus = _stack(family.kraus_fn(theta + step), family.dim)
        minus = _stack(family.kraus_fn(theta - step), family.dim)
        return (plus - minus) / (2.0 * step)

    return derivative


def _check_state(family: ParamKrausFamily, rho0: QuantumState) -> np.ndarray:
    if rho0.dim != family.dim:
        raise DimensionError(f"input state has dimension {rho0.dim}, {family.label} acts on {family.dim}")
    return rho0.density


def apply_kraus(ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("kij,jl,kml->im", ops, rho, ops.conj())


def output_state(family: ParamKrausFamily, theta: float, rho0: QuantumState) -> np.ndarray:
    rho = _check_state(family, rho0)
    out = apply_kraus(family.kraus(theta), rho)
    return 0.5 * (out + out.conj().T)


def output_derivative(family: ParamKrausFamily, theta: float, rho0: QuantumState) -> np.ndarray:
    rho = _check_state(family, rho0)
    ops = family.kraus(theta)
    derivs = family.kraus_derivatives(theta)
    half = np.einsum("kij,jl,kml->im", derivs, rho, ops.conj())
    return half + half.conj().T


def extend_identity(family: ParamKrausFamily) -> ParamKrausFamily:
    """I_d (x) K_k: the family acting on the second factor of a d^2 space."""
    eye = identity(family.dim)
    return replace(
        family,
        dim=family.dim ** 2,
        kraus_fn=lambda theta: [np.kron(eye, op) for op in family.kraus_fn(theta)],
        deriv_fn=lambda theta: [np.kron(eye, op) for op in family.deriv_fn(theta)],
        label=f"identity-x-{family.label}",
        trace_tol=math.sqrt(family.dim) * family.trace_tol,
    )


def tensor_square(family: ParamKrausFamily) -> ParamKrausFamily:
    """K_j (x) K_k for every pair; derivatives by the product rule."""

    def kraus_at(theta: float) -> list:
        ops = family.kraus_fn(theta)
        return [np.kron(a, b) for a in ops for b in ops]

    def deriv_at(theta: float) -> list:
        ops = family.kraus_fn(theta)
        derivs = family.deriv_fn(theta)
        return [
            np.kron(da, b) + np.kron(a, db)
            for a, da in zip(ops, derivs)
            for b, db in zip(ops, derivs)
        ]

    return replace(
        family,
        dim=family.dim ** 2,
        n_kraus=family.n_kraus ** 2,
        kraus_fn=kraus_at,
        deriv_fn=deriv_at,
        label=f"{family.label}-x-{family.label}",
        # ||S (x) S - I||_F with S = I + D is bounded by 2*sqrt(d)*||D||_F + ||D||_F^2
        trace_tol=2.0 * math.sqrt(family.dim) * family.trace_tol + family.trace_tol ** 2,
    )


def unitary_family(
    hamiltonian: np.ndarray,
    *,
    phase_rate: float = 0.0,
    label: str = "unitary",
    theta_domain: Tuple[float, float] = (-math.inf, math.inf),
) -> ParamKrausFamily:
    """Single-operator family exp(i*phase_rate*theta) * exp(-i*theta*H)."""
    h = as_matrix(hamiltonian, name="hamiltonian")
    if frobenius(h - h.conj().T) > DEFAULT_SETTINGS.hermitian_tol * (1.0 + frobenius(h)):
        raise ValidationError("unitary family needs a Hermitian generator")
    generator = -1j * h + 1j * phase_rate * identity(h.shape[0])

    def kraus_at(theta: float) -> list:
        return [expm(theta * generator)]

    def deriv_at(theta: float) -> list:
        return [generator @ expm(theta * generator)]

    return ParamKrausFamily(
        dim=h.shape[0],
        n_kraus=1,
        theta_domain=theta_domain,
        kraus_fn=kraus_at,
        deriv_fn=deriv_at,
        label=label,
    )
