"""Dense complex linear algebra primitives.

Matrices are two-dimensional ``complex128`` numpy arrays. Every function is a
pure function of its inputs and never mutates them.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Iterable

import numpy as np

from utils.errors import ConvergenceError, DimensionError, NotPSDError, ValidationError
from utils.settings import DEFAULT_SETTINGS, NumericSettings


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        vecs = self.eigenvectors
        return (vecs * self.eigenvalues) @ vecs.conj().T

    def projector(self, index: int) -> np.ndarray:
        column = self.eigenvectors[:, index]
        return np.outer(column, column.conj())


def as_matrix(value: Iterable, *, name: str = "matrix") -> np.ndarray:
    matrix = np.array(value, dtype=np.complex128)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValidationError(f"{name} has non-finite entries")
    return matrix


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, "fro"))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionError(f"commutator needs equal square shapes, got {a.shape} and {b.shape}")
    return frobenius(a @ b - b @ a)


def _require_hermitian(a: np.ndarray, settings: NumericSettings) -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    skew = frobenius(a - a.conj().T)
    if skew > settings.hermitian_tol * (1.0 + frobenius(a)):
        raise ValidationError(f"matrix is not Hermitian (||a - a^H||_F = {skew:.3e})")
    return 0.5 * (a + a.conj().T)


def _rotate(work: np.ndarray, vecs: np.ndarray, p: int, q: int) -> None:
    apq = work[p, q]
    magnitude = abs(apq)
    phase = apq / magnitude
    angle = 0.5 * math.atan2(2.0 * magnitude, (work[q, q] - work[p, p]).real)
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, s * phase], [-s * phase.conjugate(), c]], dtype=np.complex128)
    cols = [p, q]
    work[:, cols] = work[:, cols] @ rot
    work[cols, :] = rot.conj().T @ work[cols, :]
    work[p, q] = work[q, p] = 0.0
    work[p, p] = work[p, p].real
    work[q, q] = work[q, q].real
    vecs[:, cols] = vecs[:, cols] @ rot


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # largest-modulus entry of each column made real and positive
    pivots = np.argmax(np.abs(vecs), axis=0)
    entries = vecs[pivots, np.arange(vecs.shape[1])]
    return vecs * (np.abs(entries) / entries)


def eig_hermitian(
    a: np.ndarray,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> HermitianEigenDecomposition:
    """Cyclic complex Jacobi rotations until the off-diagonal part is negligible."""
    work = _require_hermitian(np.asarray(a, dtype=np.complex128), settings).copy()
    n = work.shape[0]
    vecs = identity(n)
    target = settings.jacobi_rel_tol * frobenius(work)
    for _ in range(settings.jacobi_max_sweeps):
        off = frobenius(work - np.diag(np.diag(work)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if work[p, q] != 0.0:
                    _rotate(work, vecs, p, q)
    else:
        off = frobenius(work - np.diag(np.diag(work)))
        if off > target:
            raise ConvergenceError(
                f"Jacobi eigensolver did not converge in {settings.jacobi_max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})"
            )
    values = np.real(np.diag(work)).copy()
    order = np.argsort(values, kind="stable")
    return HermitianEigenDecomposition(
        eigenvalues=values[order],
        eigenvectors=_fix_phases(vecs[:, order]),
    )


def psd_sqrt(a: np.ndarray, *, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    decomposition = eig_hermitian(a, settings=settings)
    values = decomposition.eigenvalues
    if values.size and values[0] < -settings.psd_clamp:
        raise NotPSDError(f"matrix is not PSD (smallest eigenvalue {values[0]:.3e})")
    roots = np.sqrt(np.clip(values, 0.0, None))
    vecs = decomposition.eigenvectors
    root = (vecs * roots) @ vecs.conj().T
    return 0.5 * (root + root.conj().T)


def is_unitary(u: np.ndarray, tol: float) -> bool:
    return u.shape[0] == u.shape[1] and frobenius(u.conj().T @ u - identity(u.shape[0])) <= tol


def is_anti_hermitian(g: np.ndarray, tol: float) -> bool:
    return g.shape[0] == g.shape[1] and frobenius(g + g.conj().T) <= tol * (1.0 + frobenius(g))


PAULI_I = identity(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
