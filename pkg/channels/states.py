"""Input states and the descriptor strings that name them."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Optional, Sequence

import numpy as np

from linalg.core import as_matrix, eig_hermitian, frobenius
from utils.errors import DimensionError, ValidationError
from utils.settings import DEFAULT_SETTINGS, NumericSettings

_PURE_TOL = 1e-12
_TRACE_TOL = 1e-12

_SQRT_HALF = 1.0 / math.sqrt(2.0)
# |psi+>, |psi->, |phi+>, |phi-> in the |00>,|01>,|10>,|11> basis
BELL_STATES = (
    np.array([_SQRT_HALF, 0, 0, _SQRT_HALF], dtype=np.complex128),
    np.array([_SQRT_HALF, 0, 0, -_SQRT_HALF], dtype=np.complex128),
    np.array([0, _SQRT_HALF, _SQRT_HALF, 0], dtype=np.complex128),
    np.array([0, _SQRT_HALF, -_SQRT_HALF, 0], dtype=np.complex128),
)
SINGLET_INDEX = 3


@dataclass(frozen=True, eq=False)
class QuantumState:
    kind: str
    vector: Optional[np.ndarray] = None
    density: np.ndarray = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    @classmethod
    def pure(cls, amplitudes: Sequence[complex]) -> "QuantumState":
        vector = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if vector.size == 0 or not np.all(np.isfinite(vector)):
            raise ValidationError("pure state needs finite amplitudes")
        norm = float(np.linalg.norm(vector))
        if abs(norm - 1.0) > _PURE_TOL:
            raise ValidationError(f"pure state must have unit norm, got {norm!r}")
        vector = vector.copy()
        vector.flags.writeable = False
        density = np.outer(vector, vector.conj())
        density.flags.writeable = False
        return cls(kind="pure", vector=vector, density=density)

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex]) -> "QuantumState":
        vector = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            raise ValidationError("cannot normalise the zero vector")
        return cls.pure(vector / norm)

    @classmethod
    def mixed(
        cls,
        density: np.ndarray,
        *,
        settings: NumericSettings = DEFAULT_SETTINGS,
    ) -> "QuantumState":
        rho = as_matrix(density, name="density")
        if rho.shape[0] != rho.shape[1]:
            raise DimensionError(f"density must be square, got {rho.shape}")
        if frobenius(rho - rho.conj().T) > settings.hermitian_tol:
            raise ValidationError("density must be Hermitian")
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > _TRACE_TOL:
            raise ValidationError(f"density must have unit trace, got {trace!r}")
        smallest = eig_hermitian(rho, settings=settings).eigenvalues[0]
        if smallest < -settings.psd_clamp:
            raise ValidationError(f"density has negative eigenvalue {smallest:.3e}")
        rho = 0.5 * (rho + rho.conj().T)
        rho.flags.writeable = False
        return cls(kind="mixed", density=rho)

    @classmethod
    def basis(cls, dim: int, index: int) -> "QuantumState":
        if not 0 <= index < dim:
            raise ValidationError(f"basis index {index} outside dimension {dim}")
        vector = np.zeros(dim, dtype=np.complex128)
        vector[index] = 1.0
        return cls.pure(vector)

    @classmethod
    def plus(cls) -> "QuantumState":
        return cls.pure([_SQRT_HALF, _SQRT_HALF])

    @classmethod
    def minus(cls) -> "QuantumState":
        return cls.pure([_SQRT_HALF, -_SQRT_HALF])

    @classmethod
    def bell(cls, index: int = 0) -> "QuantumState":
        if not 0 <= index < len(BELL_STATES):
            raise ValidationError(f"Bell index must be 0..3, got {index}")
        return cls.pure(BELL_STATES[index])

    @classmethod
    def mixture(cls, weights: Sequence[float], states: Sequence["QuantumState"]) -> "QuantumState":
        if len(weights) != len(states) or not states:
            raise ValidationError("mixture needs one weight per state")
        rho = sum(float(w) * s.density for w, s in zip(weights, states))
        return cls.mixed(rho)

    def tensor(self, other: "QuantumState") -> "QuantumState":
        if self.is_pure and other.is_pure:
            return QuantumState.pure(np.kron(self.vector, other.vector))
        return QuantumState.mixed(np.kron(self.density, other.density))


def parse_state(descriptor: str, dim: int) -> QuantumState:
    """Build a state from ``basis:<i>``, ``fock:<n>``, ``plus``, ``minus``,
    ``bell:<i>``, ``singlet`` or ``amplitudes:<a0>,<a1>,...``."""
    text = descriptor.strip().lower()
    head, _, tail = text.partition(":")
    try:
        if head in ("basis", "fock"):
            state = QuantumState.basis(dim, int(tail))
        elif head == "plus":
            state = QuantumState.plus()
        elif head == "minus":
            state = QuantumState.minus()
        elif head == "bell":
            state = QuantumState.bell(int(tail or 0))
        elif head == "singlet":
            state = QuantumState.bell(SINGLET_INDEX)
        elif head == "amplitudes":
            amplitudes = [complex(item.replace(" ", "")) for item in tail.split(",") if item.strip()]
            state = QuantumState.normalized(amplitudes)
        else:
            raise ValidationError(f"unknown input-state descriptor {descriptor!r}")
    except ValueError as exc:
        raise ValidationError(f"malformed input-state descriptor {descriptor!r}: {exc}") from exc
    if state.dim != dim:
        raise DimensionError(f"input state {descriptor!r} has dimension {state.dim}, channel needs {dim}")
    return state
