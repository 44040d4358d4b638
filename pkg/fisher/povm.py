"""Finite POVMs and the named measurement presets."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from channels.states import BELL_STATES, SINGLET_INDEX
from linalg.core import as_matrix, eig_hermitian, frobenius, identity
from utils.errors import DimensionError, ValidationError
from utils.settings import DEFAULT_SETTINGS, NumericSettings


@dataclass(frozen=True, eq=False)
class Povm:
    effects: np.ndarray
    labels: Tuple[str, ...]
    warnings: Tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.effects.shape[0]

    @classmethod
    def from_effects(
        cls,
        effects: Sequence[np.ndarray],
        labels: Optional[Sequence[str]] = None,
        *,
        warnings: Sequence[str] = (),
        settings: NumericSettings = DEFAULT_SETTINGS,
    ) -> "Povm":
        stacked = np.array([as_matrix(e, name="effect") for e in effects], dtype=np.complex128)
        if stacked.ndim != 3 or stacked.shape[1] != stacked.shape[2]:
            raise DimensionError(f"effects must be square matrices of one size, got {stacked.shape}")
        names = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(stacked)))
        if len(names) != len(stacked):
            raise ValidationError("one label per effect is required")
        for name, effect in zip(names, stacked):
            if frobenius(effect - effect.conj().T) > settings.hermitian_tol:
                raise ValidationError(f"effect {name!r} is not Hermitian")
            smallest = eig_hermitian(effect, settings=settings).eigenvalues[0]
            if smallest < -settings.psd_clamp:
                raise ValidationError(f"effect {name!r} has negative eigenvalue {smallest:.3e}")
        residual = frobenius(stacked.sum(axis=0) - identity(stacked.shape[1]))
        if residual > settings.completeness_tol:
            raise ValidationError(f"effects do not sum to identity (residual {residual:.3e})")
        return cls(effects=stacked, labels=names, warnings=tuple(warnings))

    @classmethod
    def projective(
        cls,
        vectors: Sequence[np.ndarray],
        labels: Optional[Sequence[str]] = None,
        *,
        settings: NumericSettings = DEFAULT_SETTINGS,
    ) -> "Povm":
        effects = [np.outer(v, np.conj(v)) for v in np.asarray(vectors, dtype=np.complex128)]
        return cls.from_effects(effects, labels, settings=settings)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        if rho.shape != self.effects.shape[1:]:
            raise DimensionError(f"POVM acts on dimension {self.dim}, state has shape {rho.shape}")
        return np.einsum("mij,ji->m", self.effects, rho).real


def trivial(dim: int) -> Povm:
    return Povm.from_effects([identity(dim)], ["all"])


def computational_basis(dim: int, prefix: str = "") -> Povm:
    return Povm.projective(identity(dim), [f"{prefix}{i}" for i in range(dim)])


def z_basis() -> Povm:
    return computational_basis(2)


def x_basis() -> Povm:
    root = 1.0 / np.sqrt(2.0)
    return Povm.projective([[root, root], [root, -root]], ["+", "-"])


def bell_basis() -> Povm:
    return Povm.projective(BELL_STATES, ["psi+", "psi-", "phi+", "phi-"])


def singlet_triplet() -> Povm:
    singlet = np.outer(BELL_STATES[SINGLET_INDEX], BELL_STATES[SINGLET_INDEX].conj())
    return Povm.from_effects([singlet, identity(4) - singlet], ["singlet", "triplet"])


def photon_number(dim: int) -> Povm:
    return computational_basis(dim, prefix="n=")


def position(dim: int) -> Povm:
    return computational_basis(dim, prefix="x=")


def random_rank_one(
    dim: int,
    n_outcomes: int,
    rng: np.random.Generator,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> Povm:
    """Rank-one effects S^-1/2 |g_i><g_i| S^-1/2 from complex Gaussian vectors g_i."""
    if n_outcomes < dim:
        raise ValidationError("a rank-one POVM needs at least as many outcomes as the dimension")
    g = rng.normal(size=(n_outcomes, dim)) + 1j * rng.normal(size=(n_outcomes, dim))
    frame_operator = g.T @ g.conj()
    decomposition = eig_hermitian(frame_operator, settings=settings)
    vecs = decomposition.eigenvectors
    inv_root = (vecs / np.sqrt(decomposition.eigenvalues)) @ vecs.conj().T
    vectors = (inv_root @ g.T).T
    effects = [np.outer(v, v.conj()) for v in vectors]
    total = sum(effects)
    # absorb the rounding residue so completeness holds to the settings tolerance
    correction = identity(dim) - total
    effects[-1] = effects[-1] + 0.5 * (correction + correction.conj().T)
    return Povm.from_effects(effects, [f"r{i}" for i in range(n_outcomes)], settings=settings)


def load_effects(path: Path, *, settings: NumericSettings = DEFAULT_SETTINGS) -> Povm:
    """POVM from a ``.npy`` array of shape (m, d, d)."""
    try:
        data = np.load(Path(path), allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot load POVM effects from {path}: {exc}") from exc
    if data.ndim != 3:
        raise DimensionError(f"POVM file {path} must hold an (m, d, d) array, got shape {data.shape}")
    return Povm.from_effects(list(data), settings=settings)
