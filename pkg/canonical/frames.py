"""Canonical Kraus decompositions relative to a pure input state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from canonical.tracking import align_columns
from channels.family import ParamKrausFamily
from channels.states import QuantumState
from linalg.core import eig_hermitian, frobenius, is_unitary
from utils.errors import NumericError, ValidationError
from utils.log import get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

logger = get_logger("canonical", "frames")

# five-point stencil offsets and weights for a first derivative
_STENCIL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


@dataclass(frozen=True, eq=False)
class CanonicalFrame:
    """Canonical Kraus set at one theta.

    ``kraus_ops[k] = sum_j remix_unitary[j, k] * K_j`` where ``K_j`` is the
    source family's set; the Gram matrix tr(O_j^H O_k rho0) is diag(p).
    """

    theta: float
    input_state: QuantumState
    kraus_ops: np.ndarray
    kraus_derivs: np.ndarray
    probabilities: np.ndarray
    unnormalized_vectors: np.ndarray
    normalized_vectors: np.ndarray
    remix_unitary: np.ndarray
    remix_derivative: np.ndarray
    support: np.ndarray
    degenerate_blocks: Tuple[Tuple[int, ...], ...]
    label: str = ""

    @property
    def n_kraus(self) -> int:
        return self.kraus_ops.shape[0]

    @property
    def is_degenerate(self) -> bool:
        return bool(self.degenerate_blocks)

    def gram(self) -> np.ndarray:
        vecs = self.unnormalized_vectors
        return vecs.conj() @ vecs.T

    def derivative_overlaps(self) -> np.ndarray:
        """M[j, k] = tr(O_j^H O_k' rho0) = <e_j|O_k' psi0>."""
        moved = np.einsum("kij,j->ki", self.kraus_derivs, self.input_state.vector)
        return self.unnormalized_vectors.conj() @ moved.T


def _require_pure(psi0: QuantumState) -> np.ndarray:
    if not psi0.is_pure:
        raise ValidationError("canonical decomposition needs a pure input state")
    return psi0.vector


def _gram_basis(
    family: ParamKrausFamily,
    theta: float,
    psi: np.ndarray,
    settings: NumericSettings,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    ops = family.kraus(theta)
    moved = np.einsum("kij,j->ki", ops, psi)
    gram = moved.conj() @ moved.T
    decomposition = eig_hermitian(gram, settings=settings)
    # descending probabilities
    return ops, decomposition.eigenvalues[::-1], decomposition.eigenvectors[:, ::-1]


def _stencil_step(family: ParamKrausFamily, theta: float, settings: NumericSettings) -> float:
    lo, hi = family.theta_domain
    step = settings.frame_rel_step * max(1.0, abs(theta))
    return min(step, (theta - lo) / 3.0, (hi - theta) / 3.0)


def _block_clusters(values: np.ndarray, support: np.ndarray, tol: float) -> Tuple[Tuple[int, ...], ...]:
    idx = [int(i) for i in np.flatnonzero(support)]
    blocks: List[Tuple[int, ...]] = []
    seen: set[int] = set()
    for i in idx:
        if i in seen:
            continue
        block = tuple(j for j in idx if abs(values[j] - values[i]) <= tol)
        seen.update(block)
        if len(block) > 1:
            blocks.append(block)
    return tuple(blocks)


def canonical_decompose(
    family: ParamKrausFamily,
    theta: float,
    psi0: QuantumState,
    *,
    previous: Optional[CanonicalFrame] = None,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> CanonicalFrame:
    """Diagonalise the Gram matrix W_jk = <psi0|K_j^H K_k|psi0> and remix.

    With ``previous`` the columns are matched to that frame instead of being
    sorted by descending probability. The remix derivative u' comes from a
    five-point stencil of frames transported onto this one.
    """
    psi = _require_pure(psi0)
    theta = family.check_theta(theta)
    if psi.size != family.dim:
        raise ValidationError(f"input state has dimension {psi.size}, {family.label} acts on {family.dim}")
    ops, values, basis = _gram_basis(family, theta, psi, settings)
    derivs = family.kraus_derivatives(theta)
    if previous is not None:
        aligned = align_columns(
            previous.remix_unitary,
            previous.probabilities,
            basis,
            values,
            theta=theta,
            settings=settings,
        )
        basis, values = aligned.vectors, aligned.values

    step = _stencil_step(family, theta, settings)
    remix_derivative = np.zeros_like(basis)
    for offset, weight in _STENCIL:
        _, side_values, side_basis = _gram_basis(family, theta + offset * step, psi, settings)
        side = align_columns(
            basis,
            values,
            side_basis,
            side_values,
            theta=theta + offset * step,
            mix_reference_blocks=True,
            settings=settings,
        )
        remix_derivative += weight * side.vectors
    remix_derivative /= 12.0 * step

    kraus_ops = np.einsum("jk,jab->kab", basis, ops)
    kraus_derivs = np.einsum("jk,jab->kab", remix_derivative, ops) + np.einsum("jk,jab->kab", basis, derivs)
    probabilities = np.clip(values.real, 0.0, None)
    unnormalized = np.einsum("kij,j->ki", kraus_ops, psi)
    support = probabilities > settings.p_floor
    normalized = np.zeros_like(unnormalized)
    normalized[support] = unnormalized[support] / np.sqrt(probabilities[support])[:, None]

    frame = CanonicalFrame(
        theta=theta,
        input_state=psi0,
        kraus_ops=kraus_ops,
        kraus_derivs=kraus_derivs,
        probabilities=probabilities,
        unnormalized_vectors=unnormalized,
        normalized_vectors=normalized,
        remix_unitary=basis,
        remix_derivative=remix_derivative,
        support=support,
        degenerate_blocks=_block_clusters(probabilities, support, settings.degeneracy_tol),
        label=family.label,
    )
    _verify(frame, settings)
    if frame.is_degenerate:
        logger.debug("theta=%.6g: degenerate canonical probabilities in blocks %s", theta, frame.degenerate_blocks)
    return frame


def _verify(frame: CanonicalFrame, settings: NumericSettings) -> None:
    gram = frame.gram()
    off = gram - np.diag(np.diag(gram))
    if off.size and np.max(np.abs(off)) > 1e-9:
        raise NumericError(f"canonical Gram matrix not diagonal at theta={frame.theta!r} ({np.max(np.abs(off)):.3e})")
    if np.max(np.abs(np.diag(gram).real - frame.probabilities)) > 1e-10:
        raise NumericError(f"canonical Gram diagonal does not reproduce probabilities at theta={frame.theta!r}")
    total = float(frame.probabilities.sum())
    if abs(total - 1.0) > 1e-9:
        raise NumericError(f"canonical probabilities sum to {total!r} at theta={frame.theta!r}")
    if not is_unitary(frame.remix_unitary, 1e-10):
        raise NumericError(f"remix matrix is not unitary at theta={frame.theta!r}")


def smooth_frame_curve(
    family: ParamKrausFamily,
    thetas: Sequence[float],
    psi0: QuantumState,
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> List[CanonicalFrame]:
    """Canonical frames along an ascending grid, each matched to its predecessor.

    Column order is fixed by descending probability at the first point and
    then carried by overlap; phases follow the previous frame.
    """
    grid = [float(t) for t in thetas]
    if len(grid) < 2:
        raise ValidationError("a frame curve needs at least two grid points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("frame-curve grid must be strictly ascending")
    frames: List[CanonicalFrame] = []
    for theta in grid:
        frames.append(
            canonical_decompose(
                family,
                theta,
                psi0,
                previous=frames[-1] if frames else None,
                settings=settings,
            )
        )
    logger.debug("tracked %d canonical frames for %s", len(frames), family.label)
    return frames


def frame_reconstruction_error(frame: CanonicalFrame, family: ParamKrausFamily) -> float:
    """Frobenius distance between the remixed and the source channel outputs."""
    rho = frame.input_state.density
    ours = np.einsum("kij,jl,kml->im", frame.kraus_ops, rho, frame.kraus_ops.conj())
    source = family.kraus(frame.theta)
    theirs = np.einsum("kij,jl,kml->im", source, rho, source.conj())
    return frobenius(ours - theirs)


def successive_overlaps(frames: Sequence[CanonicalFrame]) -> np.ndarray:
    """<f_k(theta_i)|f_k(theta_i+1)> for every supported column pair."""
    rows = []
    for before, after in zip(frames, frames[1:]):
        both = before.support & after.support
        values = np.einsum("ki,ki->k", before.normalized_vectors.conj(), after.normalized_vectors)
        rows.append(np.where(both, values, np.nan))
    return np.array(rows)
