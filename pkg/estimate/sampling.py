"""Measurement records drawn from a channel output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from channels.family import ParamKrausFamily, output_state
from channels.states import QuantumState
from fisher.povm import Povm
from utils.errors import DimensionError, LikelihoodError, ValidationError

_NORMALISATION_TOL = 1e-9
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class OutcomeSample:
    counts: Tuple[int, ...]
    n_total: int
    true_theta: float
    seed: int

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts):
            raise ValidationError("outcome counts must be nonnegative")
        if sum(self.counts) != self.n_total:
            raise ValidationError(f"counts sum to {sum(self.counts)}, expected {self.n_total}")

    def scaled(self, factor: int) -> "OutcomeSample":
        return OutcomeSample(tuple(c * factor for c in self.counts), self.n_total * factor, self.true_theta, self.seed)


def normalise_probabilities(probs: np.ndarray) -> np.ndarray:
    clipped = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    total = float(clipped.sum())
    if abs(total - 1.0) > _NORMALISATION_TOL:
        raise LikelihoodError(f"outcome probabilities sum to {total!r}")
    return clipped / total


def outcome_probabilities(povm: Povm, family: ParamKrausFamily, theta: float, rho0: QuantumState) -> np.ndarray:
    if povm.dim != family.dim:
        raise DimensionError(f"POVM acts on dimension {povm.dim}, {family.label} on {family.dim}")
    return normalise_probabilities(povm.probabilities(output_state(family, theta, rho0)))


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & _SEED_MASK))


def derive_seed(master: int, index: int) -> int:
    """Per-trial seed depending only on the master seed and the trial index."""
    state = np.random.SeedSequence([int(master) & _SEED_MASK, int(index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def sample_outcomes(
    povm: Povm,
    family: ParamKrausFamily,
    theta: float,
    rho0: QuantumState,
    n: int,
    seed: int,
) -> OutcomeSample:
    if int(n) != n or n < 1:
        raise ValidationError(f"number of shots must be a positive integer, got {n!r}")
    probs = outcome_probabilities(povm, family, theta, rho0)
    counts = make_generator(seed).multinomial(int(n), probs)
    return OutcomeSample(
        counts=tuple(int(c) for c in counts),
        n_total=int(n),
        true_theta=float(theta),
        seed=int(seed) & _SEED_MASK,
    )
