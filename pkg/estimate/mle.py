"""Maximum-likelihood estimation of theta from outcome counts."""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from channels.family import ParamKrausFamily
from channels.states import QuantumState
from estimate.sampling import OutcomeSample, outcome_probabilities
from fisher.povm import Povm
from utils.errors import DimensionError, LikelihoodError
from utils.log import get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

logger = get_logger("estimate", "mle")


def search_interval(family: ParamKrausFamily, settings: NumericSettings = DEFAULT_SETTINGS) -> Tuple[float, float]:
    """The parameter domain pulled inward; an open end is replaced by a finite span."""
    lo, hi = family.theta_domain
    span = settings.mle_open_span
    if not math.isfinite(lo) and not math.isfinite(hi):
        lo, hi = -0.5 * span, 0.5 * span
    elif not math.isfinite(hi):
        hi = lo + span
    elif not math.isfinite(lo):
        lo = hi - span
    inset = settings.domain_inset
    return lo + inset, hi - inset


class LikelihoodModel:
    """Outcome probabilities of one channel, input and POVM as a function of theta."""

    def __init__(
        self,
        povm: Povm,
        family: ParamKrausFamily,
        rho0: QuantumState,
        *,
        settings: NumericSettings = DEFAULT_SETTINGS,
    ) -> None:
        if povm.dim != family.dim:
            raise DimensionError(f"POVM acts on dimension {povm.dim}, {family.label} on {family.dim}")
        self.povm = povm
        self.family = family
        self.rho0 = rho0
        self.settings = settings
        lo, hi = search_interval(family, settings)
        self.grid = np.linspace(lo, hi, settings.mle_grid_points)
        self.table = np.array([self.probabilities(theta) for theta in self.grid])

    def probabilities(self, theta: float) -> np.ndarray:
        return outcome_probabilities(self.povm, self.family, theta, self.rho0)

    def _check(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        if counts.shape != (self.povm.n_outcomes,):
            raise DimensionError(f"expected {self.povm.n_outcomes} outcome counts, got {counts.shape}")
        return counts

    @staticmethod
    def _loglik(counts: np.ndarray, probs: np.ndarray) -> np.ndarray:
        observed = counts > 0
        with np.errstate(divide="ignore"):
            logs = np.where(observed, np.log(np.where(observed, probs, 1.0)), 0.0)
        return logs @ counts

    def log_likelihood(self, counts: np.ndarray, theta: float) -> float:
        return float(self._loglik(self._check(counts), self.probabilities(theta)))

    def grid_log_likelihood(self, counts: np.ndarray) -> np.ndarray:
        return self._loglik(self._check(counts), self.table)

    def estimate(self, counts: np.ndarray) -> float:
        counts = self._check(counts)
        scan = self.grid_log_likelihood(counts)
        if not np.any(np.isfinite(scan)):
            raise LikelihoodError(f"{self.family.label}: observed outcomes have zero probability on the whole domain")
        # first maximum, so ties go to the smaller theta
        best = int(np.argmax(scan))
        left = self.grid[max(best - 1, 0)]
        right = self.grid[min(best + 1, self.grid.size - 1)]
        result = minimize_scalar(
            lambda theta: -self.log_likelihood(counts, theta),
            bounds=(left, right),
            method="bounded",
            options={"xatol": self.settings.mle_xtol},
        )
        candidate = float(result.x)
        grid_theta = float(self.grid[best])
        refined = self.log_likelihood(counts, candidate)
        if refined > scan[best] or (refined == scan[best] and candidate < grid_theta):
            logger.debug("refined %.9g -> %.12g", grid_theta, candidate)
            return candidate
        if best in (0, self.grid.size - 1):
            logger.debug("%s: estimate at the clamped domain edge %.9g", self.family.label, grid_theta)
        return grid_theta


def mle_estimate(
    sample: OutcomeSample,
    povm: Povm,
    family: ParamKrausFamily,
    rho0: QuantumState,
    *,
    model: Optional[LikelihoodModel] = None,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> float:
    """Grid scan followed by bounded scalar refinement around the best grid point.

    ``model`` can be shared across calls that use the same POVM, channel and
    input state.
    """
    if len(sample.counts) != povm.n_outcomes:
        raise DimensionError(f"sample has {len(sample.counts)} outcomes, POVM has {povm.n_outcomes}")
    if model is None:
        model = LikelihoodModel(povm, family, rho0, settings=settings)
    return model.estimate(np.asarray(sample.counts))
