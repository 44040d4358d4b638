"""Monte Carlo comparison of MLE error against the Cramer-Rao bound."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from channels.family import ParamKrausFamily
from channels.states import QuantumState
from estimate.mle import LikelihoodModel
from estimate.sampling import derive_seed, sample_outcomes
from fisher.bounds import classical_fisher
from fisher.povm import Povm
from utils.errors import ValidationError
from utils.log import get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

logger = get_logger("estimate", "experiment")


@dataclass(frozen=True)
class EstimationReport:
    n_shots: int
    n_trials: int
    estimates: Tuple[float, ...]
    empirical_variance: float
    crlb: float
    ratio: float
    bias: float
    mean_squared_error: float
    true_theta: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "n_shots": self.n_shots,
            "n_trials": self.n_trials,
            "true_theta": self.true_theta,
            "seed": self.seed,
            "estimates": list(self.estimates),
            "empirical_variance": self.empirical_variance,
            "crlb": self.crlb,
            "ratio": self.ratio,
            "bias": self.bias,
            "mean_squared_error": self.mean_squared_error,
        }


def crlb_experiment(
    povm: Povm,
    family: ParamKrausFamily,
    theta: float,
    rho0: QuantumState,
    n_shots: int,
    n_trials: int,
    seed: int,
    *,
    max_workers: Optional[int] = None,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> EstimationReport:
    """Repeat sample-then-estimate ``n_trials`` times and summarise the errors.

    Trial i draws with ``derive_seed(seed, i)``, so the report does not depend
    on ``max_workers``.
    """
    if int(n_trials) != n_trials or n_trials < 2:
        raise ValidationError(f"a CRLB experiment needs at least two trials, got {n_trials!r}")
    if int(n_shots) != n_shots or n_shots < 1:
        raise ValidationError(f"number of shots must be a positive integer, got {n_shots!r}")
    theta = family.check_theta(theta)
    fisher = classical_fisher(povm, family, theta, rho0, settings=settings)
    if not fisher > 0.0:
        raise ValidationError(f"POVM carries no Fisher information about theta at {theta!r}")
    model = LikelihoodModel(povm, family, rho0, settings=settings)

    def trial(index: int) -> float:
        sample = sample_outcomes(povm, family, theta, rho0, int(n_shots), derive_seed(seed, index))
        return model.estimate(np.asarray(sample.counts))

    indices = range(int(n_trials))
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            estimates = list(pool.map(trial, indices))
    else:
        estimates = [trial(i) for i in indices]

    ordered = np.sort(np.asarray(estimates))
    variance = float(np.var(ordered, ddof=1))
    crlb = 1.0 / (n_shots * fisher)
    errors = ordered - theta
    report = EstimationReport(
        n_shots=int(n_shots),
        n_trials=int(n_trials),
        estimates=tuple(float(e) for e in estimates),
        empirical_variance=variance,
        crlb=crlb,
        ratio=variance / crlb,
        bias=float(np.mean(ordered)) - theta,
        mean_squared_error=float(np.mean(errors * errors)),
        true_theta=theta,
        seed=int(seed),
    )
    logger.info(
        "%s: N=%d trials=%d variance/crlb=%.4f bias=%.3e",
        family.label,
        report.n_shots,
        report.n_trials,
        report.ratio,
        report.bias,
    )
    return report
