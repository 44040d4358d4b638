"""Builtin channel families with analytic derivatives."""

from __future__ import annotations

import inspect
import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from channels.family import ParamKrausFamily
from linalg.core import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, identity
from utils.errors import UnknownChannelError, ValidationError
from utils.settings import DEFAULT_SETTINGS, NumericSettings


def depolarizing(*, settings: NumericSettings = DEFAULT_SETTINGS) -> ParamKrausFamily:
    """{sqrt(1-p) I, sqrt(p/3) X, sqrt(p/3) Y, sqrt(p/3) Z} for p in (0, 1)."""

    def kraus_at(p: float) -> List[np.ndarray]:
        a, b = math.sqrt(1.0 - p), math.sqrt(p / 3.0)
        return [a * PAULI_I, b * PAULI_X, b * PAULI_Y, b * PAULI_Z]

    def deriv_at(p: float) -> List[np.ndarray]:
        da = -0.5 / math.sqrt(1.0 - p)
        db = 1.0 / (6.0 * math.sqrt(p / 3.0))
        return [da * PAULI_I, db * PAULI_X, db * PAULI_Y, db * PAULI_Z]

    return ParamKrausFamily(
        dim=2,
        n_kraus=4,
        theta_domain=(0.0, 1.0),
        kraus_fn=kraus_at,
        deriv_fn=deriv_at,
        label="depolarizing",
        trace_tol=settings.trace_preservation_tol,
    )


def depolarizing_canonical(*, settings: NumericSettings = DEFAULT_SETTINGS) -> ParamKrausFamily:
    """Depolarizing channel written in its canonical form for the input |0>."""
    lower = PAULI_X - 1j * PAULI_Y  # 2|1><0|
    raising = PAULI_X + 1j * PAULI_Y  # 2|0><1|

    def kraus_at(p: float) -> List[np.ndarray]:
        q = 1.0 - p
        r = q + p / 3.0
        root = math.sqrt(p / 6.0)
        c = math.sqrt(q * p / 3.0 / r)
        return [
            1j * root * lower,
            (q * PAULI_I + (p / 3.0) * PAULI_Z) / math.sqrt(r),
            root * raising,
            c * (PAULI_Z - PAULI_I),
        ]

    def deriv_at(p: float) -> List[np.ndarray]:
        q = 1.0 - p
        r = q + p / 3.0
        droot = 1.0 / (12.0 * math.sqrt(p / 6.0))
        numerator = q * PAULI_I + (p / 3.0) * PAULI_Z
        d_numerator = -PAULI_I + PAULI_Z / 3.0
        g = q * p / (3.0 - 2.0 * p)
        dg = (3.0 - 6.0 * p + 2.0 * p * p) / (3.0 - 2.0 * p) ** 2
        dc = dg / (2.0 * math.sqrt(g))
        return [
            1j * droot * lower,
            d_numerator / math.sqrt(r) + numerator / (3.0 * r ** 1.5),
            droot * raising,
            dc * (PAULI_Z - PAULI_I),
        ]

    return ParamKrausFamily(
        dim=2,
        n_kraus=4,
        theta_domain=(0.0, 1.0),
        kraus_fn=kraus_at,
        deriv_fn=deriv_at,
        label="depolarizing-canonical",
        trace_tol=settings.trace_preservation_tol,
    )


def dephasing(*, settings: NumericSettings = DEFAULT_SETTINGS) -> ParamKrausFamily:
    """{sqrt((1+e^-2t)/2) I, sqrt((1-e^-2t)/2) Z} for t in (0, inf)."""

    def kraus_at(theta: float) -> List[np.ndarray]:
        decay = math.exp(-2.0 * theta)
        return [math.sqrt(0.5 * (1.0 + decay)) * PAULI_I, math.sqrt(0.5 * (1.0 - decay)) * PAULI_Z]

    def deriv_at(theta: float) -> List[np.ndarray]:
        decay = math.exp(-2.0 * theta)
        keep = math.sqrt(0.5 * (1.0 + decay))
        flip = math.sqrt(-0.5 * math.expm1(-2.0 * theta))
        return [(-0.5 * decay / keep) * PAULI_I, (0.5 * decay / flip) * PAULI_Z]

    return ParamKrausFamily(
        dim=2,
        n_kraus=2,
        theta_domain=(0.0, math.inf),
        kraus_fn=kraus_at,
        deriv_fn=deriv_at,
        label="dephasing",
        trace_tol=settings.trace_preservation_tol,
    )


def shift_operator(dim: int) -> np.ndarray:
    """Cyclic shift U|x> = |x+1 mod dim>."""
    return np.roll(identity(dim), 1, axis=0)


def poisson_cutoff(theta_max: float, tail: float) -> int:
    """Smallest k_max whose Poisson(theta_max) tail beyond k_max is below ``tail``."""
    k_max = int(poisson.ppf(1.0 - tail, theta_max)) if tail > 1e-15 else 0
    while poisson.sf(k_max, theta_max) >= tail:
        k_max += 1
    while k_max > 0 and poisson.sf(k_max - 1, theta_max) < tail:
        k_max -= 1
    return k_max


def random_shift(
    *,
    theta_max: float = 4.0,
    dim: Optional[int] = None,
    k_max: Optional[int] = None,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> ParamKrausFamily:
    """Poisson-distributed kicks by a cyclic shift; the fiducial input is |0>.

    The domain is (0, theta_max); the cutoff is chosen for theta_max, so the
    neglected tail is smaller everywhere inside the domain.
    """
    if not theta_max > 0:
        raise ValidationError("random-shift needs theta_max > 0")
    if k_max is None:
        k_max = poisson_cutoff(theta_max, settings.poisson_tail)
    if k_max < 0:
        raise ValidationError("random-shift needs k_max >= 0")
    if dim is None:
        dim = k_max + 2
    if dim < k_max + 2:
        raise ValidationError(f"random-shift dimension {dim} must be at least k_max + 2 = {k_max + 2}")
    shift = shift_operator(dim)
    powers = [np.linalg.matrix_power(shift, k) for k in range(k_max + 1)]
    ks = np.arange(k_max + 1)
    tail = float(poisson.sf(k_max, theta_max))

    def weights(theta: float) -> np.ndarray:
        return np.exp(0.5 * (ks * math.log(theta) - gammaln(ks + 1) - theta))

    def kraus_at(theta: float) -> List[np.ndarray]:
        return [w * power for w, power in zip(weights(theta), powers)]

    def deriv_at(theta: float) -> List[np.ndarray]:
        factors = weights(theta) * (ks / (2.0 * theta) - 0.5)
        return [f * power for f, power in zip(factors, powers)]

    return ParamKrausFamily(
        dim=dim,
        n_kraus=k_max + 1,
        theta_domain=(0.0, float(theta_max)),
        kraus_fn=kraus_at,
        deriv_fn=deriv_at,
        label="random-shift",
        trace_tol=settings.trace_preservation_tol + math.sqrt(dim) * tail,
    )


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(np.complex128)


def damping(*, n_max: int, settings: NumericSettings = DEFAULT_SETTINGS) -> ParamKrausFamily:
    """Oscillator damping truncated to Fock states |0>..|n_max>.

    The truncated set is exactly trace preserving because a^k already
    annihilates everything it would push below |0>.
    """
    if int(n_max) != n_max or n_max < 1:
        raise ValidationError("damping needs an integer n_max >= 1")
    n_max = int(n_max)
    dim = n_max + 1
    a = annihilation(dim)
    lowering = [np.linalg.matrix_power(a, k) for k in range(dim)]
    number = np.arange(dim, dtype=float)
    ks = np.arange(dim)

    def parts(theta: float) -> tuple[np.ndarray, List[np.ndarray]]:
        loss = -math.expm1(-theta)
        weights = np.exp(0.5 * (ks * math.log(loss) - gammaln(ks + 1)))
        attenuation = np.exp(-0.5 * theta * number)
        ops = [w * (attenuation[:, None] * low) for w, low in zip(weights, lowering)]
        return number, ops

    def kraus_at(theta: float) -> List[np.ndarray]:
        return parts(theta)[1]

    def deriv_at(theta: float) -> List[np.ndarray]:
        n, ops = parts(theta)
        ratio = 1.0 / math.expm1(theta)
        return [(0.5 * k * ratio - 0.5 * n)[:, None] * op for k, op in zip(ks, ops)]

    return ParamKrausFamily(
        dim=dim,
        n_kraus=dim,
        theta_domain=(0.0, math.inf),
        kraus_fn=kraus_at,
        deriv_fn=deriv_at,
        label="damping",
        trace_tol=settings.trace_preservation_tol,
    )


def transmittance(theta: float) -> float:
    """Beam-splitter intensity transmittance equivalent to damping parameter theta."""
    return math.exp(-theta)


def theta_from_transmittance(eta: float) -> float:
    if not 0.0 < eta < 1.0:
        raise ValidationError("transmittance must lie in (0, 1)")
    return -math.log(eta)


def fisher_in_transmittance(fisher_theta: float, eta: float) -> float:
    """Convert Fisher information about theta into information about eta = e^-theta."""
    return fisher_theta / (eta * eta)


BUILTINS: Dict[str, Callable[..., ParamKrausFamily]] = {
    "depolarizing": depolarizing,
    "depolarizing-canonical": depolarizing_canonical,
    "dephasing": dephasing,
    "random-shift": random_shift,
    "damping": damping,
}


def builtin(name: str, *, settings: NumericSettings = DEFAULT_SETTINGS, **params: Any) -> ParamKrausFamily:
    factory = BUILTINS.get(name)
    if factory is None:
        raise UnknownChannelError(f"unknown channel {name!r}; choose from {', '.join(BUILTINS)}")
    accepted = set(inspect.signature(factory).parameters) - {"settings"}
    unknown = sorted(set(params) - accepted)
    if unknown:
        raise ValidationError(f"channel {name!r} does not take parameters {', '.join(unknown)}")
    missing = sorted(
        key
        for key, parameter in inspect.signature(factory).parameters.items()
        if parameter.default is inspect.Parameter.empty and key not in params
    )
    if missing:
        raise ValidationError(f"channel {name!r} requires parameters {', '.join(missing)}")
    return factory(settings=settings, **params)
