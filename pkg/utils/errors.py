"""Error hierarchy; the CLI maps ``exit_code`` to the process status."""

from __future__ import annotations


class EstimationError(RuntimeError):
    """Base class for every error raised by the toolkit."""

    exit_code = 3


class ValidationError(EstimationError):
    exit_code = 2


class ConfigError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class UnknownChannelError(ValidationError):
    pass


class NumericError(EstimationError):
    exit_code = 3


class NotPSDError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class DegeneracyError(NumericError):
    """Frame tracking could not tell two eigen-directions apart."""

    def __init__(self, theta: float, indices: tuple[int, ...], detail: str = "") -> None:
        self.theta = theta
        self.indices = indices
        message = f"ambiguous frame matching at theta={theta!r} for columns {list(indices)}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class LikelihoodError(NumericError):
    pass


class DivergentFisherTermError(EstimationError):
    """An outcome has vanishing probability but a non-vanishing derivative."""

    exit_code = 4

    def __init__(self, outcome: str, probability: float, derivative: float) -> None:
        self.outcome = outcome
        self.probability = probability
        self.derivative = derivative
        super().__init__(
            f"divergent Fisher term for outcome {outcome!r}: "
            f"probability={probability:.3e}, derivative={derivative:.3e}"
        )
