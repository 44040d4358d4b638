"""Statistical distance along a tracked curve of canonical frames."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.interpolate import make_interp_spline

from canonical.frames import CanonicalFrame
from fisher.bounds import kraus_bound
from utils.errors import ValidationError
from utils.log import get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

logger = get_logger("fisher", "distance")

_SPLINE_DEGREE = 5


@dataclass(frozen=True)
class DistanceCurve:
    thetas: Tuple[float, ...]
    bound_values: Tuple[float, ...]
    eigencoord_values: Tuple[float, ...]
    label: str = ""

    def max_disagreement(self) -> float:
        if not self.thetas:
            return 0.0
        return float(np.max(np.abs(np.subtract(self.bound_values, self.eigencoord_values))))


def grid_derivative(thetas: np.ndarray, values: np.ndarray) -> np.ndarray:
    """d(values)/d(theta) along axis 0 of ``values``.

    A quintic interpolating spline is used once the grid has enough points,
    second-order finite differences below that. Complex values are
    differentiated part by part.
    """
    x = np.asarray(thetas, dtype=float)
    y = np.asarray(values)
    if np.iscomplexobj(y):
        return grid_derivative(x, y.real) + 1j * grid_derivative(x, y.imag)
    if x.size > _SPLINE_DEGREE:
        return make_interp_spline(x, y, k=_SPLINE_DEGREE, axis=0).derivative()(x)
    return np.gradient(y, x, axis=0, edge_order=2)


def statistical_distance_eigencoords(
    frames: Sequence[CanonicalFrame],
    *,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> DistanceCurve:
    """sum_k p_k'^2 / p_k + 4 sum_k p_k |<f_k|f_k'>|^2 at every grid point.

    ``frames`` must come from ``smooth_frame_curve`` so that column order and
    phases are continuous along the grid.
    """
    if len(frames) < 3:
        raise ValidationError("the eigen-coordinate metric needs at least three grid points")
    thetas = np.array([frame.theta for frame in frames])
    probs = np.array([frame.probabilities for frame in frames])
    vectors = np.array([frame.normalized_vectors for frame in frames])
    supported = np.array([frame.support for frame in frames]) & (probs > settings.p_floor)

    dprobs = grid_derivative(thetas, probs)
    dvectors = grid_derivative(thetas, vectors)
    connection = np.einsum("tki,tki->tk", vectors.conj(), dvectors)

    safe = np.where(supported, probs, 1.0)
    terms = np.where(supported, dprobs ** 2 / safe + 4.0 * probs * np.abs(connection) ** 2, 0.0)
    eigencoord = np.clip(terms.sum(axis=1), 0.0, None)
    bounds = [kraus_bound(frame, frame.theta, frame.input_state) for frame in frames]
    logger.debug("%s: eigen-coordinate metric on %d points", frames[0].label, len(frames))
    return DistanceCurve(
        thetas=tuple(float(t) for t in thetas),
        bound_values=tuple(bounds),
        eigencoord_values=tuple(float(v) for v in eigencoord),
        label=frames[0].label,
    )
