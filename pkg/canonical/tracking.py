"""Column matching between eigenbases at neighbouring parameter values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from utils.errors import DegeneracyError
from utils.settings import DEFAULT_SETTINGS, NumericSettings


@dataclass(frozen=True)
class Alignment:
    vectors: np.ndarray
    values: np.ndarray
    groups: Tuple[Tuple[int, ...], ...]


def _clusters(values: np.ndarray, tol: float, extra: Optional[np.ndarray] = None) -> List[List[int]]:
    n = values.size
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            close = abs(values[i] - values[j]) <= tol
            if extra is not None:
                close = close or abs(extra[i] - extra[j]) <= tol
            if close:
                parent[find(j)] = find(i)
    grouped: dict[int, List[int]] = {}
    for i in range(n):
        grouped.setdefault(find(i), []).append(i)
    return sorted(grouped.values())


def _polar(m: np.ndarray) -> np.ndarray:
    left, _, right = np.linalg.svd(m)
    return left @ right


def align_columns(
    reference: np.ndarray,
    reference_values: np.ndarray,
    candidate: np.ndarray,
    candidate_values: np.ndarray,
    *,
    theta: float,
    mix_reference_blocks: bool = False,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> Alignment:
    """Reorder and rephase ``candidate`` columns to follow ``reference``.

    Columns are paired by maximal overlap; inside a degenerate block the
    candidate is rotated onto the reference by the polar factor of their
    overlap, which reduces to a phase for single columns. With
    ``mix_reference_blocks`` a block degenerate only in the reference is
    rotated as well, so the result need not diagonalise anything: it is the
    parallel transport of the reference basis.
    """
    overlap = reference.conj().T @ candidate
    weight = np.abs(overlap) ** 2
    rows, cols = linear_sum_assignment(-weight)
    order = cols[np.argsort(rows)]
    vectors = candidate[:, order].copy()
    values = np.asarray(candidate_values)[order].copy()

    tol = settings.degeneracy_tol
    groups = _clusters(values, tol, reference_values if mix_reference_blocks else None)
    reference_groups = _clusters(np.asarray(reference_values), tol)
    degenerate_reference = {i for group in reference_groups if len(group) > 1 for i in group}

    for group in groups:
        block = vectors[:, group]
        vectors[:, group] = block @ _polar(block.conj().T @ reference[:, group])
        if len(group) == 1 and group[0] not in degenerate_reference and weight.shape[1] > 1:
            _check_unambiguous(weight, group[0], theta, settings)
    return Alignment(vectors=vectors, values=values, groups=tuple(tuple(g) for g in groups if len(g) > 1))


def _check_unambiguous(
    weight: np.ndarray,
    row: int,
    theta: float,
    settings: NumericSettings,
) -> None:
    magnitudes = np.sqrt(weight[row])
    ranked = np.argsort(magnitudes)[::-1]
    best, second = ranked[0], ranked[1]
    if magnitudes[best] - magnitudes[second] < settings.match_ambiguity_tol:
        raise DegeneracyError(
            theta,
            (int(row), int(best), int(second)),
            f"overlaps {magnitudes[best]:.9f} and {magnitudes[second]:.9f} are indistinguishable",
        )
