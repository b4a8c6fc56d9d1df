"""Support detection for discrete measures."""

from __future__ import annotations

import numpy as np

from .grid import DiscreteMeasure

MIN_RUN = 3
EDGE_EXCLUSION = 2


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as inclusive index pairs."""
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    diff = np.diff(padded)
    starts = np.nonzero(diff == 1)[0]
    stops = np.nonzero(diff == -1)[0] - 1
    return list(zip(starts.tolist(), stops.tolist()))


def support_runs(mu: DiscreteMeasure, threshold: float) -> list[tuple[int, int]]:
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    w = mu.weights
    active = w > threshold * np.max(w)
    return [(i, j) for i, j in _runs(active) if j - i + 1 >= MIN_RUN]


def extract_support(mu: DiscreteMeasure, threshold: float = 1e-8) -> list[tuple[float, float]]:
    """Closed intervals (cell edges) covered by runs of active cells."""
    g = mu.grid
    return [(g.lo + i * g.spacing, g.lo + (j + 1) * g.spacing) for i, j in support_runs(mu, threshold)]


def support_mask(mu: DiscreteMeasure, threshold: float = 1e-8) -> np.ndarray:
    mask = np.zeros(mu.grid.n, dtype=bool)
    for i, j in support_runs(mu, threshold):
        mask[i : j + 1] = True
    return mask


def interior_support_mask(mu: DiscreteMeasure, threshold: float = 1e-8,
                          exclude: int = EDGE_EXCLUSION) -> np.ndarray:
    """Support cells at least ``exclude`` cells away from every support edge."""
    mask = np.zeros(mu.grid.n, dtype=bool)
    for i, j in support_runs(mu, threshold):
        if j - exclude >= i + exclude:
            mask[i + exclude : j - exclude + 1] = True
    return mask
