from __future__ import annotations

import numpy as np


def equal_width_edges(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError(f"number of bins must be >= 1, got {m}")
    return np.linspace(0.0, 1.0, m + 1)


def equal_count_edges(scores, m: int) -> np.ndarray:
    """Quantile edges over [0, 1]; duplicated quantiles collapse into one bin."""
    if m < 1:
        raise ValueError(f"number of bins must be >= 1, got {m}")
    q = np.quantile(np.asarray(scores, dtype=float), np.linspace(0.0, 1.0, m + 1)[1:-1])
    return np.unique(np.concatenate([[0.0], q, [1.0]]))


def assign_bins(scores, edges: np.ndarray) -> np.ndarray:
    """Bin ``m`` holds ``[edges[m], edges[m+1])``; the last bin also holds 1.0."""
    s = np.asarray(scores, dtype=float)
    return np.searchsorted(edges[1:-1], s, side="right")
