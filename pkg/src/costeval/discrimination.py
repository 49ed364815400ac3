"""Binned calibration errors and rank-based binary score metrics.

ROC points are indexed by thresholds ``t`` with the rule "decide class 2 iff
score > t". Curves are exported as CSV with headers ``threshold,r12,r22`` and
``threshold,precision,recall``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ._binning import assign_bins, equal_count_edges, equal_width_edges
from .calibration import threshold_sweep
from .metrics import binary_nec_alpha
from .types import alpha_cost, as_labels, as_priors, as_scores

__all__ = [
    "ece_binary",
    "ece_multiclass",
    "RocCurve",
    "PrCurve",
    "roc_curve",
    "auc",
    "eer",
    "pr_curve",
    "auc_pr",
    "TargetSensitivityResult",
    "TargetSensitivityError",
    "nec_for_target_sensitivity",
]


def _binary_inputs(scores2, labels):
    s = np.asarray(scores2, dtype=float).ravel()
    lab = as_labels(labels, 2)
    if lab.num_classes != 2:
        raise ValueError("expected binary labels")
    if s.size != len(lab):
        raise ValueError(f"{s.size} scores but {len(lab)} labels")
    return s, lab.values == 1


def _ece(score, positive, m: int, binning: str) -> float:
    if binning == "equal_width":
        edges = equal_width_edges(m)
    elif binning == "equal_count":
        edges = equal_count_edges(score, m)
    else:
        raise ValueError(f"unknown binning {binning!r}")
    idx = assign_bins(score, edges)
    nb = edges.size - 1
    n = np.bincount(idx, minlength=nb)
    frac = np.bincount(idx, weights=positive.astype(float), minlength=nb)
    avg = np.bincount(idx, weights=score, minlength=nb)
    used = n > 0
    gap = np.abs(frac[used] - avg[used]) / n[used]
    return float(np.sum(n[used] / score.size * gap))


def ece_binary(scores2, labels, m: int = 15, *, binning: str = "equal_width") -> float:
    """ECE of class-2 posteriors over ``m`` bins (empty bins are skipped)."""
    s, pos = _binary_inputs(scores2, labels)
    return _ece(s, pos, m, binning)


def ece_multiclass(scores, labels, m: int = 15, *, binning: str = "equal_width") -> float:
    """ECE of the confidences (max posterior) against argmax correctness."""
    s = as_scores(scores)
    lab = as_labels(labels, s.num_classes)
    if len(lab) != s.num_samples:
        raise ValueError(f"{s.num_samples} score rows but {len(lab)} labels")
    conf = s.values.max(axis=1)
    correct = np.argmax(s.values, axis=1) == lab.values
    return _ece(conf, correct, m, binning)


@dataclass(frozen=True)
class RocCurve:
    """Operating points ``(r12, r22)`` ordered by increasing threshold."""

    thresholds: np.ndarray
    r12: np.ndarray
    r22: np.ndarray
    # class sizes behind the rates; 0 when unknown
    n1: int = 0
    n2: int = 0

    @property
    def r21(self) -> np.ndarray:
        return 1.0 - self.r22

    def to_csv(self) -> str:
        return _curve_csv("threshold,r12,r22", self.thresholds, self.r12, self.r22)


@dataclass(frozen=True)
class PrCurve:
    """Precision and recall ordered by increasing threshold."""

    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray

    def to_csv(self) -> str:
        return _curve_csv("threshold,precision,recall", self.thresholds, self.precision, self.recall)


def _curve_csv(header, *cols) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in zip(*cols):
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    return buf.getvalue()


def _sorted_counts(scores2, labels):
    s, pos = _binary_inputs(scores2, labels)
    n_pos = int(pos.sum())
    n_neg = int(pos.size - n_pos)
    u, inv = np.unique(s, return_inverse=True)
    pos_at = np.bincount(inv, weights=pos.astype(float), minlength=u.size)
    neg_at = np.bincount(inv, weights=(~pos).astype(float), minlength=u.size)
    # samples strictly above each threshold in [-inf, u_0, ..., u_last]
    pos_above = n_pos - np.concatenate([[0.0], np.cumsum(pos_at)])
    neg_above = n_neg - np.concatenate([[0.0], np.cumsum(neg_at)])
    thresholds = np.concatenate([[-np.inf], u])
    return thresholds, pos_above, neg_above, n_pos, n_neg


def roc_curve(scores2, labels) -> RocCurve:
    thresholds, pos_above, neg_above, n_pos, n_neg = _sorted_counts(scores2, labels)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC analysis needs samples of both classes")
    return RocCurve(thresholds, neg_above / n_neg, pos_above / n_pos, n_neg, n_pos)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve (the rank statistic with half-credit ties).

    With known class sizes the area is summed in integers and divided once, so
    it equals the pairwise rank statistic bit for bit.
    """
    x, y = curve.r12[::-1], curve.r22[::-1]
    if curve.n1 > 0 and curve.n2 > 0:
        neg = np.rint(x * curve.n1).astype(np.int64)
        pos = np.rint(y * curve.n2).astype(np.int64)
        twice = int(np.sum(np.diff(neg) * (pos[1:] + pos[:-1])))
        return twice / (2 * curve.n1 * curve.n2)
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def eer(curve: RocCurve) -> float:
    """Rate at which ``r12 == r21``, linearly interpolated between bracketing points."""
    d = curve.r12 - curve.r21
    hit = np.flatnonzero(d <= 0)
    k = int(hit[0])
    if d[k] == 0 or k == 0:
        return float(curve.r12[k])
    lam = d[k - 1] / (d[k - 1] - d[k])
    return float((1 - lam) * curve.r12[k - 1] + lam * curve.r12[k])


def pr_curve(scores2, labels) -> PrCurve:
    """Precision/recall per threshold; precision is 1 where nothing is detected."""
    thresholds, pos_above, neg_above, n_pos, _ = _sorted_counts(scores2, labels)
    if n_pos == 0:
        raise ValueError("PR analysis needs samples of class 2")
    detected = pos_above + neg_above
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(detected > 0, pos_above / np.maximum(detected, 1), 1.0)
    return PrCurve(thresholds, precision, pos_above / n_pos)


def auc_pr(curve: PrCurve) -> float:
    """Step-wise area: ``sum (recall_k - recall_{k+1}) * precision_k``."""
    r, p = curve.recall, curve.precision
    return float(np.sum((r[:-1] - r[1:]) * p[:-1]))


@dataclass(frozen=True)
class TargetSensitivityResult:
    alpha: float
    threshold: float
    nec: float
    implied_cost_ratio: float
    sensitivity: float


class TargetSensitivityError(ValueError):
    """No alpha on the grid reached the target sensitivity.

    ``nearest_alpha`` and ``nearest_sensitivity`` describe the closest grid
    point; callers may widen the grid or reject the system.
    """

    def __init__(self, target, nearest_alpha, nearest_sensitivity):
        self.target = target
        self.nearest_alpha = nearest_alpha
        self.nearest_sensitivity = nearest_sensitivity
        super().__init__(
            f"no alpha on the grid reaches sensitivity {target:g} within 0.05; nearest is "
            f"{nearest_sensitivity:.6g} at alpha={nearest_alpha:g}"
        )


def nec_for_target_sensitivity(scores2, labels, target_sens: float, priors=None,
                               alpha_grid=None, *, tolerance: float = 0.05
                               ) -> TargetSensitivityResult:
    """Pick the binary NEC whose optimal threshold yields the target sensitivity.

    For every ``alpha`` on the grid the threshold minimizing the alpha-NEC is
    found by an exact sweep; the alpha whose sensitivity (class-2 recall) at
    that threshold is closest to ``target_sens`` is returned, ties going to
    the smaller alpha. The implied cost ratio is ``c12/c21 = alpha P2 / P1``.
    """
    if not 0.0 < target_sens < 1.0:
        raise ValueError("target sensitivity must lie in (0, 1)")
    grid = np.logspace(-2, 2, 81) if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("alpha grid must be nonempty and positive")
    grid = np.sort(grid)
    s, pos = _binary_inputs(scores2, labels)
    labels01 = pos.astype(np.int64)
    pr = as_priors(priors)
    if pr is None:
        n2 = int(pos.sum())
        pr = as_priors([1 - n2 / pos.size, n2 / pos.size])
    best = None
    for a in grid:
        thresholds, r12, r21, _ = threshold_sweep(s, labels01, alpha_cost(a, pr), pr)
        nec = np.array([binary_nec_alpha(x, y, a) for x, y in zip(r12, r21)])
        k = int(np.argmin(nec))
        sens = 1.0 - r21[k]
        gap = abs(sens - target_sens)
        if best is None or gap < best[0]:
            best = (gap, a, float(thresholds[k]), float(nec[k]), float(sens))
    gap, a, t, nec_val, sens = best
    if gap > tolerance:
        raise TargetSensitivityError(target_sens, a, sens)
    p = pr.values
    return TargetSensitivityResult(float(a), t, nec_val, float(a * p[1] / p[0]), sens)
