"""Calibration transforms, their training, and calibration loss.

The affine transform maps a posterior row ``s`` to ``softmax(alpha log s + beta)``;
freezing ``beta`` at zero gives temperature scaling. Parameters are trained by
minimizing the prior-weighted cross-entropy. Calibration loss compares an EPSR
before and after a calibrator trained by cross-validation on the same data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._binning import assign_bins, equal_width_edges
from .bayes import POSTERIOR_FLOOR, binary_bayes_threshold
from .scoring import bayes_ec_epsr, brier, cross_entropy, sample_weights
from .types import ScoreMatrix, as_cost, as_labels, as_priors, as_scores

__all__ = [
    "AffineCalibrator",
    "HistogramBinningCalibrator",
    "CalLossReport",
    "ThresholdSearch",
    "affine_objective",
    "fit_affine",
    "apply_affine",
    "fit_histogram_binning",
    "fit_calibrator",
    "fold_assignment",
    "crossval_calibrate",
    "calibration_loss",
    "threshold_sweep",
    "min_ec_threshold",
    "calibrator_to_text",
    "calibrator_from_text",
]

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
GRAD_TOL = 1e-8
MAX_ITER = 500


@dataclass(frozen=True)
class AffineCalibrator:
    """``softmax(alpha * log(s) + beta)`` with ``sum(beta) == 0``."""

    alpha: float
    beta: np.ndarray
    temperature_only: bool = False
    converged: bool = True
    n_iter: int = 0

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float).ravel()
        if not math.isfinite(self.alpha) or not np.all(np.isfinite(b)):
            raise ValueError("calibrator parameters must be finite")
        if self.temperature_only and np.any(b != 0):
            raise ValueError("a temperature-only calibrator has beta fixed at 0")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", b)

    @classmethod
    def identity(cls, k: int) -> "AffineCalibrator":
        return cls(1.0, np.zeros(k))

    def transform(self, scores) -> ScoreMatrix:
        return apply_affine(self, scores)


@dataclass(frozen=True)
class HistogramBinningCalibrator:
    """Maps a class-2 posterior to the class-2 fraction of its equal-width bin.

    Empty bins map to their midpoint.
    """

    edges: np.ndarray
    fractions: np.ndarray
    bin_means: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0) or e[0] != 0.0 or e[-1] != 1.0:
            raise ValueError("bin edges must be strictly increasing from 0 to 1")
        f = np.asarray(self.fractions, dtype=float)
        if f.shape != (e.size - 1,) or f.min() < 0 or f.max() > 1:
            raise ValueError("one fraction in [0, 1] is needed per bin")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "fractions", f)
        object.__setattr__(self, "bin_means", np.asarray(self.bin_means, dtype=float))

    @property
    def num_bins(self) -> int:
        return self.fractions.size

    def transform_scores2(self, scores2) -> np.ndarray:
        return self.fractions[assign_bins(scores2, self.edges)]

    def transform(self, scores) -> ScoreMatrix:
        s = as_scores(scores)
        if s.num_classes != 2:
            raise ValueError("histogram binning is a binary calibrator")
        p2 = self.transform_scores2(s.values[:, 1])
        return ScoreMatrix(np.column_stack([1.0 - p2, p2]), "posterior")


@dataclass(frozen=True)
class CalLossReport:
    epsr_raw: float
    epsr_emin: float
    cal_loss: float
    rel_cal_loss_pct: float

    @classmethod
    def from_values(cls, raw: float, emin: float) -> "CalLossReport":
        loss = raw - emin
        rel = 100.0 * loss / raw if raw > 0 else 0.0
        return cls(float(raw), float(emin), float(loss), float(rel))


# Affine calibration


def _log_scores(s: ScoreMatrix) -> np.ndarray:
    return np.log(np.clip(s.values, POSTERIOR_FLOOR, 1.0))


def _softmax_logp(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def affine_objective(alpha: float, beta, log_s: np.ndarray, labels: np.ndarray,
                     weights: np.ndarray, hessian: bool = False):
    """Weighted cross-entropy of the affine-transformed scores.

    Returns ``(value, grad)`` with ``grad = [d/dalpha, d/dbeta_1..K]``, plus the
    (K+1) x (K+1) Hessian when ``hessian`` is set.
    """
    beta = np.asarray(beta, dtype=float)
    n = log_s.shape[0]
    logp = _softmax_logp(alpha * log_s + beta)
    rows = np.arange(n)
    value = -float(np.sum(weights * logp[rows, labels]))
    p = np.exp(logp)
    r = p.copy()
    r[rows, labels] -= 1.0
    wr = weights[:, None] * r
    grad = np.concatenate([[np.sum(wr * log_s)], wr.sum(axis=0)])
    if not hessian:
        return value, grad
    pl = np.sum(p * log_s, axis=1)
    wp = weights[:, None] * p
    k = log_s.shape[1]
    h = np.empty((k + 1, k + 1))
    h[0, 0] = np.sum(weights * (np.sum(p * log_s**2, axis=1) - pl**2))
    h_ab = np.sum(wp * (log_s - pl[:, None]), axis=0)
    h[0, 1:] = h_ab
    h[1:, 0] = h_ab
    h[1:, 1:] = np.diag(wp.sum(axis=0)) - wp.T @ p
    return value, grad, h


def _newton_direction(grad: np.ndarray, hess: np.ndarray, freeze_beta: bool) -> np.ndarray:
    if freeze_beta:
        h = hess[0, 0]
        return np.array([-grad[0] / h]) if h > 0 else np.array([-grad[0]])
    k = grad.size - 1
    # the objective is flat along a common shift of beta; pin that direction
    u = np.concatenate([[0.0], np.full(k, 1.0 / math.sqrt(k))])
    a = hess + np.outer(u, u)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return -grad
    step = -np.linalg.solve(chol.T, np.linalg.solve(chol, grad))
    if step @ grad >= 0:
        return -grad
    return step


def fit_affine(scores, labels, priors=None, freeze_beta: bool = False, *,
               max_iter: int = MAX_ITER, tol: float = GRAD_TOL) -> AffineCalibrator:
    """Train an affine (or temperature-only) calibrator by weighted cross-entropy.

    Starts at ``alpha=1, beta=0`` and takes Newton steps with Armijo backtracking
    until the gradient max-norm drops below ``tol`` or ``max_iter`` is reached;
    in the latter case the result carries ``converged=False`` and a warning is
    logged.
    """
    s = as_scores(scores)
    if s.kind != "posterior":
        raise ValueError("calibrators are trained on posterior scores")
    k = s.num_classes
    lab = as_labels(labels, k)
    if len(lab) != s.num_samples:
        raise ValueError(f"{s.num_samples} score rows but {len(lab)} labels")
    if np.count_nonzero(lab.class_counts()) < 2:
        raise ValueError("cannot train a calibrator on single-class data")
    if s.num_samples < k + 2:
        raise ValueError(f"need at least K+2={k + 2} samples to train a calibrator")
    w, _ = sample_weights(lab, as_priors(priors))
    log_s = _log_scores(s)
    y = lab.values

    nfree = 1 if freeze_beta else k + 1
    theta = np.concatenate([[1.0], np.zeros(k)])

    def evaluate(t, hessian=False):
        beta = np.zeros(k) if freeze_beta else t[1:]
        return affine_objective(t[0], beta, log_s, y, w, hessian=hessian)

    converged = False
    n_iter = 0
    while True:
        f, g, h = evaluate(theta, hessian=True)
        g = g[:nfree]
        if np.max(np.abs(g)) < tol:
            converged = True
            break
        if n_iter == max_iter:
            break
        d = _newton_direction(g, h[:nfree, :nfree], freeze_beta)
        slope = float(g @ d)
        step = 1.0
        for _ in range(60):
            cand = theta.copy()
            cand[:nfree] += step * d
            if evaluate(cand)[0] <= f + ARMIJO_C * step * slope:
                break
            step *= 0.5
        else:
            # no representable decrease left along the search direction
            break
        theta = cand
        if not freeze_beta:
            theta[1:] -= theta[1:].mean()
        n_iter += 1
    if not converged:
        log.warning("affine calibration stopped after %d iterations without converging", n_iter)
    alpha, beta = theta[0], (np.zeros(k) if freeze_beta else theta[1:])
    return AffineCalibrator(alpha, beta, temperature_only=freeze_beta,
                            converged=converged, n_iter=n_iter)


def apply_affine(cal: AffineCalibrator, scores) -> ScoreMatrix:
    s = as_scores(scores)
    if s.num_classes != cal.beta.size:
        raise ValueError(f"calibrator has {cal.beta.size} classes but scores have {s.num_classes}")
    logp = _softmax_logp(cal.alpha * _log_scores(s) + cal.beta)
    return ScoreMatrix(np.exp(logp), "posterior")


# Histogram binning


def fit_histogram_binning(scores2, labels, m: int = 15) -> HistogramBinningCalibrator:
    """Equal-width histogram binning of class-2 posteriors into ``m`` bins."""
    s2 = np.asarray(scores2, dtype=float).ravel()
    lab = as_labels(labels, 2)
    if lab.num_classes != 2:
        raise ValueError("histogram binning is a binary calibrator")
    if len(lab) != s2.size:
        raise ValueError(f"{s2.size} scores but {len(lab)} labels")
    edges = equal_width_edges(m)
    idx = assign_bins(s2, edges)
    n = np.bincount(idx, minlength=m)
    pos = np.bincount(idx, weights=(lab.values == 1).astype(float), minlength=m)
    tot = np.bincount(idx, weights=s2, minlength=m)
    mid = 0.5 * (edges[:-1] + edges[1:])
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(n > 0, pos / np.maximum(n, 1), mid)
        means = np.where(n > 0, tot / np.maximum(n, 1), mid)
    return HistogramBinningCalibrator(edges, frac, means)


# Cross-validation


def fold_assignment(labels, folds: int) -> np.ndarray:
    """Stratified folds: the r-th sample of each class (in index order) goes to fold ``r % folds``."""
    lab = as_labels(labels)
    if folds < 2:
        raise ValueError("cross-validation needs at least 2 folds")
    out = np.empty(len(lab), dtype=np.int64)
    for c in range(lab.num_classes):
        idx = np.flatnonzero(lab.values == c)
        out[idx] = np.arange(idx.size) % folds
    return out


def fit_calibrator(method: str, scores: ScoreMatrix, labels, priors=None, bins: int = 15):
    """Train an ``affine``, ``temperature`` or ``histogram`` calibrator on the given data."""
    if method == "affine":
        return fit_affine(scores, labels, priors)
    if method == "temperature":
        return fit_affine(scores, labels, priors, freeze_beta=True)
    if method == "histogram":
        if scores.num_classes != 2:
            raise ValueError("histogram calibration needs binary scores")
        return fit_histogram_binning(scores.values[:, 1], labels, bins)
    raise ValueError(f"unknown calibration method {method!r}")


def crossval_calibrate(scores, labels, folds: int = 5, method: str = "affine", priors=None,
                       *, bins: int = 15) -> ScoreMatrix:
    """Calibrate each fold with a transform trained on the remaining folds.

    ``method`` is ``affine``, ``temperature`` or ``histogram`` (binary only).
    Row order of the output matches the input.
    """
    s = as_scores(scores)
    lab = as_labels(labels, s.num_classes)
    if len(lab) != s.num_samples:
        raise ValueError(f"{s.num_samples} score rows but {len(lab)} labels")
    pr = as_priors(priors)
    fold = fold_assignment(lab, folds)
    out = np.empty_like(s.values)
    for f in range(folds):
        test = fold == f
        train = ~test
        missing = np.setdiff1d(np.arange(lab.num_classes), np.unique(lab.values[train]))
        if missing.size:
            raise ValueError(f"class {int(missing[0])} is absent from the training split of fold {f}")
        if not test.any():
            continue
        cal = fit_calibrator(method, ScoreMatrix(s.values[train]), lab.values[train], pr, bins)
        out[test] = cal.transform(ScoreMatrix(s.values[test])).values
    return ScoreMatrix(out, "posterior")


def _epsr(kind: str, scores, labels, priors, cost) -> float:
    if kind == "xe":
        return cross_entropy(scores, labels, priors).raw
    if kind == "brier":
        return brier(scores, labels, priors).raw
    if kind == "bayes_ec":
        if cost is None:
            raise ValueError("the bayes_ec EPSR needs a cost matrix")
        return bayes_ec_epsr(scores, labels, cost, priors).raw
    raise ValueError(f"unknown EPSR {kind!r}")


def calibration_loss(scores, labels, epsr_kind: str = "xe", method: str = "affine",
                     folds: int = 5, priors=None, *, cost=None, bins: int = 15,
                     train_on_test: bool = False) -> CalLossReport:
    """EPSR of the raw scores minus the EPSR after calibration.

    The calibrator is trained by ``folds``-fold cross-validation unless
    ``train_on_test`` is set, in which case it is trained on all the data it is
    evaluated on. The relative loss is in percent and may be negative.
    """
    s = as_scores(scores)
    lab = as_labels(labels, s.num_classes)
    pr = as_priors(priors)
    raw = _epsr(epsr_kind, s, lab, pr, cost)
    if train_on_test:
        cal_scores = fit_calibrator(method, s, lab, pr, bins).transform(s)
    else:
        cal_scores = crossval_calibrate(s, lab, folds, method, pr, bins=bins)
    emin = _epsr(epsr_kind, cal_scores, lab, pr, cost)
    return CalLossReport.from_values(raw, emin)


# Threshold calibration for binary EC


class ThresholdSearch(NamedTuple):
    threshold: float
    min_ec: float
    bayes_ec: float


def threshold_sweep(scores2, labels, cost, priors=None):
    """EC at every distinct decision rule ``score > t``.

    Returns ``(thresholds, r12, r21, ec)``: thresholds are ``-inf``, the
    midpoints between consecutive unique scores, and ``+inf``.
    """
    s2 = np.asarray(scores2, dtype=float).ravel()
    lab = as_labels(labels, 2)
    if lab.num_classes != 2:
        raise ValueError("threshold sweeps need binary labels")
    if len(lab) != s2.size:
        raise ValueError(f"{s2.size} scores but {len(lab)} labels")
    cost = as_cost(cost)
    if not cost.is_binary_square_zero_diag():
        raise ValueError("threshold sweeps need a 2x2 cost matrix with zero diagonal")
    counts = lab.class_counts()
    if np.any(counts == 0):
        raise ValueError("threshold sweeps need samples of both classes")
    pr = as_priors(priors)
    p = counts / counts.sum() if pr is None else pr.values
    u, inv = np.unique(s2, return_inverse=True)
    n1_at = np.bincount(inv, weights=(lab.values == 0).astype(float), minlength=u.size)
    n2_at = np.bincount(inv, weights=(lab.values == 1).astype(float), minlength=u.size)
    # position k sends every sample with score <= u[k-1] to class 1
    below1 = np.concatenate([[0.0], np.cumsum(n1_at)])
    below2 = np.concatenate([[0.0], np.cumsum(n2_at)])
    r12 = 1.0 - below1 / counts[0]
    r21 = below2 / counts[1]
    thresholds = np.concatenate([[-np.inf], 0.5 * (u[:-1] + u[1:]), [np.inf]])
    c12, c21 = cost.costs[0, 1], cost.costs[1, 0]
    ec = c12 * p[0] * r12 + c21 * p[1] * r21
    return thresholds, r12, r21, ec


def min_ec_threshold(scores2, labels, cost, priors=None, *,
                     bayes_threshold: float | None = None) -> ThresholdSearch:
    """Best EC over all thresholds on the class-2 score, and the EC at the Bayes threshold.

    ``bayes_threshold`` defaults to ``c12 / (c12 + c21)``, the Bayes threshold
    for posterior scores; pass the LLR threshold when sweeping LLRs.
    """
    thresholds, _, _, ec = threshold_sweep(scores2, labels, cost, priors)
    best = int(np.argmin(ec))
    t_b = binary_bayes_threshold(cost) if bayes_threshold is None else bayes_threshold
    u = np.unique(np.asarray(scores2, dtype=float).ravel())
    # number of unique scores <= t_b selects the matching sweep position
    pos = int(np.searchsorted(u, t_b, side="right"))
    return ThresholdSearch(float(thresholds[best]), float(ec[best]), float(ec[pos]))


# Serialization


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_vec(v) -> str:
    return ",".join(_fmt(x) for x in np.asarray(v, dtype=float))


def calibrator_to_text(cal) -> str:
    """Key-value text form with 17 significant digits (exact round trip)."""
    if isinstance(cal, AffineCalibrator):
        lines = [
            "kind=temperature" if cal.temperature_only else "kind=affine",
            f"alpha={_fmt(cal.alpha)}",
            f"beta={_fmt_vec(cal.beta)}",
        ]
    elif isinstance(cal, HistogramBinningCalibrator):
        lines = [
            "kind=histogram",
            f"edges={_fmt_vec(cal.edges)}",
            f"values={_fmt_vec(cal.fractions)}",
            f"bin_means={_fmt_vec(cal.bin_means)}",
        ]
    else:
        raise TypeError(f"cannot serialize {type(cal).__name__}")
    return "\n".join(lines) + "\n"


def calibrator_from_text(text: str):
    fields = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {n}: expected key=value, got {line!r}")
        fields[key.strip()] = value.strip()

    def vec(key):
        return np.array([float(x) for x in fields[key].split(",")]) if fields[key] else np.array([])

    kind = fields.get("kind")
    if kind in ("affine", "temperature"):
        return AffineCalibrator(float(fields["alpha"]), vec("beta"),
                                temperature_only=kind == "temperature")
    if kind == "histogram":
        return HistogramBinningCalibrator(vec("edges"), vec("values"), vec("bin_means"))
    raise ValueError(f"unknown calibrator kind {kind!r}")
