"""Expected proper scoring rules (EPSRs) over posterior scores.

Each EPSR is a weighted mean of a per-sample scoring rule with weights
``P_h / N_h`` (``1/N`` when the priors are the empirical ones), and is reported
together with the value of the input-blind system that always outputs the
priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bayes import POSTERIOR_FLOOR, bayes_decide
from .types import Labels, Priors, as_cost, as_labels, as_priors, as_scores

__all__ = [
    "EpsrResult",
    "sample_weights",
    "cross_entropy",
    "brier",
    "bayes_ec_epsr",
    "psr_pointwise",
]


@dataclass(frozen=True)
class EpsrResult:
    """Raw EPSR, the naive system's EPSR and their ratio.

    The ratio is nan when the naive value is 0, which only happens when the
    evaluation priors put all mass on one class.
    """

    raw: float
    naive: float
    normalized: float

    @classmethod
    def from_raw(cls, raw: float, naive: float) -> "EpsrResult":
        raw, naive = float(raw), float(naive)
        if naive < 0:
            raise ValueError("naive EPSR must be non-negative")
        return cls(raw, naive, raw / naive if naive > 0 else math.nan)


def _prepare(scores, labels, priors):
    s = as_scores(scores)
    if s.kind != "posterior":
        raise ValueError(f"EPSRs are computed on posteriors, got {s.kind!r} scores")
    lab = as_labels(labels, s.num_classes)
    if len(lab) != s.num_samples:
        raise ValueError(f"{s.num_samples} score rows but {len(lab)} labels")
    pr = as_priors(priors)
    if pr is not None and len(pr) != s.num_classes:
        raise ValueError(f"{len(pr)} priors for {s.num_classes} classes")
    return s, lab, pr


def sample_weights(labels: Labels, priors: Priors | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample weights ``P_h / N_h`` and the prior vector they correspond to.

    Without explicit priors the weights are ``1/N`` and the returned vector holds
    the empirical class frequencies (zero for classes absent from the labels).
    With explicit priors every class must be present.
    """
    counts = labels.class_counts()
    if priors is None:
        n = len(labels)
        return np.full(n, 1.0 / n), counts / n
    absent = np.flatnonzero(counts == 0)
    if absent.size:
        raise ValueError(f"class {int(absent[0])} is absent from the labels but has prior "
                         f"{priors.values[absent[0]]:g}")
    return priors.values[labels.values] / counts[labels.values], priors.values


def _naive_xe(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def _naive_brier(p: np.ndarray) -> float:
    return float(np.sum(p * (1.0 - p)) / p.size)


def psr_pointwise(kind: str, s, h: int, cost=None) -> float:
    """Single-sample scoring rule.

    ``log`` is the negative log posterior of class ``h``, ``brier`` the mean
    squared distance to the one-hot target, and ``bayes_ec`` the cost
    ``c[h, d]`` of the Bayes decision ``d`` made from ``s`` under ``cost``.
    """
    s = np.asarray(s, dtype=float)
    if kind == "log":
        return float(-np.log(max(s[h], POSTERIOR_FLOOR)))
    if kind == "brier":
        target = np.zeros_like(s)
        target[h] = 1.0
        return float(np.mean((s - target) ** 2))
    if kind == "bayes_ec":
        if cost is None:
            raise ValueError("the bayes_ec rule needs a cost matrix")
        c = as_cost(cost).costs
        return float(c[h, int(np.argmin(s @ c))])
    raise ValueError(f"unknown scoring rule {kind!r}")


def cross_entropy(scores, labels, priors=None) -> EpsrResult:
    """Prior-weighted cross-entropy (natural log), normalized by the prior entropy."""
    s, lab, pr = _prepare(scores, labels, priors)
    w, pr = sample_weights(lab, pr)
    p_true = np.clip(s.values[np.arange(s.num_samples), lab.values], POSTERIOR_FLOOR, 1.0)
    raw = -np.sum(w * np.log(p_true))
    return EpsrResult.from_raw(raw, _naive_xe(pr))


def brier(scores, labels, priors=None) -> EpsrResult:
    """Prior-weighted Brier score with the ``1/K`` factor kept for every K."""
    s, lab, pr = _prepare(scores, labels, priors)
    w, pr = sample_weights(lab, pr)
    if s.num_classes == 2:
        # (s1 - I1)^2 == (s2 - I2)^2, so the 1/K mean equals the class-2 term alone
        per = (s.values[:, 1] - (lab.values == 1)) ** 2
    else:
        onehot = np.zeros_like(s.values)
        onehot[np.arange(s.num_samples), lab.values] = 1.0
        per = np.mean((s.values - onehot) ** 2, axis=1)
    return EpsrResult.from_raw(np.sum(w * per), _naive_brier(pr))


def bayes_ec_epsr(scores, labels, cost, priors=None) -> EpsrResult:
    """EC of the Bayes decisions made from ``scores``, normalized by the naive EC."""
    s, lab, pr = _prepare(scores, labels, priors)
    cost = as_cost(cost)
    d = bayes_decide(s, cost)
    w, p = sample_weights(lab, pr)
    # the weighted mean of per-sample costs equals sum_ij c_ij P_i R_ij
    raw = np.sum(w * cost.costs[lab.values, d.values])
    naive = float(np.min(p @ cost.costs))
    return EpsrResult.from_raw(raw, naive)
