"""Bayes decisions and posterior construction.

Decisions minimize the posterior-expected cost of each sample. Priors used to
turn likelihoods or LLRs into posteriors are always explicit arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import CostMatrix, Decisions, ScoreMatrix, as_cost, as_priors, as_scores

__all__ = [
    "BayesDecisionRule",
    "bayes_decide",
    "binary_bayes_threshold",
    "llr_bayes_threshold",
    "threshold_decide",
    "posteriors_from_log_likelihoods",
    "posteriors_from_llr",
    "llr_from_posteriors",
    "POSTERIOR_FLOOR",
]

# Posteriors are clipped here before any log is taken.
POSTERIOR_FLOOR = 1e-300


@dataclass(frozen=True)
class BayesDecisionRule:
    """Cost matrix plus the tie policy (lowest decision index wins)."""

    cost: CostMatrix
    tie_policy: str = "lowest-index"

    def __post_init__(self):
        if self.tie_policy != "lowest-index":
            raise ValueError("only the lowest-index tie policy is supported")

    def expected_costs(self, scores) -> np.ndarray:
        """Posterior-expected cost of every decision, shape N x M."""
        s = _posteriors(scores)
        if s.num_classes != self.cost.num_classes:
            raise ValueError(
                f"scores have {s.num_classes} classes but the cost matrix has {self.cost.num_classes}"
            )
        return s.values @ self.cost.costs

    def decide(self, scores) -> Decisions:
        # argmin returns the first minimizer, which is the tie policy
        d = np.argmin(self.expected_costs(scores), axis=1)
        return Decisions(d, self.cost.num_decisions)


def _posteriors(scores) -> ScoreMatrix:
    s = as_scores(scores)
    if s.kind != "posterior":
        raise ValueError(f"Bayes decisions need posterior scores, got {s.kind!r}")
    return s


def bayes_decide(scores, cost) -> Decisions:
    """Per-sample ``argmin_j sum_i c_ij s_i``, ties to the lowest ``j``."""
    return BayesDecisionRule(as_cost(cost)).decide(scores)


def _binary_costs(cost) -> tuple[float, float]:
    cost = as_cost(cost)
    if not cost.is_binary_square_zero_diag():
        raise ValueError(
            "threshold rules need a 2x2 cost matrix with zero diagonal and positive "
            "off-diagonal costs; use bayes_decide otherwise"
        )
    return float(cost.costs[0, 1]), float(cost.costs[1, 0])


def binary_bayes_threshold(cost) -> float:
    """Threshold on ``P(H2|x)`` above which class 2 is the Bayes decision."""
    c12, c21 = _binary_costs(cost)
    return c12 / (c12 + c21)


def llr_bayes_threshold(cost, priors) -> float:
    """Threshold on the LLR above which class 2 is the Bayes decision.

    This is ``log(c12 P1 / (c21 P2))``.
    """
    c12, c21 = _binary_costs(cost)
    p = as_priors(priors).values
    if p.size != 2:
        raise ValueError("LLR thresholds need binary priors")
    return math.log(c12 * p[0] / (c21 * p[1]))


def threshold_decide(score2, threshold: float) -> Decisions:
    """Decide index 1 where the score strictly exceeds ``threshold``, else index 0."""
    s = np.asarray(score2, dtype=float).ravel()
    return Decisions((s > threshold).astype(np.int64), 2)


def posteriors_from_log_likelihoods(scores, priors) -> ScoreMatrix:
    """Bayes rule in the log domain with max-subtraction."""
    s = as_scores(scores, "log_likelihood")
    if s.kind != "log_likelihood":
        raise ValueError(f"expected log-likelihood scores, got {s.kind!r}")
    p = as_priors(priors).values
    if p.size != s.num_classes:
        raise ValueError(f"{p.size} priors for {s.num_classes} classes")
    z = s.values + np.log(p)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return ScoreMatrix(e / e.sum(axis=1, keepdims=True), "posterior")


def posteriors_from_llr(llr, priors) -> ScoreMatrix:
    """Binary posteriors ``P(H2|x) = 1 / (1 + P1/P2 exp(-llr))``."""
    s = as_scores(llr, "binary_llr")
    if s.kind != "binary_llr":
        raise ValueError(f"expected binary LLR scores, got {s.kind!r}")
    p = as_priors(priors).values
    if p.size != 2:
        raise ValueError("LLR posteriors need binary priors")
    # logistic of (llr + log prior odds), written to avoid overflow
    z = s.values[:, 0] + math.log(p[1] / p[0])
    p2 = np.empty_like(z)
    pos = z >= 0
    p2[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    p2[~pos] = ez / (1.0 + ez)
    return ScoreMatrix(np.column_stack([1.0 - p2, p2]), "posterior")


def llr_from_posteriors(scores, priors) -> ScoreMatrix:
    """Inverse of :func:`posteriors_from_llr`: ``log(s2/s1) - log(P2/P1)``."""
    s = _posteriors(scores)
    if s.num_classes != 2:
        raise ValueError("LLRs are only defined for binary posteriors")
    p = as_priors(priors).values
    v = np.clip(s.values, POSTERIOR_FLOOR, 1.0)
    llr = np.log(v[:, 1]) - np.log(v[:, 0]) - math.log(p[1] / p[0])
    return ScoreMatrix(llr, "binary_llr")
