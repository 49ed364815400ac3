"""Metrics over hard decisions.

Every metric here is expressed through the expected cost (EC) of a confusion
table, optionally normalized by the EC of the best input-blind system. Classic
metrics (error rates, F-beta, MCC, LR+, net benefit) are provided alongside so
that their relation to an EC can be checked numerically.

For the binary-only metrics the class of interest is index 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import (
    ConfusionCounts,
    CostMatrix,
    Priors,
    as_cost,
    as_priors,
    balanced_cost,
    empirical_priors,
    net_benefit_cost,
    rates_from_counts,
    zero_one_cost,
)

__all__ = [
    "MetricReport",
    "expected_cost",
    "naive_ec",
    "normalized_ec",
    "binary_nec_alpha",
    "error_rate",
    "balanced_error_rate",
    "f_beta",
    "naive_f_beta",
    "mcc",
    "lr_plus",
    "net_benefit",
    "decision_report",
]


@dataclass(frozen=True)
class MetricReport:
    """One metric value together with its naive-system reference."""

    name: str
    value: float
    naive_value: float | None = None
    normalized: float | None = None

    @classmethod
    def normalized_by_naive(cls, name: str, value: float, naive: float) -> "MetricReport":
        """Report whose normalized value is ``value / naive`` (nan when naive is 0)."""
        return cls(name, value, naive, value / naive if naive > 0 else math.nan)


def _check_dims(conf: ConfusionCounts, cost: CostMatrix):
    if conf.shape != cost.costs.shape:
        raise ValueError(
            f"confusion table is {conf.shape[0]}x{conf.shape[1]} but cost matrix is "
            f"{cost.num_classes}x{cost.num_decisions}"
        )


def _priors_for(conf: ConfusionCounts, priors) -> Priors:
    priors = as_priors(priors)
    if priors is None:
        return empirical_priors(conf)
    if len(priors) != conf.num_classes:
        raise ValueError(f"{len(priors)} priors for {conf.num_classes} classes")
    return priors


def _binary(conf: ConfusionCounts, what: str):
    if conf.shape != (2, 2):
        raise ValueError(f"{what} is only defined for a 2x2 confusion table, got {conf.shape}")


def expected_cost(conf: ConfusionCounts, cost, priors=None) -> float:
    """Prior-weighted expected cost ``sum_ij c_ij P_i R_ij``.

    Parameters
    ----------
    conf : ConfusionCounts
        K x M counts.
    cost : CostMatrix or array_like
        K x M costs.
    priors : Priors or array_like, optional
        Class priors. Defaults to the class frequencies in ``conf``.
    """
    cost = as_cost(cost)
    _check_dims(conf, cost)
    p = _priors_for(conf, priors).values
    r = rates_from_counts(conf)
    return float(np.sum(cost.costs * p[:, None] * r))


def naive_ec(cost, priors) -> tuple[float, int]:
    """EC of the best system that always makes the same decision.

    Returns the EC and the index of that decision; ties go to the lowest index.
    """
    cost = as_cost(cost)
    p = as_priors(priors).values
    if p.size != cost.num_classes:
        raise ValueError(f"{p.size} priors for {cost.num_classes} classes")
    per_decision = p @ cost.costs
    j = int(np.argmin(per_decision))
    return float(per_decision[j]), j


def normalized_ec(conf: ConfusionCounts, cost, priors=None) -> float:
    """EC divided by the EC of the best naive system; above 1 means worse than naive."""
    cost = as_cost(cost)
    p = _priors_for(conf, priors)
    naive, _ = naive_ec(cost, p)
    if naive <= 0:
        raise ValueError("naive EC is 0 for this cost matrix and priors; NEC is undefined")
    return expected_cost(conf, cost, p) / naive


def binary_nec_alpha(r12: float, r21: float, alpha: float) -> float:
    """Binary normalized EC as a function of the single parameter ``alpha``.

    ``alpha = c12 P1 / (c21 P2)``; ``r12`` is the rate of class-1 samples sent
    to decision 2 and ``r21`` the converse.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if alpha >= 1:
        return alpha * r12 + r21
    return r12 + r21 / alpha


def error_rate(conf: ConfusionCounts) -> float:
    if conf.num_classes != conf.num_decisions:
        raise ValueError("error rate needs a square confusion table")
    c = conf.counts
    return float((c.sum() - np.trace(c)) / conf.total)


def balanced_error_rate(conf: ConfusionCounts) -> float:
    if conf.num_classes != conf.num_decisions:
        raise ValueError("balanced error rate needs a square confusion table")
    r = rates_from_counts(conf)
    return float(np.mean(1.0 - np.diag(r)))


def f_beta(conf: ConfusionCounts, beta: float = 1.0, *, with_flag: bool = False):
    """F-beta score for class index 1.

    When nothing is labeled or predicted as class 1 the score is 0/0; it is
    then reported as 0.0. With ``with_flag=True`` a ``(value, degenerate)``
    tuple is returned instead of the bare value.
    """
    _binary(conf, "F-beta")
    b2 = beta * beta
    n12, n21, n22 = conf.counts[0, 1], conf.counts[1, 0], conf.counts[1, 1]
    den = (1 + b2) * n22 + b2 * n21 + n12
    degenerate = den == 0
    value = 0.0 if degenerate else float((1 + b2) * n22 / den)
    return (value, bool(degenerate)) if with_flag else value


def naive_f_beta(priors, beta: float = 1.0) -> float:
    """F-beta of the system that always decides class 1: ``(1+b2) P2 / (b2 P2 + 1)``."""
    p2 = as_priors(priors).values[1]
    b2 = beta * beta
    return float((1 + b2) * p2 / (b2 * p2 + 1))


def mcc(conf: ConfusionCounts) -> float:
    """Matthews correlation coefficient of a binary confusion table."""
    _binary(conf, "MCC")
    rows, cols = conf.row_totals, conf.col_totals
    if np.any(rows == 0) or np.any(cols == 0):
        raise ValueError(
            f"MCC undefined: zero marginal (class totals {rows.tolist()}, "
            f"decision totals {cols.tolist()})"
        )
    c = conf.counts.astype(float)
    num = c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]
    return float(num / math.sqrt(rows[0] * rows[1] * cols[0] * cols[1]))


def lr_plus(conf: ConfusionCounts) -> float:
    """Positive likelihood ratio ``R22 / R12``.

    Returns ``math.inf`` when ``R12 = 0`` and ``R22 > 0``.
    """
    _binary(conf, "LR+")
    r = rates_from_counts(conf)
    r12, r22 = r[0, 1], r[1, 1]
    if r12 == 0:
        if r22 == 0:
            raise ValueError("LR+ undefined: R12 and R22 are both 0")
        return math.inf
    return float(r22 / r12)


def net_benefit(conf: ConfusionCounts, p: float, priors=None) -> float:
    """Net benefit ``P2 R22 - p/(1-p) P1 R12`` for threshold probability ``p``."""
    _binary(conf, "net benefit")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    pr = _priors_for(conf, priors).values
    r = rates_from_counts(conf)
    return float(pr[1] * r[1, 1] - p / (1 - p) * pr[0] * r[0, 1])


def decision_report(conf: ConfusionCounts, cost=None, priors=None, *, beta: float = 1.0,
                    p: float = 0.5) -> list[MetricReport]:
    """Standard report for hard decisions.

    EC and NEC for ``cost`` (0-1 by default), the error rates when the table is
    square, and for binary tables F-beta, MCC, LR+ and net benefit with their
    naive references where one exists.
    """
    pr = _priors_for(conf, priors)
    cost = zero_one_cost(conf.num_classes) if cost is None else as_cost(cost)
    ec = expected_cost(conf, cost, pr)
    naive, _ = naive_ec(cost, pr)
    out = [MetricReport.normalized_by_naive("EC", ec, naive)]
    if conf.num_classes == conf.num_decisions:
        emp = empirical_priors(conf)
        out.append(MetricReport.normalized_by_naive(
            "ER", error_rate(conf), naive_ec(zero_one_cost(conf.num_classes), emp)[0]))
        out.append(MetricReport.normalized_by_naive(
            "BalER", balanced_error_rate(conf), naive_ec(balanced_cost(emp), emp)[0]))
    if conf.shape == (2, 2):
        out.append(MetricReport(f"F{beta:g}", f_beta(conf, beta), naive_f_beta(pr, beta)))
        try:
            out.append(MetricReport("MCC", mcc(conf), 0.0))
        except ValueError:
            out.append(MetricReport("MCC", math.nan, 0.0))
        try:
            out.append(MetricReport("LR+", lr_plus(conf), 1.0))
        except ValueError:
            out.append(MetricReport("LR+", math.nan, 1.0))
        nb_naive = max(0.0, pr.values[1] - p / (1 - p) * pr.values[0])
        out.append(MetricReport(f"NB@{p:g}", net_benefit(conf, p, pr), nb_naive))
        out.append(MetricReport(f"NEC@NB{p:g}", normalized_ec(conf, net_benefit_cost(p), pr)))
    return out
