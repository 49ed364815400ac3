"""Shared data model: labels, scores, priors, cost matrices and confusion counts.

All containers are frozen dataclasses wrapping read-only numpy arrays. The
``as_*`` helpers coerce plain array-likes so that the metric functions can be
called either with these types or with raw sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Labels",
    "Decisions",
    "ScoreMatrix",
    "Priors",
    "CostMatrix",
    "ConfusionCounts",
    "SCORE_KINDS",
    "POSTERIOR_ROW_TOL",
    "as_labels",
    "as_decisions",
    "as_scores",
    "as_priors",
    "as_cost",
    "confusion_from_pairs",
    "rates_from_counts",
    "empirical_priors",
    "zero_one_cost",
    "balanced_cost",
    "fbeta_cost",
    "abstain_cost",
    "net_benefit_cost",
    "alpha_cost",
]

SCORE_KINDS = ("posterior", "log_likelihood", "binary_llr")
POSTERIOR_ROW_TOL = 1e-9
PRIOR_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Labels:
    """True class indices in ``0..num_classes-1``."""

    values: np.ndarray
    num_classes: int

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("labels must be a nonempty 1-d sequence")
        if not np.issubdtype(v.dtype, np.integer):
            if not np.all(np.equal(np.mod(v, 1), 0)):
                raise ValueError("labels must be integers")
        v = v.astype(np.int64)
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if v.min() < 0 or v.max() >= self.num_classes:
            raise ValueError(f"label values must lie in [0, {self.num_classes - 1}]")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "num_classes", int(self.num_classes))

    def __len__(self):
        return self.values.size

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.values, minlength=self.num_classes)


@dataclass(frozen=True)
class Decisions:
    """Decision indices in ``0..num_decisions-1``."""

    values: np.ndarray
    num_decisions: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("decisions must be a nonempty 1-d sequence")
        v = v.astype(np.int64)
        if v.min() < 0:
            raise ValueError("decision indices must be non-negative")
        m = self.num_decisions
        if m is not None and v.max() >= m:
            raise ValueError(f"decision index {int(v.max())} >= number of decisions {m}")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class ScoreMatrix:
    """N x K matrix of per-sample scores.

    ``kind`` is one of ``posterior``, ``log_likelihood`` or ``binary_llr``.
    Posterior rows must sum to one within ``POSTERIOR_ROW_TOL``; they are
    renormalized exactly once here. Binary LLRs are stored as a single column.
    """

    values: np.ndarray
    kind: str = "posterior"

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {self.kind!r}; expected one of {SCORE_KINDS}")
        v = np.asarray(self.values, dtype=float)
        if self.kind == "binary_llr" and v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("scores must be a nonempty 2-d array")
        if self.kind == "binary_llr":
            if v.shape[1] != 1:
                raise ValueError("binary_llr scores must have exactly one column")
            if not np.all(np.isfinite(v)):
                raise ValueError("LLR scores must be finite")
        elif self.kind == "log_likelihood":
            if not np.all(np.isfinite(v)):
                raise ValueError("log-likelihood scores must be finite")
        else:
            if np.any(np.isnan(v)) or v.min() < 0.0 or v.max() > 1.0:
                raise ValueError("posterior scores must lie in [0, 1]")
            sums = v.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > POSTERIOR_ROW_TOL)
            if bad.size:
                raise ValueError(
                    f"posterior row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1 "
                    f"(tolerance {POSTERIOR_ROW_TOL})"
                )
            v = v / sums[:, None]
        object.__setattr__(self, "values", _frozen(v))

    @property
    def num_samples(self) -> int:
        return self.values.shape[0]

    @property
    def num_classes(self) -> int:
        return 2 if self.kind == "binary_llr" else self.values.shape[1]

    def __len__(self):
        return self.num_samples


@dataclass(frozen=True)
class Priors:
    """Class prior probabilities, strictly positive and summing to one."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("priors must be a 1-d vector with at least two entries")
        if not np.all(v > 0):
            raise ValueError("priors must be strictly positive")
        if abs(v.sum() - 1.0) > PRIOR_SUM_TOL:
            raise ValueError(f"priors must sum to 1, got {v.sum()!r}")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self):
        return self.values.size

    @classmethod
    def uniform(cls, k: int) -> "Priors":
        return cls(np.full(k, 1.0 / k))


@dataclass(frozen=True)
class CostMatrix:
    """K x M table of non-negative costs ``c[i, j]`` for deciding j on class i."""

    costs: np.ndarray
    decision_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=float)
        if c.ndim != 2:
            raise ValueError("cost matrix must be 2-d")
        if c.shape[0] < 2 or c.shape[1] < 2:
            raise ValueError("cost matrix needs at least two classes and two decisions")
        if not np.all(np.isfinite(c)) or c.min() < 0:
            raise ValueError("costs must be finite and non-negative")
        names = tuple(self.decision_names) or tuple(f"D{j + 1}" for j in range(c.shape[1]))
        if len(names) != c.shape[1]:
            raise ValueError(f"{len(names)} decision names for {c.shape[1]} decisions")
        object.__setattr__(self, "costs", _frozen(c))
        object.__setattr__(self, "decision_names", names)

    @property
    def num_classes(self) -> int:
        return self.costs.shape[0]

    @property
    def num_decisions(self) -> int:
        return self.costs.shape[1]

    def scaled(self, factor: float) -> "CostMatrix":
        return CostMatrix(self.costs * factor, self.decision_names)

    def is_binary_square_zero_diag(self) -> bool:
        c = self.costs
        return c.shape == (2, 2) and c[0, 0] == 0 and c[1, 1] == 0 and c[0, 1] > 0 and c[1, 0] > 0


@dataclass(frozen=True)
class ConfusionCounts:
    """K x M table of counts ``N[i, j]`` of class i samples given decision j."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2:
            raise ValueError("confusion counts must be 2-d")
        if not np.all(np.equal(np.mod(c, 1), 0)) or c.min() < 0:
            raise ValueError("confusion counts must be non-negative integers")
        c = c.astype(np.int64)
        if c.sum() <= 0:
            raise ValueError("confusion counts must contain at least one sample")
        object.__setattr__(self, "counts", _frozen(c))

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def num_decisions(self) -> int:
        return self.counts.shape[1]


def as_labels(x, num_classes: int | None = None) -> Labels:
    if isinstance(x, Labels):
        if num_classes is not None and num_classes != x.num_classes:
            if x.values.max() >= num_classes:
                raise ValueError("labels exceed the expected number of classes")
            return Labels(x.values, num_classes)
        return x
    v = np.asarray(x)
    if num_classes is None:
        num_classes = max(2, int(v.max()) + 1) if v.size else 2
    return Labels(v, num_classes)


def as_decisions(x, num_decisions: int | None = None) -> Decisions:
    if isinstance(x, Decisions):
        if num_decisions is not None and x.num_decisions != num_decisions:
            return Decisions(x.values, num_decisions)
        return x
    return Decisions(np.asarray(x), num_decisions)


def as_scores(x, kind: str = "posterior") -> ScoreMatrix:
    if isinstance(x, ScoreMatrix):
        return x
    return ScoreMatrix(np.asarray(x, dtype=float), kind)


def as_priors(x) -> Priors | None:
    if x is None or isinstance(x, Priors):
        return x
    return Priors(np.asarray(x, dtype=float))


def as_cost(x) -> CostMatrix:
    if isinstance(x, CostMatrix):
        return x
    return CostMatrix(np.asarray(x, dtype=float))


def confusion_from_pairs(labels, decisions, num_decisions: int) -> ConfusionCounts:
    """Count samples for every (class, decision) combination."""
    labels = as_labels(labels)
    decisions = as_decisions(decisions, num_decisions)
    if len(labels) != len(decisions):
        raise ValueError(f"{len(labels)} labels but {len(decisions)} decisions")
    k = labels.num_classes
    flat = labels.values * num_decisions + decisions.values
    counts = np.bincount(flat, minlength=k * num_decisions).reshape(k, num_decisions)
    return ConfusionCounts(counts)


def rates_from_counts(conf: ConfusionCounts) -> np.ndarray:
    """Row-normalized rates ``R[i, j] = N[i, j] / N[i, *]``."""
    rows = conf.row_totals
    empty = np.flatnonzero(rows == 0)
    if empty.size:
        raise ValueError(f"class {int(empty[0])} has no samples; its rates are undefined")
    return conf.counts / rows[:, None]


def empirical_priors(conf: ConfusionCounts) -> Priors:
    rows = conf.row_totals
    empty = np.flatnonzero(rows == 0)
    if empty.size:
        raise ValueError(f"class {int(empty[0])} has no samples; empirical prior would be 0")
    return Priors(rows / conf.total)


# Cost presets

def zero_one_cost(k: int = 2) -> CostMatrix:
    return CostMatrix(1.0 - np.eye(k), tuple(f"H{i + 1}" for i in range(k)))


def balanced_cost(priors) -> CostMatrix:
    """Off-diagonal costs ``1 / (K P_i)``; its EC is the balanced error rate."""
    p = as_priors(priors).values
    k = p.size
    c = (1.0 - np.eye(k)) / (k * p[:, None])
    return CostMatrix(c, tuple(f"H{i + 1}" for i in range(k)))


def fbeta_cost(beta: float | None = None, *, beta_squared: float | None = None) -> CostMatrix:
    """Binary cost with ``c12 = 1`` and ``c21 = beta**2`` (class index 1 is of interest)."""
    if (beta is None) == (beta_squared is None):
        raise ValueError("give exactly one of beta or beta_squared")
    b2 = beta * beta if beta_squared is None else beta_squared
    if b2 <= 0:
        raise ValueError("beta must be positive")
    return CostMatrix([[0.0, 1.0], [b2, 0.0]], ("H1", "H2"))


def abstain_cost(k: int = 2, alpha: float = 0.1) -> CostMatrix:
    """0-1 cost plus an extra ``abstain`` decision costing ``alpha`` for every class."""
    if alpha < 0:
        raise ValueError("abstention cost must be non-negative")
    c = np.hstack([1.0 - np.eye(k), np.full((k, 1), float(alpha))])
    return CostMatrix(c, tuple(f"H{i + 1}" for i in range(k)) + ("abstain",))


def net_benefit_cost(p: float) -> CostMatrix:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return CostMatrix([[0.0, p / (1.0 - p)], [1.0, 0.0]], ("H1", "H2"))


def alpha_cost(alpha: float, priors) -> CostMatrix:
    """Binary cost whose normalized EC is parameterized by ``alpha = c12 P1 / (c21 P2)``.

    Uses ``c21 = 1`` and ``c12 = alpha P2 / P1``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    p = as_priors(priors).values
    return CostMatrix([[0.0, alpha * p[1] / p[0]], [1.0, 0.0]], ("H1", "H2"))
