"""Builders for the reference tables and figure data.

Every builder returns a :class:`Table`: header comment lines, column names and
rows. Tables 1-2 and fig2 are closed-form functions of confusion counts;
tables 3-5 and fig3 come from a fresh simulated suite whose parameters are
echoed in the comments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bayes import bayes_decide, llr_bayes_threshold, posteriors_from_llr, threshold_decide
from .calibration import crossval_calibrate, min_ec_threshold
from .discrimination import ece_multiclass
from .metrics import expected_cost, f_beta, mcc, naive_ec, normalized_ec
from .scoring import brier, cross_entropy
from .simulation import TABLES_STD, SimulationSpec, build_suite
from .types import (
    ConfusionCounts,
    Priors,
    abstain_cost,
    confusion_from_pairs,
    fbeta_cost,
    zero_one_cost,
)

__all__ = [
    "Table",
    "binary_counts",
    "decision_row",
    "table1",
    "table2",
    "fig2",
    "table3",
    "table4",
    "table5",
    "table4_from",
    "table5_from",
    "multiclass_spec",
    "multiclass_systems",
    "bayes_vs_optimal_nec",
    "fig3",
    "sweep_metrics",
    "SWEEP_METRICS",
    "TARGETS",
    "ABSTAIN_ALPHAS",
]

DECISION_COLUMNS = ["N21", "N12", "NECu", "NECbO", "NECbT", "F1", "MCC", "R21", "R12", "R*2", "R*1"]

TABLE1_ROWS = [(0, 50), (25, 25), (50, 0), (0, 250), (125, 125), (250, 0),
               (0, 450), (225, 225), (450, 0)]
TABLE2_ROWS = [(0, 90), (5, 45), (10, 0), (0, 450), (25, 225), (50, 0),
               (0, 810), (40, 450), (90, 0), (0, 90), (45, 45), (90, 0)]

ABSTAIN_ALPHAS = (0.01, 0.1, 0.2, 0.4, 0.6, 1.0)
BINARY_PRIORS = (0.9, 0.1)
SIM_N = 100000
MULTICLASS_K = 10
MULTICLASS_ABSTAIN = 0.1


@dataclass
class Table:
    columns: list
    rows: list
    comments: list = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def binary_counts(n1: int, n2: int, n21: int, n12: int) -> ConfusionCounts:
    """Confusion table from class totals and the two error counts."""
    return ConfusionCounts([[n1 - n12, n12], [n21, n2 - n21]])


def _nec_triplet(conf: ConfusionCounts, priors) -> tuple[float, float, float]:
    necu = normalized_ec(conf, zero_one_cost(2), Priors.uniform(2))
    necbo = normalized_ec(conf, fbeta_cost(1.0), priors)
    necbt = normalized_ec(conf, fbeta_cost(beta_squared=2.0), priors)
    return necu, necbo, necbt


def decision_row(n1: int, n2: int, n21: int, n12: int) -> list:
    conf = binary_counts(n1, n2, n21, n12)
    pr = Priors([n1 / (n1 + n2), n2 / (n1 + n2)])
    necu, necbo, necbt = _nec_triplet(conf, pr)
    try:
        m = mcc(conf)
    except ValueError:
        m = math.nan
    n = n1 + n2
    detected2 = n12 + (n2 - n21)
    return [n21, n12, necu, necbo, necbt, f_beta(conf, 1.0), m,
            n21 / n2, n12 / n1, detected2 / n, 1 - detected2 / n]


def _decision_table(n1, n2, pairs, title) -> Table:
    rows = [decision_row(n1, n2, n21, n12) for n21, n12 in pairs]
    return Table(list(DECISION_COLUMNS), rows, [f"{title}: N1*={n1} N2*={n2}"])


def table1() -> Table:
    return _decision_table(500, 500, TABLE1_ROWS, "table1")


def table2() -> Table:
    return _decision_table(900, 100, TABLE2_ROWS, "table2")


def fig2(steps: int = 20) -> Table:
    """Metric scatter data: ``N12`` and ``N21`` each over ``steps + 1`` evenly spaced counts."""
    rows = []
    for n1, n2 in ((500, 500), (900, 100)):
        for a in range(steps + 1):
            n12 = n1 * a // steps
            for b in range(steps + 1):
                n21 = n2 * b // steps
                rows.append([f"P1={n1 / (n1 + n2):g}"] + decision_row(n1, n2, n21, n12))
    return Table(["dataset"] + list(DECISION_COLUMNS), rows,
                 [f"fig2: {steps + 1}x{steps + 1} grid of (N12, N21) per dataset"])


def _spec_comment(spec: SimulationSpec) -> str:
    pr = ",".join(format(float(p), ".17g") for p in spec.priors.values)
    return f"spec: K={spec.K} N={spec.N} priors={pr} std={spec.std!r} seed={spec.seed}"


def _binary_spec(seed: int, std: float | None, n: int) -> SimulationSpec:
    return SimulationSpec(2, n, BINARY_PRIORS, std=TABLES_STD if std is None else std, seed=seed)


def multiclass_spec(seed: int = 0, std: float | None = None, n: int = SIM_N,
                    k: int = MULTICLASS_K) -> SimulationSpec:
    p = np.full(k, 0.1 / (k - 1))
    p[0] = 0.9
    return SimulationSpec(k, n, p / p.sum(), std=TABLES_STD if std is None else std, seed=seed)


def table3(seed: int = 0, std: float | None = None, n: int = SIM_N, alphas=ABSTAIN_ALPHAS) -> Table:
    """EC, NEC and abstention percentage of Bayes decisions with an abstain option."""
    spec = _binary_spec(seed, std, n)
    suite = build_suite(spec)
    y = suite.labels
    post = {tag: posteriors_from_llr(suite[f"LR-{tag}"], spec.priors) for tag in ("mc1", "cal")}
    rows = []
    for a in alphas:
        cost = abstain_cost(2, a)
        row = [a]
        for tag in ("mc1", "cal"):
            d = bayes_decide(post[tag], cost)
            conf = confusion_from_pairs(y, d, 3)
            ec = expected_cost(conf, cost, spec.priors)
            naive = naive_ec(cost, spec.priors)[0]
            row += [ec, ec / naive, 100.0 * float(np.mean(d.values == 2))]
        rows.append(row)
    cols = ["alpha", "mc1_EC", "mc1_NEC", "mc1_Abs", "cal_EC", "cal_NEC", "cal_Abs"]
    return Table(cols, rows, ["table3: Bayes decisions with abstention, LR-mc1 and LR-cal",
                              _spec_comment(spec)])


def multiclass_systems(spec: SimulationSpec, folds: int = 5):
    """Raw, temperature-scaled and affine-calibrated posteriors for each member."""
    suite = build_suite(spec)
    y = suite.labels
    out = {}
    for block in ("Datap", "Mismp"):
        for col in ("cal", "mc1", "mc2"):
            s = suite[f"{block}-{col}"]
            out[(block, col)] = s
            out[(f"{block}-temcal", col)] = crossval_calibrate(s, y, folds, "temperature")
            out[(f"{block}-affcal", col)] = crossval_calibrate(s, y, folds, "affine")
    return suite, out


ROW_NAMES = ("Datap", "Datap-temcal", "Datap-affcal", "Mismp", "Mismp-temcal", "Mismp-affcal")
COLS = ("cal", "mc1", "mc2")


def table4_from(spec, suite, systems) -> Table:
    y = suite.labels
    k = spec.K
    c01 = zero_one_cost(k)
    cabs = abstain_cost(k, MULTICLASS_ABSTAIN)
    rows = []
    for r in ROW_NAMES:
        vals = {}
        for c in COLS:
            s = systems[(r, c)]
            vals[("NEC", c)] = normalized_ec(confusion_from_pairs(y, bayes_decide(s, c01), k), c01, spec.priors)
            vals[("NECabs", c)] = normalized_ec(
                confusion_from_pairs(y, bayes_decide(s, cabs), k + 1), cabs, spec.priors)
            vals[("XE", c)] = cross_entropy(s, y, spec.priors).normalized
            vals[("Brier", c)] = brier(s, y, spec.priors).normalized
        rows.append([r] + [vals[(m, c)] for m in ("NEC", "NECabs", "XE", "Brier") for c in COLS])
    cols = ["system"] + [f"{m}_{c}" for m in ("NEC", "NECabs", "XE", "Brier") for c in COLS]
    return Table(cols, rows, ["table4: normalized EC, EC with abstention, XE and Brier",
                              _spec_comment(spec)])


def table5_from(spec, suite, systems) -> Table:
    y = suite.labels
    rows = []
    for r in ROW_NAMES:
        block = r.split("-")[0]
        vals = {}
        for c in COLS:
            s = systems[(r, c)]
            ref = systems[(f"{block}-affcal", c)]
            for name, fn in (("XE", cross_entropy), ("Brier", brier)):
                raw = fn(s, y, spec.priors).raw
                emin = fn(ref, y, spec.priors).raw
                vals[(name, c)] = 100.0 * (raw - emin) / raw
            vals[("ECEmc", c)] = 100.0 * ece_multiclass(s, y, 15)
        rows.append([r] + [vals[(m, c)] for m in ("XE", "Brier", "ECEmc") for c in COLS])
    cols = ["system"] + [f"{m}_{c}" for m in ("XE_calloss", "Brier_calloss", "ECEmc") for c in COLS]
    return Table(cols, rows, ["table5: relative calibration loss (%) and ECEmc (%, 15 bins)",
                              _spec_comment(spec)])


def table4(seed: int = 0, std: float | None = None, n: int = SIM_N) -> Table:
    spec = multiclass_spec(seed, std, n)
    return table4_from(spec, *multiclass_systems(spec))


def table5(seed: int = 0, std: float | None = None, n: int = SIM_N) -> Table:
    spec = multiclass_spec(seed, std, n)
    return table5_from(spec, *multiclass_systems(spec))


# Threshold sweeps on binary LLRs

SWEEP_METRICS = ("necu", "necbo", "necbt", "f1")


def _metric_setup(metric: str, priors: Priors):
    if metric == "necu":
        return zero_one_cost(2), Priors.uniform(2)
    if metric == "necbo":
        return fbeta_cost(1.0), priors
    if metric == "necbt":
        return fbeta_cost(beta_squared=2.0), priors
    raise ValueError(f"unknown sweep metric {metric!r}; expected one of {SWEEP_METRICS}")


def _metric_at(metric: str, llr, labels, t: float, priors: Priors) -> float:
    conf = confusion_from_pairs(labels, threshold_decide(llr, t), 2)
    if metric == "f1":
        return f_beta(conf, 1.0)
    cost, pr = _metric_setup(metric, priors)
    return normalized_ec(conf, cost, pr)


def sweep_metrics(llr, labels, grid, metrics=SWEEP_METRICS, priors=None):
    """Metric values on a threshold grid plus the Bayes and best thresholds.

    Returns ``(rows, marks)``: ``rows`` holds ``(metric, threshold, value,
    is_best)`` per grid point and metric; ``marks`` holds, per metric, the
    Bayes LLR threshold with its value (NEC metrics only) and the best grid
    threshold. F1 is maximized; the NECs are minimized.
    """
    llr = np.asarray(llr, dtype=float).ravel()
    lab = labels
    counts = np.bincount(np.asarray(lab.values), minlength=2)
    pr = Priors(counts / counts.sum()) if priors is None else priors
    grid = np.asarray(grid, dtype=float)
    rows, marks = [], []
    for m in metrics:
        vals = np.array([_metric_at(m, llr, lab, t, pr) for t in grid])
        best = int(np.argmax(vals) if m == "f1" else np.argmin(vals))
        for i, (t, v) in enumerate(zip(grid, vals)):
            rows.append((m, float(t), float(v), int(i == best)))
        mark = {"metric": m, "best_threshold": float(grid[best]), "best_value": float(vals[best])}
        if m != "f1":
            cost, mpr = _metric_setup(m, pr)
            tb = llr_bayes_threshold(cost, mpr)
            mark["bayes_threshold"] = tb
            mark["bayes_value"] = _metric_at(m, llr, lab, tb, pr)
        marks.append(mark)
    return rows, marks


def bayes_vs_optimal_nec(llr, labels, metric: str, priors: Priors) -> tuple[float, float]:
    """NEC at the Bayes LLR threshold and the minimum NEC over all thresholds."""
    cost, pr = _metric_setup(metric, priors)
    res = min_ec_threshold(llr, labels, cost, pr, bayes_threshold=llr_bayes_threshold(cost, pr))
    naive = naive_ec(cost, pr)[0]
    return res.bayes_ec / naive, res.min_ec / naive


def fig3(seed: int = 0, std: float | None = None, n: int = SIM_N, grid=None) -> Table:
    spec = _binary_spec(seed, std, n)
    suite = build_suite(spec)
    grid = np.linspace(-5.0, 5.0, 201) if grid is None else grid
    rows, comments = [], ["fig3: NECu, NECbO, NECbT and F1 versus the LLR threshold",
                          _spec_comment(spec)]
    for tag in ("LR-mc1", "LR-cal"):
        r, marks = sweep_metrics(suite[tag].values[:, 0], suite.labels, grid, priors=spec.priors)
        rows += [[tag, *row] for row in r]
        for mk in marks:
            comments.append(f"{tag} " + " ".join(f"{k}={_fmt(v)}" for k, v in mk.items()))
    return Table(["scores", "metric", "threshold", "value", "is_best"], rows, comments)


def _fmt(v) -> str:
    return format(v, ".17g") if isinstance(v, float) else str(v)


TARGETS = {
    "table1": table1,
    "table2": table2,
    "table3": table3,
    "table4": table4,
    "table5": table5,
    "fig2": fig2,
    "fig3": fig3,
}
