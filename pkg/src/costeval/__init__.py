"""Cost-sensitive evaluation of classifiers.

Expected cost and the classical decision metrics it generalizes, Bayes
decisions under arbitrary cost matrices, expected proper scoring rules,
calibration transforms and calibration loss, discrimination metrics, and a
synthetic Gaussian benchmark.
"""

from .bayes import (
    BayesDecisionRule,
    bayes_decide,
    binary_bayes_threshold,
    llr_bayes_threshold,
    llr_from_posteriors,
    posteriors_from_llr,
    posteriors_from_log_likelihoods,
    threshold_decide,
)
from .calibration import (
    AffineCalibrator,
    CalLossReport,
    HistogramBinningCalibrator,
    apply_affine,
    calibration_loss,
    crossval_calibrate,
    fit_affine,
    fit_histogram_binning,
    min_ec_threshold,
    threshold_sweep,
)
from .discrimination import (
    auc,
    auc_pr,
    ece_binary,
    ece_multiclass,
    eer,
    nec_for_target_sensitivity,
    pr_curve,
    roc_curve,
)
from .metrics import (
    MetricReport,
    balanced_error_rate,
    decision_report,
    error_rate,
    expected_cost,
    f_beta,
    lr_plus,
    mcc,
    naive_ec,
    naive_f_beta,
    net_benefit,
    normalized_ec,
)
from .scoring import EpsrResult, bayes_ec_epsr, brier, cross_entropy
from .simulation import ScoreSuite, SimulationSpec, build_suite, generate
from .types import (
    ConfusionCounts,
    CostMatrix,
    Decisions,
    Labels,
    Priors,
    ScoreMatrix,
    abstain_cost,
    alpha_cost,
    balanced_cost,
    confusion_from_pairs,
    fbeta_cost,
    net_benefit_cost,
    zero_one_cost,
)

__all__ = [
    "BayesDecisionRule",
    "bayes_decide",
    "binary_bayes_threshold",
    "llr_bayes_threshold",
    "llr_from_posteriors",
    "posteriors_from_llr",
    "posteriors_from_log_likelihoods",
    "threshold_decide",
    "AffineCalibrator",
    "CalLossReport",
    "HistogramBinningCalibrator",
    "apply_affine",
    "calibration_loss",
    "crossval_calibrate",
    "fit_affine",
    "fit_histogram_binning",
    "min_ec_threshold",
    "threshold_sweep",
    "auc",
    "auc_pr",
    "ece_binary",
    "ece_multiclass",
    "eer",
    "nec_for_target_sensitivity",
    "pr_curve",
    "roc_curve",
    "MetricReport",
    "balanced_error_rate",
    "decision_report",
    "error_rate",
    "expected_cost",
    "f_beta",
    "lr_plus",
    "mcc",
    "naive_ec",
    "naive_f_beta",
    "net_benefit",
    "normalized_ec",
    "ConfusionCounts",
    "CostMatrix",
    "Decisions",
    "Labels",
    "Priors",
    "ScoreMatrix",
    "abstain_cost",
    "alpha_cost",
    "balanced_cost",
    "confusion_from_pairs",
    "fbeta_cost",
    "net_benefit_cost",
    "zero_one_cost",
    "EpsrResult",
    "bayes_ec_epsr",
    "brier",
    "cross_entropy",
    "ScoreSuite",
    "SimulationSpec",
    "build_suite",
    "generate",
]

__version__ = "0.1.0"
