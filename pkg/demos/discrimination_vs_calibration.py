"""AUC and EER ignore calibration; ECE and the Bayes EC do not."""

from costeval import (
    SimulationSpec,
    auc,
    build_suite,
    ece_binary,
    eer,
    min_ec_threshold,
    posteriors_from_llr,
    roc_curve,
    zero_one_cost,
)
from costeval.simulation import TABLES_STD

spec = SimulationSpec(2, 50000, [0.9, 0.1], std=TABLES_STD, seed=3)
suite = build_suite(spec)
y = suite.labels

for tag in ("LR-cal", "LR-mc1"):
    llr = suite[tag].values[:, 0]
    post2 = posteriors_from_llr(llr, spec.priors).values[:, 1]
    curve = roc_curve(llr, y)
    res = min_ec_threshold(post2, y, zero_one_cost(2))
    print(f"{tag}: AUC {auc(curve):.4f}  EER {eer(curve):.4f}  ECE {ece_binary(post2, y):.4f}  "
          f"Bayes-threshold EC {res.bayes_ec:.4f}  best EC {res.min_ec:.4f}")

