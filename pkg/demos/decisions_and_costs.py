"""Hard decisions: expected cost next to the classical metrics.

Two systems with the same error rate on an imbalanced set look identical to
ER but differ once the application's costs are spelled out.
"""

from costeval import (
    ConfusionCounts,
    Priors,
    decision_report,
    f_beta,
    fbeta_cost,
    mcc,
    normalized_ec,
    zero_one_cost,
)

# rows are true classes, columns decisions; class 2 is the rare one
misses_rare = ConfusionCounts([[900, 0], [50, 50]])
false_alarms = ConfusionCounts([[850, 50], [0, 100]])

for name, conf in (("misses_rare", misses_rare), ("false_alarms", false_alarms)):
    print(f"\n{name}")
    for rep in decision_report(conf):
        norm = "" if rep.normalized is None else f"  (normalized {rep.normalized:.3f})"
        print(f"  {rep.name:10s} {rep.value:.4f}{norm}")

# a miss costs 10x a false alarm
cost = fbeta_cost(beta_squared=10.0)
for name, conf in (("misses_rare", misses_rare), ("false_alarms", false_alarms)):
    print(f"{name}: NEC with c21=10 -> {normalized_ec(conf, cost):.3f}, "
          f"NECu -> {normalized_ec(conf, zero_one_cost(2), Priors.uniform(2)):.3f}, "
          f"F1 {f_beta(conf):.3f}, MCC {mcc(conf):.3f}")
