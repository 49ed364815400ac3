"""Calibration loss of miscalibrated simulated scores.

The scores are calibrated with cross-validated affine and temperature-only
transforms. The loss is how much of the EPSR each transform removes.
"""

from costeval import SimulationSpec, build_suite, calibration_loss, fit_affine
from costeval.simulation import TABLES_STD

suite = build_suite(SimulationSpec(3, 20000, [0.6, 0.3, 0.1], std=TABLES_STD, seed=1))
y = suite.labels

for name in ("Datap-cal", "Datap-mc1", "Datap-mc2", "Mismp-cal"):
    aff = calibration_loss(suite[name], y, "xe", "affine")
    tem = calibration_loss(suite[name], y, "xe", "temperature")
    print(f"{name:10s} XE {aff.epsr_raw:.4f}  affine loss {aff.rel_cal_loss_pct:6.2f}%  "
          f"temperature loss {tem.rel_cal_loss_pct:6.2f}%")

cal = fit_affine(suite["Datap-mc2"], y)
print(f"affine fit on Datap-mc2: alpha={cal.alpha:.3f} beta={cal.beta.round(3)} "
      f"({cal.n_iter} iterations)")
