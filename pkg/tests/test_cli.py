import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from costeval.cli import main

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return rc, out, err


def _write(path, header, values):
    path.write_text(header + "\n" + "".join(f"{v}\n" for v in values))
    return path


def _report(out):
    return {r["metric"]: r for r in csv.DictReader(io.StringIO(out))}


def test_eval_decisions_reference_row(capsys):
    rc, out, _ = run(capsys, "eval-decisions", "--labels", FIX / "table1_labels.csv",
                     "--decisions", FIX / "table1_decisions.csv")
    assert rc == 0
    rep = _report(out)
    assert rep["EC"]["normalized"] == "0.1"
    assert rep["F1"]["value"] == "0.952381"
    assert rep["MCC"]["value"] == "0.904534"
    assert rep["LR+"]["value"] == "10"


def test_eval_decisions_json_and_priors(capsys):
    rc, out, _ = run(capsys, "eval-decisions", "--labels", FIX / "table1_labels.csv",
                     "--decisions", FIX / "table1_decisions.csv", "--priors", "0.9,0.1",
                     "--cost", "fbeta_sq:2", "--format", "json")
    assert rc == 0
    rows = {r["metric"]: r for r in json.loads(out)["rows"]}
    # R12 = 0.1, R21 = 0: EC = 0.9 * 0.1, naive = min(0.9, 0.2)
    assert rows["EC"]["value"] == pytest.approx(0.09)
    assert rows["EC"]["normalized"] == pytest.approx(0.45)


def test_eval_decisions_swap_classes(capsys):
    args = ["eval-decisions", "--labels", FIX / "table1_labels.csv", "--decisions", FIX / "table1_decisions.csv"]
    _, plain, _ = run(capsys, *args)
    _, swapped, _ = run(capsys, *args, "--swap-classes")
    a, b = _report(plain), _report(swapped)
    assert a["EC"]["value"] == b["EC"]["value"]
    assert a["F1"]["value"] != b["F1"]["value"]
    # class 0 becomes the class of interest: precision 1, recall 0.9
    assert float(b["F1"]["value"]) == pytest.approx(2 * 0.9 / 1.9, rel=1e-5)


def test_eval_decisions_empty_file(tmp_path, capsys):
    lab = _write(tmp_path / "l.csv", "label", [])
    dec = _write(tmp_path / "d.csv", "decision", [])
    rc, _, err = run(capsys, "eval-decisions", "--labels", lab, "--decisions", dec)
    assert rc == 1
    assert err.startswith("costeval: error[") and "no samples" in err


def test_eval_decisions_multiclass_rejects_binary_flags(tmp_path, capsys):
    lab = _write(tmp_path / "l.csv", "label", [0, 1, 2, 2])
    dec = _write(tmp_path / "d.csv", "decision", [0, 1, 2, 1])
    rc, _, err = run(capsys, "eval-decisions", "--labels", lab, "--decisions", dec, "--beta", "2")
    assert rc == 1 and "binary-only" in err
    rc, _, err = run(capsys, "eval-decisions", "--labels", lab, "--decisions", dec, "--swap-classes")
    assert rc == 1 and "binary-only" in err
    rc, out, _ = run(capsys, "eval-decisions", "--labels", lab, "--decisions", dec)
    assert rc == 0 and "F1" not in out


def test_eval_decisions_parse_error_has_line(tmp_path, capsys):
    lab = _write(tmp_path / "l.csv", "label", [0, 1, "x"])
    dec = _write(tmp_path / "d.csv", "decision", [0, 1, 1])
    rc, _, err = run(capsys, "eval-decisions", "--labels", lab, "--decisions", dec)
    assert rc == 1 and "error[parse]" in err and "l.csv:4" in err


def test_missing_file_and_usage_errors(tmp_path, capsys):
    rc, _, err = run(capsys, "eval-decisions", "--labels", tmp_path / "nope.csv", "--decisions", "x")
    assert rc == 1 and "error[io]" in err
    rc, _, err = run(capsys, "eval-decisions")
    assert rc == 2 and "error[usage]" in err
    rc, _, err = run(capsys, "frobnicate")
    assert rc == 2


def test_eval_scores_one_hot_is_zero(tmp_path, capsys):
    s = tmp_path / "s.csv"
    s.write_text("s1,s2\n1,0\n0,1\n1,0\n0,1\n1,0\n0,1\n1,0\n0,1\n1,0\n0,1\n")
    lab = _write(tmp_path / "l.csv", "label", [0, 1] * 5)
    rc, out, _ = run(capsys, "eval-scores", "--scores", s, "--labels", lab, "--folds", "2")
    assert rc == 0
    rep = _report(out)
    for m in ("XE", "Brier", "BayesEC", "ECE@15", "EER"):
        assert float(rep[m]["value"]) == 0.0
    assert rep["AUC"]["value"] == "1"


def test_eval_scores_rejects_bad_row_sums(tmp_path, capsys):
    s = tmp_path / "s.csv"
    s.write_text("s1,s2\n0.5,0.6\n")
    lab = _write(tmp_path / "l.csv", "label", [0])
    rc, _, err = run(capsys, "eval-scores", "--scores", s, "--labels", lab)
    assert rc == 1 and "sums to" in err


def test_eval_scores_report_rows(capsys):
    _, a, _ = run(capsys, "eval-scores", "--scores", FIX / "binary_scores.csv", "--labels", FIX / "binary_labels.csv")
    rep = _report(a)
    assert set(rep) >= {"XE", "Brier", "BayesEC", "ECEmc@15", "AUC", "CalLoss[XE].rel_pct"}
    assert float(rep["CalLoss[XE].loss"]["value"]) > 0


def test_sweep_rows(capsys):
    rc, out, _ = run(capsys, "sweep", "--scores", FIX / "binary_llr.csv", "--labels", FIX / "binary_labels.csv",
                     "--grid=-3:3:7", "--metrics", "necu,f1")
    assert rc == 0
    body = [ln for ln in out.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(body))
    assert len(rows) == 14
    assert sum(r["is_best"] == "1" for r in rows) == 2
    assert any(ln.startswith("# bayes metric=necu threshold=0 ") for ln in out.splitlines())


def test_sweep_single_point_grid_and_bad_metric(capsys):
    rc, out, _ = run(capsys, "sweep", "--scores", FIX / "binary_llr.csv", "--labels", FIX / "binary_labels.csv",
                     "--grid", "0.5", "--metrics", "necbo")
    assert rc == 0
    body = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert len(body) == 2 and body[1].endswith(",1")
    rc, _, err = run(capsys, "sweep", "--scores", FIX / "binary_llr.csv", "--labels", FIX / "binary_labels.csv",
                     "--metrics", "auc")
    assert rc == 2 and "unknown metric" in err


def test_calibrate_writes_model_and_transform(tmp_path, capsys):
    model, post = tmp_path / "cal.txt", tmp_path / "post.csv"
    rc, _, _ = run(capsys, "calibrate", "--scores", FIX / "binary_scores.csv", "--labels", FIX / "binary_labels.csv",
                   "-o", model, "--transform", post)
    assert rc == 0
    assert model.read_text().startswith("kind=affine\nalpha=")
    vals = np.loadtxt(post, delimiter=",", skiprows=1)
    assert vals.shape == (400, 2) and np.allclose(vals.sum(axis=1), 1.0)


def test_simulate_and_seed_env(tmp_path, capsys, monkeypatch):
    rc, out, _ = run(capsys, "simulate", "-K", 3, "-N", 60, "--outdir", tmp_path / "a")
    assert rc == 0 and out.strip().endswith("manifest.json")
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["spec"]["seed"] == 0 and man["spec"]["priors"][0] == pytest.approx(0.9)
    monkeypatch.setenv("COSTEVAL_SEED", "17")
    run(capsys, "simulate", "-K", 3, "-N", 60, "--outdir", tmp_path / "b")
    assert json.loads((tmp_path / "b" / "manifest.json").read_text())["spec"]["seed"] == 17
    monkeypatch.setenv("COSTEVAL_SEED", "abc")
    rc, _, err = run(capsys, "simulate", "-N", 60, "--outdir", tmp_path / "c")
    assert rc == 2 and "COSTEVAL_SEED" in err


def test_reproduce_table1_matches_golden(capsys):
    rc, out, _ = run(capsys, "reproduce", "table1")
    assert rc == 0
    assert out == (Path(__file__).parent / "golden" / "table1.csv").read_text()


def test_reproduce_table3_small(capsys):
    rc, out, _ = run(capsys, "reproduce", "table3", "--samples", 2000, "--seed", 3)
    assert rc == 0
    lines = out.splitlines()
    assert any(ln.startswith("# spec: K=2 N=2000") for ln in lines)
    body = list(csv.DictReader([ln for ln in lines if not ln.startswith("#")]))
    assert body[0].keys() >= {"alpha", "mc1_EC", "cal_Abs"}
