"""Command-line front end.

File formats
------------
scores
    CSV whose header selects the kind: ``s1,...,sK`` (posteriors),
    ``ll1,...,llK`` (log-likelihoods) or ``llr`` (binary log-likelihood ratio).
labels / decisions
    CSV with the single header ``label`` / ``decision``; 0-based integers.
cost
    A preset (``zero-one``, ``balanced``, ``fbeta:<beta>``, ``fbeta_sq:<beta^2>``,
    ``abstain:<alpha>``, ``nb:<p>``) or a JSON file ``{"costs": [[...]],
    "decision_names": [...]}``.
priors
    ``--priors 0.9,0.1``.

Errors are reported on stderr as one line ``costeval: error[<kind>]: <message>``
with exit status 2 for usage errors and 1 for everything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bayes import posteriors_from_llr, posteriors_from_log_likelihoods, llr_from_posteriors
from .calibration import calibration_loss, calibrator_to_text, fit_calibrator
from .discrimination import auc, ece_binary, ece_multiclass, eer, roc_curve
from .metrics import decision_report
from .reproduce import SWEEP_METRICS, TARGETS, sweep_metrics
from .scoring import bayes_ec_epsr, brier, cross_entropy
from .simulation import SimulationSpec, build_suite, export_suite
from .types import (
    CostMatrix,
    Labels,
    Priors,
    ScoreMatrix,
    abstain_cost,
    balanced_cost,
    confusion_from_pairs,
    fbeta_cost,
    net_benefit_cost,
    zero_one_cost,
)

SEED_ENV = "COSTEVAL_SEED"
REPORT_DIGITS = 6
GOLDEN_DIGITS = 17


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


# Parsing


def _read_rows(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError("io", f"{path}: {exc.strerror}") from None
    lines = [(n, ln) for n, ln in enumerate(text.splitlines(), 1) if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise CliError("parse", f"{path}: empty file")
    header = [h.strip() for h in lines[0][1].split(",")]
    return header, lines[1:]


def _parse_int_column(path, name: str) -> np.ndarray:
    header, rows = _read_rows(path)
    if header != [name]:
        raise CliError("parse", f"{path}:1: expected header {name!r}, got {','.join(header)!r}")
    out = []
    for n, ln in rows:
        try:
            v = int(ln.strip())
        except ValueError:
            raise CliError("parse", f"{path}:{n}: not an integer: {ln.strip()!r}") from None
        if v < 0:
            raise CliError("parse", f"{path}:{n}: negative index {v}")
        out.append(v)
    if not out:
        raise CliError("value", f"{path}: no samples")
    return np.array(out, dtype=np.int64)


def _score_kind(header, path) -> str:
    if header == ["llr"]:
        return "binary_llr"
    for prefix, kind in (("s", "posterior"), ("ll", "log_likelihood")):
        if header == [f"{prefix}{i + 1}" for i in range(len(header))] and len(header) >= 2:
            return kind
    raise CliError("parse", f"{path}:1: unrecognized score header {','.join(header)!r}; "
                            "expected s1..sK, ll1..llK or llr")


def read_scores(path) -> ScoreMatrix:
    header, rows = _read_rows(path)
    kind = _score_kind(header, path)
    vals = []
    for n, ln in rows:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise CliError("parse", f"{path}:{n}: expected {len(header)} fields, got {len(parts)}")
        try:
            vals.append([float(p) for p in parts])
        except ValueError:
            raise CliError("parse", f"{path}:{n}: non-numeric field in {ln.strip()!r}") from None
    if not vals:
        raise CliError("value", f"{path}: no samples")
    try:
        return ScoreMatrix(np.array(vals), kind)
    except ValueError as exc:
        raise CliError("value", f"{path}: {exc}") from None


def read_labels(path, num_classes: int | None = None) -> Labels:
    v = _parse_int_column(path, "label")
    k = num_classes if num_classes is not None else max(2, int(v.max()) + 1)
    if v.max() >= k:
        raise CliError("value", f"{path}: label {int(v.max())} out of range for {k} classes")
    return Labels(v, k)


def parse_priors(text: str | None, k: int | None = None) -> Priors | None:
    if text is None:
        return None
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise CliError("usage", f"--priors: not a comma-separated list of numbers: {text!r}") from None
    if k is not None and len(vals) != k:
        raise CliError("value", f"--priors has {len(vals)} values but the data has {k} classes")
    try:
        return Priors(vals)
    except ValueError as exc:
        raise CliError("value", f"--priors: {exc}") from None


def _preset_arg(spec: str, name: str) -> float:
    try:
        return float(spec.split(":", 1)[1])
    except (IndexError, ValueError):
        raise CliError("usage", f"--cost {spec!r}: {name} preset needs a numeric argument") from None


def parse_cost(spec: str | None, k: int, priors: Priors) -> CostMatrix:
    """Resolve a preset name or a JSON cost file."""
    if spec is None or spec == "zero-one":
        return zero_one_cost(k)
    if spec == "balanced":
        return balanced_cost(priors)
    if spec.split(":")[0] in ("fbeta", "fbeta_sq", "nb"):
        kind = spec.split(":")[0]
        if k != 2:
            raise CliError("value", f"--cost {kind} is binary-only but the data has {k} classes")
        x = _preset_arg(spec, kind)
        if kind == "fbeta":
            return fbeta_cost(x)
        if kind == "fbeta_sq":
            return fbeta_cost(beta_squared=x)
        return net_benefit_cost(x)
    if spec.startswith("abstain:"):
        return abstain_cost(k, _preset_arg(spec, "abstain"))
    path = Path(spec)
    if not path.exists():
        raise CliError("usage", f"--cost {spec!r} is neither a preset nor an existing file")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError("parse", f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "costs" not in doc:
        raise CliError("parse", f"{path}: expected an object with a 'costs' field")
    try:
        cost = CostMatrix(doc["costs"], tuple(doc.get("decision_names", ())))
    except (ValueError, TypeError) as exc:
        raise CliError("value", f"{path}: {exc}") from None
    if cost.num_classes != k:
        raise CliError("value", f"{path}: cost matrix has {cost.num_classes} rows but the data has {k} classes")
    return cost


def _empirical(labels: Labels) -> Priors:
    counts = labels.class_counts()
    if np.any(counts == 0):
        absent = int(np.flatnonzero(counts == 0)[0])
        raise CliError("value", f"class {absent} has no samples; pass --priors explicitly")
    return Priors(counts / counts.sum())


# Output


def _num(v, digits: int):
    if v is None:
        return None
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(format(v, f".{digits}g"))


def _cell(v, digits: int) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, f".{digits}g")


def render_table(columns, rows, fmt: str, digits: int, comments=()) -> str:
    if fmt == "json":
        doc = {"comments": list(comments),
               "rows": [{c: (_num(v, digits) if not isinstance(v, str) else v)
                         for c, v in zip(columns, r)} for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v, digits) for v in r])
    return buf.getvalue()


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


REPORT_COLUMNS = ["metric", "value", "naive", "normalized"]


# Commands


def cmd_eval_decisions(args) -> int:
    dec = _parse_int_column(args.decisions, "decision")
    lab = read_labels(args.labels)
    if dec.size != len(lab):
        raise CliError("value", f"{len(lab)} labels but {dec.size} decisions")
    k = lab.num_classes
    if args.swap_classes:
        if k != 2:
            raise CliError("value", f"--swap-classes is binary-only but the data has {k} classes")
        lab = Labels(1 - lab.values, 2)
        dec = np.where(dec < 2, 1 - dec, dec)
    pr = parse_priors(args.priors, k) or _empirical(lab)
    cost = parse_cost(args.cost, k, pr)
    if k != 2:
        for flag, metric in ((args.beta, "F-beta"), (args.nb_p, "net benefit")):
            if flag is not None:
                raise CliError("value", f"{metric} is a binary-only metric but the data has {k} classes")
    if dec.max() >= cost.num_decisions:
        raise CliError("value", f"decision {int(dec.max())} out of range for {cost.num_decisions} decisions")
    conf = confusion_from_pairs(lab, dec, cost.num_decisions)
    reps = decision_report(conf, cost, pr, beta=1.0 if args.beta is None else args.beta,
                           p=0.5 if args.nb_p is None else args.nb_p)
    rows = [[r.name, r.value, r.naive_value, r.normalized] for r in reps]
    _emit(render_table(REPORT_COLUMNS, rows, args.format, args.digits), args.output)
    return 0


def _posteriors_for(scores: ScoreMatrix, priors: Priors) -> ScoreMatrix:
    if scores.kind == "posterior":
        return scores
    if scores.kind == "log_likelihood":
        return posteriors_from_log_likelihoods(scores, priors)
    return posteriors_from_llr(scores, priors)


def cmd_eval_scores(args) -> int:
    scores = read_scores(args.scores)
    lab = read_labels(args.labels, scores.num_classes)
    if len(lab) != scores.num_samples:
        raise CliError("value", f"{scores.num_samples} score rows but {len(lab)} labels")
    k = scores.num_classes
    explicit = parse_priors(args.priors, k)
    pr = explicit or _empirical(lab)
    post = _posteriors_for(scores, pr)
    cost = parse_cost(args.cost, k, pr)
    rows = []
    for name, res in (("XE", cross_entropy(post, lab, explicit)),
                      ("Brier", brier(post, lab, explicit)),
                      ("BayesEC", bayes_ec_epsr(post, lab, cost, explicit))):
        rows.append([name, res.raw, res.naive, res.normalized])
    rows.append([f"ECEmc@{args.bins}", ece_multiclass(post, lab, args.bins), None, None])
    if k == 2:
        s2 = post.values[:, 1]
        rows.append([f"ECE@{args.bins}", ece_binary(s2, lab, args.bins), None, None])
        curve = roc_curve(s2, lab)
        rows.append(["AUC", auc(curve), 0.5, None])
        rows.append(["EER", eer(curve), None, None])
    for kind in ("xe", "brier", "bayes_ec"):
        rep = calibration_loss(post, lab, kind, args.calibration, args.folds, explicit,
                               cost=cost, bins=args.bins)
        tag = {"xe": "XE", "brier": "Brier", "bayes_ec": "BayesEC"}[kind]
        rows.append([f"CalLoss[{tag}].raw", rep.epsr_raw, None, None])
        rows.append([f"CalLoss[{tag}].emin", rep.epsr_emin, None, None])
        rows.append([f"CalLoss[{tag}].loss", rep.cal_loss, None, None])
        rows.append([f"CalLoss[{tag}].rel_pct", rep.rel_cal_loss_pct, None, None])
    _emit(render_table(REPORT_COLUMNS, rows, args.format, args.digits), args.output)
    return 0


def _parse_grid(text: str | None, llr: np.ndarray) -> np.ndarray:
    if text is None:
        return np.linspace(float(llr.min()), float(llr.max()), 101)
    parts = text.split(":")
    try:
        if len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            return np.array([lo]) if n == 1 else np.linspace(lo, hi, n)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise CliError("usage", f"--grid {text!r}: expected lo:hi:n or a comma-separated list") from None


def cmd_sweep(args) -> int:
    scores = read_scores(args.scores)
    if scores.num_classes != 2:
        raise CliError("value", f"threshold sweeps need binary scores, got {scores.num_classes} classes")
    lab = read_labels(args.labels, 2)
    if len(lab) != scores.num_samples:
        raise CliError("value", f"{scores.num_samples} score rows but {len(lab)} labels")
    pr = parse_priors(args.priors, 2) or _empirical(lab)
    if scores.kind == "binary_llr":
        llr = scores.values[:, 0]
    elif scores.kind == "log_likelihood":
        llr = scores.values[:, 1] - scores.values[:, 0]
    else:
        llr = llr_from_posteriors(scores, pr).values[:, 0]
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = [m for m in metrics if m not in SWEEP_METRICS]
    if bad or not metrics:
        raise CliError("usage", f"--metrics: unknown metric {bad[0] if bad else ''!r}; "
                                f"choose from {','.join(SWEEP_METRICS)}")
    grid = _parse_grid(args.grid, llr)
    rows, marks = sweep_metrics(llr, lab, grid, metrics, pr)
    comments = []
    for mk in marks:
        if "bayes_threshold" in mk:
            comments.append(f"bayes metric={mk['metric']} threshold={_cell(mk['bayes_threshold'], args.digits)} "
                            f"value={_cell(mk['bayes_value'], args.digits)}")
        comments.append(f"best metric={mk['metric']} threshold={_cell(mk['best_threshold'], args.digits)} "
                        f"value={_cell(mk['best_value'], args.digits)}")
    _emit(render_table(["metric", "threshold", "value", "is_best"], [list(r) for r in rows],
                       args.format, args.digits, comments), args.output)
    return 0


def cmd_calibrate(args) -> int:
    scores = read_scores(args.scores)
    lab = read_labels(args.labels, scores.num_classes)
    if len(lab) != scores.num_samples:
        raise CliError("value", f"{scores.num_samples} score rows but {len(lab)} labels")
    pr = parse_priors(args.priors, scores.num_classes)
    post = _posteriors_for(scores, pr or _empirical(lab))
    cal = fit_calibrator(args.method, post, lab, pr, args.bins)
    _emit(calibrator_to_text(cal), args.output)
    if args.transform:
        out = cal.transform(post)
        cols = [f"s{i + 1}" for i in range(out.num_classes)]
        Path(args.transform).write_text(render_table(cols, out.values.tolist(), "csv", GOLDEN_DIGITS))
    return 0


def cmd_simulate(args) -> int:
    k = args.classes
    if args.sim_priors:
        pr = parse_priors(args.sim_priors, k)
    else:
        p = np.full(k, 0.1 / (k - 1))
        p[0] = 0.9
        pr = Priors(p / p.sum())
    try:
        spec = SimulationSpec(k, args.samples, pr, std=args.std, seed=args.seed)
    except ValueError as exc:
        raise CliError("value", str(exc)) from None
    path = export_suite(build_suite(spec), args.outdir)
    sys.stdout.write(f"{path}\n")
    return 0


def cmd_reproduce(args) -> int:
    fn = TARGETS[args.target]
    kwargs = {}
    if args.target in ("table3", "table4", "table5", "fig3"):
        kwargs = {"seed": args.seed, "std": args.std}
        if args.samples is not None:
            kwargs["n"] = args.samples
    table = fn(**kwargs)
    text = render_table(table.columns, table.rows, args.format, GOLDEN_DIGITS, table.comments)
    _emit(text, args.output)
    return 0


# Parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError("usage", f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="costeval", description="Cost-sensitive evaluation of classifier decisions and scores.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, cost=True):
        sp.add_argument("--priors", help="comma-separated class priors (default: empirical)")
        if cost:
            sp.add_argument("--cost", help="cost preset or JSON file (default: zero-one)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--digits", type=int, default=REPORT_DIGITS,
                        help="significant digits in the report (default: %(default)s)")
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")

    sp = sub.add_parser("eval-decisions", help="metrics for hard decisions")
    sp.add_argument("--labels", required=True)
    sp.add_argument("--decisions", required=True)
    sp.add_argument("--beta", type=float, help="F-beta parameter (binary only)")
    sp.add_argument("--nb-p", type=float, help="net-benefit threshold probability (binary only)")
    sp.add_argument("--swap-classes", action="store_true",
                    help="treat class 0 as the class of interest for F-beta, LR+ and NB (binary only)")
    common(sp)
    sp.set_defaults(func=cmd_eval_decisions)

    sp = sub.add_parser("eval-scores", help="EPSRs, calibration loss and discrimination for scores")
    sp.add_argument("--scores", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--bins", type=int, default=15)
    sp.add_argument("--folds", type=int, default=5)
    sp.add_argument("--calibration", choices=("affine", "temperature", "histogram"), default="affine")
    common(sp)
    sp.set_defaults(func=cmd_eval_scores)

    sp = sub.add_parser("sweep", help="NEC and F1 over a grid of LLR thresholds")
    sp.add_argument("--scores", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--metrics", default=",".join(SWEEP_METRICS))
    sp.add_argument("--grid", help="lo:hi:n or comma-separated thresholds (default: 101 points over the LLR range)")
    common(sp, cost=False)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("calibrate", help="train a calibrator on all the data")
    sp.add_argument("--scores", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--method", choices=("affine", "temperature", "histogram"), default="affine")
    sp.add_argument("--bins", type=int, default=15)
    sp.add_argument("--priors")
    sp.add_argument("--transform", help="also write the calibrated posteriors to this CSV")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("simulate", help="export a simulated score suite")
    sp.add_argument("--classes", "-K", type=int, default=2)
    sp.add_argument("--samples", "-N", type=int, default=100000)
    sp.add_argument("--std", type=float, default=0.15)
    sp.add_argument("--priors", dest="sim_priors", help="class priors (default: 0.9 then 0.1/(K-1))")
    sp.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    sp.add_argument("--outdir", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reproduce", help="regenerate a reference table or figure as CSV")
    sp.add_argument("target", choices=sorted(TARGETS))
    sp.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    sp.add_argument("--std", type=float, default=None,
                    help="class standard deviation for simulated targets (default: sqrt(0.15))")
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"costeval: error[{exc.kind}]: {exc}\n")
        return 2 if exc.kind == "usage" else 1
    except ValueError as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"costeval: error[value]: {msg}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
