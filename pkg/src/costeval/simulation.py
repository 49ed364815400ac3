"""Synthetic Gaussian score suites with controlled miscalibration.

Class ``i`` (0-based) draws unidimensional features from ``N(i, std^2)``.
From one feature draw the suite derives posteriors computed with the data
priors (``Datap``) or with mismatched priors (``Mismp``), each either
calibrated, shifted and scaled in the log-likelihood domain (``mc1``), or
scaled in the log-posterior domain (``mc2``). Binary suites also carry the
calibrated and ``mc1`` log-likelihood ratios.

Random streams
--------------
``numpy.random.SeedSequence(seed).spawn(K + 1)`` yields one PCG64 stream per
class (features of class ``i`` come from child ``i``) and a final child that
drives the shuffle permutation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bayes import POSTERIOR_FLOOR, posteriors_from_log_likelihoods
from .types import Labels, Priors, ScoreMatrix, as_priors

__all__ = [
    "SimulationSpec",
    "ScoreSuite",
    "TABLES_STD",
    "class_counts",
    "generate",
    "true_log_likelihoods",
    "miscalibrate_mc1",
    "miscalibrate_mc2",
    "mismatched_priors",
    "build_suite",
    "export_suite",
]

# Standard deviation at which the simulated error levels line up with the
# reference tables (a variance of 0.15); the SimulationSpec default stays 0.15.
TABLES_STD = math.sqrt(0.15)

MC1_SCALE = 0.5
MC1_SHIFT = 0.5
MC2_SCALE = 0.2


@dataclass(frozen=True)
class SimulationSpec:
    """Parameters of one simulated dataset.

    Parameters
    ----------
    K : int
        Number of classes; class ``i`` has mean ``i``.
    N : int
        Total number of samples.
    priors : Priors
        Class priors used both to size the classes and as the data priors.
    std : float
        Common class-conditional standard deviation.
    seed : int
        Root seed of the random streams.
    """

    K: int
    N: int
    priors: Priors
    std: float = 0.15
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "priors", as_priors(self.priors))
        if self.K < 2:
            raise ValueError(f"K must be >= 2, got {self.K}")
        if self.N < self.K:
            raise ValueError(f"N must be >= K, got N={self.N}, K={self.K}")
        if not self.std > 0:
            raise ValueError(f"std must be positive, got {self.std}")
        if len(self.priors) != self.K:
            raise ValueError(f"{len(self.priors)} priors for K={self.K}")

    @property
    def means(self) -> np.ndarray:
        return np.arange(self.K, dtype=float)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "N": self.N,
            "priors": [float(p) for p in self.priors.values],
            "std": float(self.std),
            "seed": int(self.seed),
        }


@dataclass(frozen=True)
class ScoreSuite:
    """Named score sets derived from a single feature draw."""

    spec: SimulationSpec
    labels: Labels
    features: np.ndarray
    members: dict = field(default_factory=dict)
    mismatched_priors: Priors | None = None

    def __getitem__(self, name: str) -> ScoreMatrix:
        return self.members[name]

    def names(self) -> list[str]:
        return list(self.members)


def class_counts(priors, n: int) -> np.ndarray:
    """Largest-remainder rounding of ``P_i N`` so the counts sum to ``n``."""
    p = as_priors(priors).values
    raw = p * n
    counts = np.floor(raw).astype(np.int64)
    short = n - int(counts.sum())
    # the largest fractional parts get the remaining samples, ties to lower index
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def generate(spec: SimulationSpec) -> tuple[np.ndarray, Labels]:
    """Draw features class by class, then apply a seeded shuffle."""
    counts = class_counts(spec.priors, spec.N)
    children = np.random.SeedSequence(spec.seed).spawn(spec.K + 1)
    feats = []
    for i, n_i in enumerate(counts):
        rng = np.random.Generator(np.random.PCG64(children[i]))
        feats.append(rng.normal(loc=float(i), scale=spec.std, size=int(n_i)))
    x = np.concatenate(feats)
    y = np.repeat(np.arange(spec.K), counts)
    perm = np.random.Generator(np.random.PCG64(children[spec.K])).permutation(spec.N)
    return x[perm], Labels(y[perm], spec.K)


def true_log_likelihoods(features, spec: SimulationSpec) -> ScoreMatrix:
    """Gaussian log-densities of every feature under every class."""
    x = np.asarray(features, dtype=float).reshape(-1, 1)
    z = (x - spec.means[None, :]) / spec.std
    ll = -0.5 * z**2 - math.log(spec.std) - 0.5 * math.log(2 * math.pi)
    return ScoreMatrix(ll, "log_likelihood")


def miscalibrate_mc1(ll) -> ScoreMatrix:
    """Scale log-likelihoods by 0.5 and shift the first class by 0.5."""
    v = ll.values if isinstance(ll, ScoreMatrix) else np.asarray(ll, dtype=float)
    out = MC1_SCALE * v
    out[:, 0] += MC1_SHIFT
    return ScoreMatrix(out, "log_likelihood")


def miscalibrate_mc2(post) -> ScoreMatrix:
    """Scale log-posteriors by 0.2 and renormalize each row."""
    v = post.values if isinstance(post, ScoreMatrix) else np.asarray(post, dtype=float)
    z = MC2_SCALE * np.log(np.clip(v, POSTERIOR_FLOOR, 1.0))
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return ScoreMatrix(e / e.sum(axis=1, keepdims=True), "posterior")


def mismatched_priors(k: int) -> Priors:
    """0.9 on the last class and ``0.1/(K-1)`` on each of the others."""
    p = np.full(k, 0.1 / (k - 1))
    p[-1] = 0.9
    return Priors(p / p.sum())


def build_suite(spec: SimulationSpec, mismatched=None) -> ScoreSuite:
    """Generate a dataset and every derived score set.

    Members are ``Datap-cal``, ``Datap-mc1``, ``Datap-mc2`` and their ``Mismp``
    counterparts; binary specs add ``LR-cal`` and ``LR-mc1``.
    """
    x, y = generate(spec)
    ll = true_log_likelihoods(x, spec)
    ll1 = miscalibrate_mc1(ll)
    mism = mismatched_priors(spec.K) if mismatched is None else as_priors(mismatched)
    members = {}
    for tag, pr in (("Datap", spec.priors), ("Mismp", mism)):
        cal = posteriors_from_log_likelihoods(ll, pr)
        members[f"{tag}-cal"] = cal
        members[f"{tag}-mc1"] = posteriors_from_log_likelihoods(ll1, pr)
        members[f"{tag}-mc2"] = miscalibrate_mc2(cal)
    if spec.K == 2:
        members["LR-cal"] = ScoreMatrix(ll.values[:, 1] - ll.values[:, 0], "binary_llr")
        members["LR-mc1"] = ScoreMatrix(ll1.values[:, 1] - ll1.values[:, 0], "binary_llr")
    return ScoreSuite(spec, y, x, members, mism)


def _score_header(s: ScoreMatrix) -> list[str]:
    if s.kind == "binary_llr":
        return ["llr"]
    prefix = "s" if s.kind == "posterior" else "ll"
    return [f"{prefix}{i + 1}" for i in range(s.values.shape[1])]


def write_scores_csv(path, s: ScoreMatrix) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(_score_header(s)) + "\n")
        for row in s.values:
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")


def write_labels_csv(path, labels: Labels) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("label\n")
        fh.write("".join(f"{int(v)}\n" for v in labels.values))


def export_suite(suite: ScoreSuite, directory) -> Path:
    """Write one score CSV per member, a labels CSV and ``manifest.json``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_labels_csv(d / "labels.csv", suite.labels)
    files = {}
    for name, s in suite.members.items():
        fname = f"{name}.csv"
        write_scores_csv(d / fname, s)
        files[name] = fname
    manifest = {
        "spec": suite.spec.to_dict(),
        "mismatched_priors": [float(p) for p in suite.mismatched_priors.values],
        "labels": "labels.csv",
        "members": files,
    }
    path = d / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
