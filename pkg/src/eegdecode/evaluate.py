"""Evaluation harness: window- and trial-level metrics with confidence
intervals, leave-one-subject-out folds, and the 2-D latent-separability
diagnostic."""

import json
from dataclasses import dataclass, asdict

import numpy as np
from sklearn.metrics import silhouette_score

from .errors import EmptyInput, SingleSubject

REPORT_SCHEMA = "eegdecode.eval-report/1"
_Z95 = 1.959963984540054


def wilson_interval(successes, n, z=_Z95):
    """Wilson score 95% interval for a binomial proportion."""
    if n == 0:
        raise EmptyInput("no observations")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)  # exact endpoints
    return lo, hi


def _f1(tp, fp, fn):
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom > 0 else 0.0


def confusion_counts(preds, labels):
    """2x2 counts [[TN, FP], [FN, TP]]."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    tp = int(np.sum((preds == 1) & (labels == 1)))
    tn = int(np.sum((preds == 0) & (labels == 0)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    return [[tn, fp], [fn, tp]]


def bootstrap_f1_ci(preds, labels, n_resamples=1000, seed=0):
    """Percentile bootstrap 95% CI for move-class F1."""
    rng = np.random.default_rng(seed)
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    n = len(preds)
    stats = np.empty(n_resamples)
    for i in range(n_resamples):
        ids = rng.integers(0, n, size=n)
        (tn, fp), (fn, tp) = confusion_counts(preds[ids], labels[ids])
        stats[i] = _f1(tp, fp, fn)
    return float(np.percentile(stats, 2.5)), float(np.percentile(stats, 97.5))


@dataclass
class EvalReport:
    level: str                       # "window" | "trial"
    n: int
    accuracy: float
    f1: float                        # move-class F1
    macro_f1: float
    ci95: tuple                      # Wilson interval on accuracy
    f1_ci95: tuple                   # bootstrap interval on F1
    confusion: list                  # [[TN, FP], [FN, TP]]
    per_fold: list = None            # optional per-fold dicts
    latency: dict = None             # optional reference to LatencyStats

    def to_dict(self):
        d = asdict(self)
        d["schema"] = REPORT_SCHEMA
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.pop("schema", REPORT_SCHEMA) != REPORT_SCHEMA:
            raise ValueError("unknown report schema")
        d["ci95"] = tuple(d["ci95"])
        d["f1_ci95"] = tuple(d["f1_ci95"])
        return cls(**d)


def majority_vote_trials(preds, labels, trial_map):
    """Collapse window predictions to per-trial ones by majority vote
    (ties predict rest). Trial label = majority of its window labels."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    trial_map = np.asarray(trial_map)
    trial_ids = sorted(set(trial_map.tolist()))
    t_preds, t_labels = [], []
    for tid in trial_ids:
        mask = trial_map == tid
        votes = preds[mask]
        move_votes = int((votes == 1).sum())
        t_preds.append(1 if move_votes * 2 > len(votes) else 0)
        lab = labels[mask]
        t_labels.append(1 if int((lab == 1).sum()) * 2 > len(lab) else 0)
    return np.asarray(t_preds), np.asarray(t_labels), trial_ids


def evaluate(preds, labels, level="window", trial_map=None, bootstrap_seed=0):
    """Build an EvalReport at window or trial level."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if len(preds) == 0 or len(preds) != len(labels):
        raise EmptyInput(f"got {len(preds)} predictions / {len(labels)} labels")
    if level == "trial":
        if trial_map is None:
            raise ValueError("trial level needs a trial_map")
        preds, labels, _ = majority_vote_trials(preds, labels, trial_map)
    elif level != "window":
        raise ValueError(f"unknown level {level!r}")

    n = len(preds)
    (tn, fp), (fn, tp) = confusion_counts(preds, labels)
    accuracy = (tp + tn) / n
    f1_move = _f1(tp, fp, fn)
    f1_rest = _f1(tn, fn, fp)
    return EvalReport(
        level=level, n=n, accuracy=float(accuracy), f1=float(f1_move),
        macro_f1=float((f1_move + f1_rest) / 2.0),
        ci95=wilson_interval(tp + tn, n),
        f1_ci95=bootstrap_f1_ci(preds, labels, seed=bootstrap_seed),
        confusion=[[tn, fp], [fn, tp]],
    )


def loso_folds(subject_ids):
    """One fold per subject: (sorted train subjects, held-out subject).

    Nothing from the held-out subject — including augmented copies,
    which inherit their source window's subject — may enter training."""
    subjects = sorted(set(subject_ids))
    if len(subjects) < 2:
        raise SingleSubject(f"need >= 2 subjects, got {subjects}")
    return [([s for s in subjects if s != held], held) for held in subjects]


def project_latents_2d(latents, labels):
    """PCA to 2 components plus a silhouette separation score.

    Deterministic: component signs follow the largest-|loading| rule.
    Returns (coords [n, 2], score)."""
    X = np.asarray(latents, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3:
        raise ValueError("need >= 3 points of shape [n, d]")
    labels = np.asarray(labels)
    Xc = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    comps = vt[:2]
    signs = np.sign(comps[np.arange(2), np.argmax(np.abs(comps), axis=1)])
    signs[signs == 0] = 1.0
    coords = Xc @ (comps * signs[:, None]).T
    if len(set(labels.tolist())) < 2:
        score = 0.0
    else:
        score = float(silhouette_score(coords, labels))
    return coords, score
