"""Offline pipeline: recordings -> cleaned labeled windows -> trained
encoder + boosted classifier, the serialized model bundle, and the
LOSO / holdout evaluation harnesses.

Window extraction slides fully inside each labeled event interval (move
trials and harvested rest intervals), so every window carries a trial
id usable for trial-level scoring. Cleaning order: resample, ICA (on
the unfiltered band so blink energy is still visible to the component
scorer), then the zero-phase 8-40 Hz band-pass.
"""

from dataclasses import dataclass, field

import numpy as np

from . import dataio
from .baselines import ShrinkageLda, make_tree_baseline
from .boost import AdaBoostStumps, select_rounds_cv
from .cae import (DEFAULT_ARCH, CaeParams, TrainConfig, encode, forward_quantized,
                  modelio, normalize_windows, quantize, train_cae)
from .cae.estimator import stratified_split
from .dsp import MONTAGE_12, WINDOW_SAMPLES, TARGET_FS, design_bandpass, apply_filter, \
    resample_recording, select_channels, Recording
from .evaluate import evaluate, loso_folds, project_latents_2d
from .ica import IcaArtifactCleaner

EVAL_SCHEMA = "eegdecode.eval/1"


@dataclass
class PipelineConfig:
    stride: int = 125
    band: tuple = (8.0, 40.0)
    filter_order: int = 4
    use_ica: bool = True
    guard_s: float = 1.0
    balance: bool = True
    val_fraction: float = 0.2
    n_rounds: int = 200
    select_rounds: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0

    def __post_init__(self):
        # the pipeline seed steers every stage, training included
        if self.train.seed != self.seed:
            self.train = TrainConfig(**{**self.train.__dict__, "seed": self.seed})


@dataclass
class WindowSet:
    X: np.ndarray          # [N, 12, 250] microvolts (cleaned)
    y: np.ndarray          # [N] 0 rest / 1 move
    subject: np.ndarray    # [N] subject ids
    trial: np.ndarray      # [N] global trial ids

    def __len__(self):
        return len(self.y)

    def take(self, mask):
        return WindowSet(X=self.X[mask], y=self.y[mask],
                         subject=self.subject[mask], trial=self.trial[mask])


def clean_recording(rec, cfg):
    """Standardize channels, resample to 250 Hz, ICA-clean, band-pass."""
    rec = select_channels(rec, MONTAGE_12)
    rec = resample_recording(rec, TARGET_FS)
    data = rec.data
    if cfg.use_ica:
        cleaner = IcaArtifactCleaner(seed=cfg.seed, fs=TARGET_FS).fit(data)
        data = cleaner.transform(data)
    coeffs = design_bandpass(cfg.band[0], cfg.band[1], cfg.filter_order, TARGET_FS)
    data = apply_filter(coeffs, data, mode="zero_phase")
    return Recording(channels=rec.channels, sample_rate=rec.sample_rate,
                     data=data, events=list(rec.events))


def build_windows(recordings, cfg):
    """(subject_id, Recording) pairs -> labeled WindowSet."""
    xs, ys, subjects, trials = [], [], [], []
    trial_id = 0
    for sid, rec in recordings:
        rec = clean_recording(rec, cfg)
        rec = dataio.add_rest_events(rec, guard_s=cfg.guard_s)
        for ev in sorted(rec.events, key=lambda e: (e.start, e.label)):
            label = 1 if ev.label == "move" else 0
            for start in range(ev.start, ev.end - WINDOW_SAMPLES + 1, cfg.stride):
                xs.append(rec.data[:, start:start + WINDOW_SAMPLES])
                ys.append(label)
                subjects.append(sid)
                trials.append(trial_id)
            trial_id += 1
    if not xs:
        raise ValueError("no full windows could be extracted")
    return WindowSet(X=np.stack(xs), y=np.asarray(ys, dtype=np.int64),
                     subject=np.asarray(subjects), trial=np.asarray(trials))


def balance_windows(ws, seed=0):
    """Subsample the larger class to match the smaller one (seeded)."""
    rng = np.random.default_rng(seed)
    idx0 = np.flatnonzero(ws.y == 0)
    idx1 = np.flatnonzero(ws.y == 1)
    n = min(len(idx0), len(idx1))
    if n == 0:
        raise ValueError("need both classes to balance")
    keep0 = np.sort(rng.choice(idx0, size=n, replace=False))
    keep1 = np.sort(rng.choice(idx1, size=n, replace=False))
    return ws.take(np.sort(np.concatenate([keep0, keep1])))


@dataclass
class ModelBundle:
    """Deployable model: encoder parameters plus the stump ensemble."""
    cae: CaeParams
    classifier: AdaBoostStumps
    quantized: object = None  # QuantizedParams when reduced precision

    def latents_normalized(self, xn):
        """Latents of already-normalized window(s)."""
        if self.quantized is not None:
            return forward_quantized(self.quantized, xn)
        return encode(self.cae, xn)

    def latents(self, X_raw):
        return self.latents_normalized(
            normalize_windows(np.asarray(X_raw)).astype(np.float32))

    def predict_windows(self, X_raw):
        """(labels, margins) for raw microvolt windows."""
        Z = self.latents(X_raw)
        if Z.ndim == 1:
            Z = Z[None]
        return self.classifier.predict_margin(Z)

    def save(self, path):
        tensors = {}
        if self.quantized is not None:
            for name, (data, scale, zp) in self.quantized.tensors.items():
                tensors[name] = (data, scale, zp) if scale is not None else data
            for point, (lo, hi) in self.quantized.act_ranges.items():
                tensors[f"qrange.{point}"] = np.asarray([lo, hi], dtype=np.float32)
            arch = self.quantized.arch
        else:
            tensors.update({n: t for n, t in self.cae.tensors.items()})
            arch = self.cae.arch
        tensors["boost.feature"] = np.asarray(
            [s.feature for s in self.classifier.stumps_], dtype=np.float32)
        tensors["boost.threshold"] = np.asarray(
            [s.threshold for s in self.classifier.stumps_], dtype=np.float32)
        tensors["boost.polarity"] = np.asarray(
            [s.polarity for s in self.classifier.stumps_], dtype=np.float32)
        tensors["boost.alpha"] = self.classifier.alphas_.astype(np.float32)
        return modelio.save_model(path, arch, tensors)

    @classmethod
    def load(cls, path):
        from .boost import Stump
        from .cae.quantize import QuantizedParams

        arch, raw = modelio.load_model(path)
        boost_keys = ("boost.feature", "boost.threshold", "boost.polarity", "boost.alpha")
        stumps = [Stump(feature=int(f), threshold=float(t), polarity=int(p))
                  for f, t, p in zip(raw["boost.feature"][0], raw["boost.threshold"][0],
                                     raw["boost.polarity"][0])]
        clf = AdaBoostStumps(n_rounds=len(stumps))
        clf.stumps_ = stumps
        clf.alphas_ = raw["boost.alpha"][0].astype(np.float64)
        clf.meta_ = None

        qranges = {k[len("qrange."):]: (float(v[0][0]), float(v[0][1]))
                   for k, v in raw.items() if k.startswith("qrange.")}
        net = {k: v for k, v in raw.items()
               if k not in boost_keys and not k.startswith("qrange.")}
        is_quantized = bool(qranges) or any(v[1] is not None for v in net.values()) \
            or any(v[0].dtype == np.float16 for v in net.values())
        if is_quantized:
            mode = "int8" if qranges else "fp16"
            qp = QuantizedParams(mode=mode, arch=arch,
                                 tensors={k: v for k, v in net.items()},
                                 act_ranges=qranges)
            return cls(cae=None, classifier=clf, quantized=qp)
        tensors = {k: v[0].astype(np.float32) for k, v in net.items()}
        return cls(cae=CaeParams(arch=arch, tensors=tensors), classifier=clf)


def train_pipeline(ws, cfg):
    """Train encoder + classifier on a WindowSet; returns
    (ModelBundle, History, info dict)."""
    split = stratified_split(ws.y, cfg.val_fraction, cfg.seed)
    params, history = train_cae(ws.X, ws.y, split, cfg.train)
    Z = encode(params, normalize_windows(ws.X).astype(np.float32))
    n_rounds = cfg.n_rounds
    info = {}
    if cfg.select_rounds:
        n_rounds, cv_acc = select_rounds_cv(Z, ws.y, seed=cfg.seed)
        info["selected_rounds"] = n_rounds
        info["cv_accuracy"] = cv_acc
    clf = AdaBoostStumps(n_rounds=n_rounds).fit(Z, ws.y)
    info["train_windows"] = len(ws)
    info["best_epoch"] = history.best_epoch
    return ModelBundle(cae=params, classifier=clf), history, info


def _fold_eval(bundle, test_ws, bootstrap_seed):
    labels, margins = bundle.predict_windows(test_ws.X)
    window_report = evaluate(labels, test_ws.y, level="window",
                             bootstrap_seed=bootstrap_seed)
    trial_report = evaluate(labels, test_ws.y, level="trial",
                            trial_map=test_ws.trial, bootstrap_seed=bootstrap_seed)
    return labels, margins, window_report, trial_report


def _baseline_accuracies(bundle, train_ws, test_ws, seed):
    Ztr = bundle.latents(train_ws.X)
    Zte = bundle.latents(test_ws.X)
    out = {}
    lda = ShrinkageLda(shrinkage=0.1).fit(Ztr, train_ws.y)
    out["lda"] = float((lda.predict(Zte) == test_ws.y).mean())
    tree = make_tree_baseline(seed=seed).fit(Ztr, train_ws.y)
    out["tree"] = float((tree.predict(Zte) == test_ws.y).mean())
    return out


def _silhouettes(bundle, test_ws):
    Z = bundle.latents(test_ws.X)
    _, latent_sil = project_latents_2d(Z, test_ws.y)
    flat = normalize_windows(test_ws.X).reshape(len(test_ws), -1)
    _, raw_sil = project_latents_2d(flat, test_ws.y)
    return {"latent": latent_sil, "raw": raw_sil}


def evaluate_loso(ws, cfg, with_baselines=True):
    """Leave-one-subject-out: retrains the full pipeline per fold so the
    held-out subject's windows never reach any training stage."""
    folds = loso_folds(ws.subject.tolist())
    fold_docs = []
    pooled_preds, pooled_labels = [], []
    for train_subjects, held_out in folds:
        train_ws = ws.take(np.isin(ws.subject, train_subjects))
        test_ws = ws.take(ws.subject == held_out)
        bundle, _, _ = train_pipeline(train_ws, cfg)
        labels, _, window_report, trial_report = _fold_eval(bundle, test_ws, cfg.seed)
        pooled_preds.append(labels)
        pooled_labels.append(test_ws.y)
        doc = {
            "subject": str(held_out),
            "window": window_report.to_dict(),
            "trial": trial_report.to_dict(),
            "silhouette": _silhouettes(bundle, test_ws),
        }
        if with_baselines:
            doc["baselines"] = _baseline_accuracies(bundle, train_ws, test_ws, cfg.seed)
        fold_docs.append(doc)
    accs = [d["window"]["accuracy"] for d in fold_docs]
    sils = [(d["silhouette"]["latent"], d["silhouette"]["raw"]) for d in fold_docs]
    pooled = evaluate(np.concatenate(pooled_preds), np.concatenate(pooled_labels),
                      level="window", bootstrap_seed=cfg.seed)
    pooled.per_fold = [{"subject": d["subject"],
                        "accuracy": d["window"]["accuracy"],
                        "f1": d["window"]["f1"]} for d in fold_docs]
    return {
        "schema": EVAL_SCHEMA,
        "mode": "loso",
        "folds": fold_docs,
        "pooled_window": pooled.to_dict(),
        "mean_window_accuracy": float(np.mean(accs)),
        "mean_trial_accuracy": float(np.mean([d["trial"]["accuracy"] for d in fold_docs])),
        "mean_silhouette": {
            "latent": float(np.mean([s[0] for s in sils])),
            "raw": float(np.mean([s[1] for s in sils])),
        },
    }


def evaluate_holdout(ws, cfg, test_fraction=0.25, bundle=None, with_baselines=True):
    """Within-subject shuffled split; optionally evaluates a pre-trained
    bundle instead of training one on the train part."""
    train_idx, test_idx = stratified_split(ws.y, test_fraction, cfg.seed)
    train_ws = ws.take(train_idx)
    test_ws = ws.take(test_idx)
    if bundle is None:
        bundle, _, _ = train_pipeline(train_ws, cfg)
    labels, _, window_report, trial_report = _fold_eval(bundle, test_ws, cfg.seed)
    doc = {
        "schema": EVAL_SCHEMA,
        "mode": "holdout",
        "window": window_report.to_dict(),
        "trial": trial_report.to_dict(),
        "silhouette": _silhouettes(bundle, test_ws),
        "mean_window_accuracy": window_report.accuracy,
    }
    if with_baselines:
        doc["baselines"] = _baseline_accuracies(bundle, train_ws, test_ws, cfg.seed)
    return doc


def quantize_bundle(bundle, calibration_ws, mode="int8"):
    """Reduced-precision copy of a float bundle."""
    qp = quantize(bundle.cae, calibration_ws.X, mode=mode)
    return ModelBundle(cae=bundle.cae, classifier=bundle.classifier, quantized=qp)
