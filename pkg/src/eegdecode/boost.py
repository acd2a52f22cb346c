"""Decision stumps boosted over 64-d latent vectors.

Weak learner: an exhaustive weighted-error search over every feature,
every midpoint of consecutive sorted unique values, and both polarities.
Ties break deterministically toward the lowest feature index, then the
lowest threshold, then polarity +1; error comparisons use a small
epsilon so an independently coded reference lands on the same stump.

Boosting uses the two-class multiclass-exponential parameterization:
alpha = ln((1 - err) / err), misclassified weights scaled by e^alpha and
renormalized each round. A zero-error round gets a capped alpha of 20
and ends training; a round with err >= 0.5 ends training without
appending.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import Degenerate
from .validation import check_labels, check_weights

ALPHA_CAP = 20.0
TIE_EPS = 1e-12


@dataclass(frozen=True)
class Stump:
    """h(x) = 1 when polarity * (x[feature] - threshold) > 0 else 0."""
    feature: int
    threshold: float
    polarity: int  # +1 | -1

    def predict(self, X):
        v = np.asarray(X)[..., self.feature]
        return (self.polarity * (v - self.threshold) > 0).astype(np.int64)


def _candidate_errors(X, y, w, f):
    """Weighted errors for every (midpoint threshold, polarity) of one
    feature, via prefix sums over the sorted column. Returns
    (thresholds, err_plus, err_minus) or None when unsplittable."""
    order = np.argsort(X[:, f], kind="stable")
    xs = X[order, f]
    w_pos = np.where(y[order] == 1, w[order], 0.0)
    w_neg = np.where(y[order] == 0, w[order], 0.0)
    cum_pos = np.cumsum(w_pos)
    cum_neg = np.cumsum(w_neg)
    distinct = np.flatnonzero(np.diff(xs) != 0)
    if len(distinct) == 0:
        return None
    thr = (xs[distinct] + xs[distinct + 1]) / 2.0
    # cut after sorted position i: polarity +1 predicts 1 for x > thr,
    # so mistakes are positives at <= i plus negatives at > i.
    err_plus = cum_pos[distinct] + (cum_neg[-1] - cum_neg[distinct])
    err_minus = cum_neg[distinct] + (cum_pos[-1] - cum_pos[distinct])
    return thr, err_plus, err_minus


def train_stump(X, y, w):
    """Exhaustive weighted 0/1-error minimization. Returns (Stump, err).

    Candidate thresholds are midpoints of consecutive sorted unique
    feature values. The chosen stump is the earliest candidate in
    (feature asc, threshold asc, polarity +1 first) order whose error
    lies within TIE_EPS of the global minimum — a selection rule an
    independent implementation can reproduce exactly. Raises Degenerate
    when only one class is present.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    y = check_labels(y, n)
    w = check_weights(w, n)
    if len(np.unique(y)) < 2:
        raise Degenerate("all labels equal; a stump cannot improve")

    per_feature = [_candidate_errors(X, y, w, f) for f in range(d)]
    minima = [min(ep.min(), em.min()) for cand in per_feature if cand
              for ep, em in [(cand[1], cand[2])]]
    if not minima:
        raise Degenerate("no splittable feature (all values identical)")
    global_min = min(minima)

    for f in range(d):
        cand = per_feature[f]
        if cand is None:
            continue
        thr, err_plus, err_minus = cand
        flat = np.empty(2 * len(thr))
        flat[0::2] = err_plus
        flat[1::2] = err_minus
        hits = np.flatnonzero(flat <= global_min + TIE_EPS)
        if len(hits):
            i = int(hits[0])
            stump = Stump(feature=f, threshold=float(thr[i // 2]),
                          polarity=1 if i % 2 == 0 else -1)
            return stump, float(max(flat[i], 0.0))
    raise Degenerate("unreachable: no candidate at the global minimum")


@dataclass
class BoostMeta:
    weighted_errors: list = field(default_factory=list)
    train01_errors: list = field(default_factory=list)
    stopped_early: bool = False


class AdaBoostStumps(BaseEstimator, ClassifierMixin):
    """Boosted decision stumps with signed-margin prediction.

    predict_margin returns sum(alpha_t * (2 h_t(x) - 1)) / sum(alpha_t)
    in [-1, 1]; a zero sum predicts rest (label 0) for safety.
    """

    def __init__(self, n_rounds=200):
        self.n_rounds = n_rounds

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        n = X.shape[0]
        y = check_labels(y, n)
        if len(np.unique(y)) < 2:
            raise Degenerate("training set needs both classes")

        w = np.full(n, 1.0 / n)
        stumps, alphas = [], []
        meta = BoostMeta()
        score = np.zeros(n)
        for _ in range(self.n_rounds):
            stump, err = train_stump(X, y, w)
            if err >= 0.5:
                meta.stopped_early = True
                break
            if err <= 0.0:
                alpha = ALPHA_CAP
            else:
                alpha = float(np.log((1.0 - err) / err))
            stumps.append(stump)
            alphas.append(alpha)
            meta.weighted_errors.append(err)
            h = stump.predict(X)
            score += alpha * (2.0 * h - 1.0)
            pred = (score > 0).astype(np.int64)
            meta.train01_errors.append(float((pred != y).mean()))
            if err <= 0.0:
                meta.stopped_early = True
                break
            w = w * np.exp(alpha * (h != y))
            w = w / w.sum()

        self.stumps_ = stumps
        self.alphas_ = np.asarray(alphas)
        self.meta_ = meta
        return self

    def decision_scores(self, X):
        """Unnormalized sum(alpha_t * (2 h_t - 1)) per row."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        score = np.zeros(X.shape[0])
        for stump, alpha in zip(self.stumps_, self.alphas_):
            score += alpha * (2.0 * stump.predict(X) - 1.0)
        return score

    def predict_margin(self, X):
        """(labels, margins) with margins normalized to [-1, 1]."""
        score = self.decision_scores(X)
        total = self.alphas_.sum()
        margin = score / total if total > 0 else np.zeros_like(score)
        labels = (score > 0).astype(np.int64)  # ties -> rest
        return labels, margin

    def predict(self, X):
        return self.predict_margin(X)[0]

    def predict_one(self, x):
        labels, margins = self.predict_margin(np.asarray(x)[None, :])
        return int(labels[0]), float(margins[0])


def exponential_bound(weighted_errors):
    """Running product of 2 sqrt(err (1 - err)): the classic upper bound
    on boosted training error."""
    errs = np.asarray(weighted_errors, dtype=np.float64)
    terms = 2.0 * np.sqrt(np.clip(errs * (1.0 - errs), 0.0, None))
    return np.cumprod(terms)


def select_rounds_cv(X, y, grid=(50, 100, 200, 400), n_folds=3, seed=0):
    """Pick the boosting round count by seeded k-fold CV on training data
    only. Ties prefer fewer rounds."""
    X = np.asarray(X, dtype=np.float64)
    y = check_labels(y, len(X))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(y))
    folds = np.array_split(order, n_folds)
    best_t, best_acc = None, -1.0
    for t in sorted(grid):
        accs = []
        for i in range(n_folds):
            test_ids = folds[i]
            train_ids = np.concatenate([folds[j] for j in range(n_folds) if j != i])
            if len(np.unique(y[train_ids])) < 2 or len(test_ids) == 0:
                continue
            model = AdaBoostStumps(n_rounds=t).fit(X[train_ids], y[train_ids])
            accs.append(float((model.predict(X[test_ids]) == y[test_ids]).mean()))
        acc = float(np.mean(accs)) if accs else -1.0
        if acc > best_acc + 1e-12:
            best_t, best_acc = t, acc
    return best_t, best_acc
