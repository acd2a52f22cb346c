import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eegdecode.baselines import ShrinkageLda, make_tree_baseline
from eegdecode.boost import AdaBoostStumps
from eegdecode.errors import Degenerate, EmptyInput, SingleSubject, Singular
from eegdecode.evaluate import (EvalReport, bootstrap_f1_ci, evaluate, loso_folds,
                                majority_vote_trials, project_latents_2d,
                                wilson_interval)


class TestShrinkageLda:
    def test_symmetric_1d_boundary_at_zero(self):
        rng = np.random.default_rng(0)
        X = np.concatenate([rng.normal(-1, 0.5, 400), rng.normal(1, 0.5, 400)])[:, None]
        y = np.array([0] * 400 + [1] * 400)
        lda = ShrinkageLda(shrinkage=0.0).fit(X, y)
        boundary = -lda.intercept_ / lda.coef_[0]
        assert abs(boundary) < 0.1

    def test_gamma_one_is_nearest_mean(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((200, 6))
        y = (X[:, 0] + 0.2 * rng.standard_normal(200) > 0).astype(int)
        lda = ShrinkageLda(shrinkage=1.0).fit(X, y)
        mu0, mu1 = lda.means_
        # nearest-class-mean rule with equal priors term
        pred_nm = (np.linalg.norm(X - mu1, axis=1) ** 2
                   < np.linalg.norm(X - mu0, axis=1) ** 2
                   - 2 * lda.coef_ @ np.zeros(6)).astype(int)
        # decision_function sign must match nearest-mean up to the prior offset
        w_expected = (mu1 - mu0)
        cos = w_expected @ lda.coef_ / (np.linalg.norm(w_expected) * np.linalg.norm(lda.coef_))
        assert cos > 0.999999

    def test_singular_with_zero_shrinkage(self):
        X = np.zeros((40, 4))
        X[:, 0] = np.arange(40)
        X[:, 1] = X[:, 0] * 2.0  # exactly collinear
        y = (np.arange(40) > 20).astype(int)
        with pytest.raises(Singular):
            ShrinkageLda(shrinkage=0.0).fit(X, y)

    def test_degenerate(self):
        with pytest.raises(Degenerate):
            ShrinkageLda().fit(np.random.default_rng(2).standard_normal((10, 3)),
                               np.zeros(10, dtype=int))

    def test_close_to_adaboost_on_gaussian_benchmark(self):
        rng = np.random.default_rng(3)
        shift = rng.standard_normal(16) * 0.8
        X = np.vstack([rng.standard_normal((150, 16)),
                       rng.standard_normal((150, 16)) + shift])
        y = np.array([0] * 150 + [1] * 150)
        Xt = np.vstack([rng.standard_normal((100, 16)),
                        rng.standard_normal((100, 16)) + shift])
        yt = np.array([0] * 100 + [1] * 100)
        boost_acc = (AdaBoostStumps(n_rounds=60).fit(X, y).predict(Xt) == yt).mean()
        lda_acc = (ShrinkageLda(0.1).fit(X, y).predict(Xt) == yt).mean()
        assert abs(boost_acc - lda_acc) <= 0.05

    def test_tree_baseline_runs(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((100, 8))
        y = (X[:, 0] > 0).astype(int)
        tree = make_tree_baseline(seed=0).fit(X, y)
        assert (tree.predict(X) == y).mean() > 0.9


class TestWilson:
    def test_spec_example_86_of_100(self):
        lo, hi = wilson_interval(86, 100)
        assert lo == pytest.approx(0.778, abs=1e-3)
        assert hi == pytest.approx(0.914, abs=1e-3)

    def test_contains_point_estimate(self):
        for k, n in [(0, 10), (5, 10), (10, 10), (86, 100), (1, 2)]:
            lo, hi = wilson_interval(k, n)
            assert lo <= k / n <= hi

    def test_perfect_upper_is_one(self):
        lo, hi = wilson_interval(50, 50)
        assert hi == 1.0
        assert lo < 1.0


class TestEvaluate:
    def test_confusion_closed_form(self):
        preds = np.array([1] * 43 + [1] * 7 + [0] * 7 + [0] * 43)
        labels = np.array([1] * 43 + [0] * 7 + [1] * 7 + [0] * 43)
        report = evaluate(preds, labels)
        assert report.accuracy == pytest.approx(0.86)
        assert report.f1 == pytest.approx(0.86)
        assert report.macro_f1 == pytest.approx(0.86)
        assert report.confusion == [[43, 7], [7, 43]]

    def test_perfect(self):
        preds = np.array([0, 1, 0, 1, 1])
        report = evaluate(preds, preds.copy())
        assert report.accuracy == 1.0
        assert report.macro_f1 == 1.0
        assert report.ci95[1] == 1.0

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            evaluate(np.array([]), np.array([]))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        preds = rng.integers(0, 2, 60)
        labels = rng.integers(0, 2, 60)
        a = evaluate(preds, labels)
        perm = rng.permutation(60)
        b = evaluate(preds[perm], labels[perm])
        assert a.accuracy == b.accuracy
        assert a.f1 == b.f1
        assert a.confusion == b.confusion

    def test_trial_majority_vote_and_tie(self):
        preds = np.array([1, 1, 0, 0, 0, 1, 1, 0])
        labels = np.array([1, 1, 1, 0, 0, 0, 1, 1])
        trial_map = np.array([0, 0, 0, 1, 1, 1, 2, 2])
        t_preds, t_labels, ids = majority_vote_trials(preds, labels, trial_map)
        np.testing.assert_array_equal(t_preds, [1, 0, 0])  # trial 2 ties -> rest
        np.testing.assert_array_equal(t_labels, [1, 0, 1])

    def test_trial_level_report(self):
        preds = np.array([1, 1, 1, 0, 0, 0])
        labels = np.array([1, 1, 1, 0, 0, 0])
        report = evaluate(preds, labels, level="trial",
                          trial_map=np.array([0, 0, 0, 1, 1, 1]))
        assert report.n == 2
        assert report.accuracy == 1.0

    def test_json_round_trip(self):
        report = evaluate(np.array([1, 0, 1]), np.array([1, 1, 1]))
        back = EvalReport.from_dict(json.loads(report.to_json()))
        assert back == report

    def test_bootstrap_ci_contains_f1_mostly(self):
        rng = np.random.default_rng(6)
        preds = rng.integers(0, 2, 200)
        labels = np.where(rng.random(200) < 0.8, preds, 1 - preds)
        report = evaluate(preds, labels)
        lo, hi = report.f1_ci95
        assert lo <= report.f1 <= hi
        assert bootstrap_f1_ci(preds, labels, seed=0) == report.f1_ci95


class TestLoso:
    def test_three_subjects(self):
        folds = loso_folds(["A", "B", "C", "A", "B"])
        assert len(folds) == 3
        for train, held in folds:
            assert held not in train
            assert set(train) | {held} == {"A", "B", "C"}

    def test_single_subject(self):
        with pytest.raises(SingleSubject):
            loso_folds(["A", "A"])

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.sampled_from("ABCDEFG"), min_size=2, max_size=40))
    def test_no_leakage_property(self, ids):
        if len(set(ids)) < 2:
            return
        for train, held in loso_folds(ids):
            assert held not in train

    def test_subject_offsets_make_loso_harder(self):
        # feature-space "subjects" with per-subject offsets: shuffled
        # within-subject splits see every subject, LOSO does not
        rng = np.random.default_rng(7)
        shift = np.zeros(8)
        shift[0] = 1.2
        X_parts, y_parts, s_parts = [], [], []
        for s in range(5):
            offset = rng.normal(0, 2.0, 8)  # strong subject signature
            n = 60
            ys = rng.integers(0, 2, n)
            Xs = rng.standard_normal((n, 8)) * 0.7 + offset + np.outer(ys, shift)
            X_parts.append(Xs)
            y_parts.append(ys)
            s_parts.extend([s] * n)
        X = np.vstack(X_parts)
        y = np.concatenate(y_parts)
        subj = np.array(s_parts)

        loso_accs = []
        for train_subjects, held in loso_folds(subj.tolist()):
            m = np.isin(subj, train_subjects)
            model = AdaBoostStumps(n_rounds=40).fit(X[m], y[m])
            loso_accs.append((model.predict(X[~m]) == y[~m]).mean())

        perm = rng.permutation(len(y))
        cut = int(0.8 * len(y))
        tr, te = perm[:cut], perm[cut:]
        model = AdaBoostStumps(n_rounds=40).fit(X[tr], y[tr])
        shuffled_acc = (model.predict(X[te]) == y[te]).mean()
        assert np.mean(loso_accs) <= shuffled_acc


class TestProjection:
    def test_separated_clusters_high_silhouette(self):
        # two isotropic clusters whose centers sit 10 sigma apart
        rng = np.random.default_rng(8)
        a = rng.standard_normal((60, 2))
        b = rng.standard_normal((60, 2))
        b[:, 0] += 10.0
        coords, score = project_latents_2d(np.vstack([a, b]),
                                           np.array([0] * 60 + [1] * 60))
        assert coords.shape == (120, 2)
        assert score > 0.8

    def test_identical_points_across_classes(self):
        X = np.tile(np.ones((1, 5)), (10, 1)) + 1e-12 * np.arange(10)[:, None]
        labels = np.array([0, 1] * 5)
        _, score = project_latents_2d(X, labels)
        assert score <= 0.0

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((50, 12))
        y = rng.integers(0, 2, 50)
        c1, s1 = project_latents_2d(X, y)
        c2, s2 = project_latents_2d(X, y)
        np.testing.assert_array_equal(c1, c2)
        assert s1 == s2
