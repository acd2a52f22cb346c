"""The learnable pieces follow the sklearn estimator contract, so they
clone and compose with the wider ecosystem."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from eegdecode.baselines import ShrinkageLda
from eegdecode.boost import AdaBoostStumps
from eegdecode.cae import CaeEncoder
from eegdecode.ica import IcaArtifactCleaner

from test_cae import _toy_dataset


@pytest.mark.parametrize("estimator", [
    AdaBoostStumps(n_rounds=7),
    ShrinkageLda(shrinkage=0.3),
    CaeEncoder(max_epochs=2, seed=5),
    IcaArtifactCleaner(k=4, seed=1),
])
def test_clone_round_trips_params(estimator):
    twin = clone(estimator)
    assert twin.get_params() == estimator.get_params()
    assert twin is not estimator


def test_set_params_chains():
    est = AdaBoostStumps().set_params(n_rounds=33)
    assert est.n_rounds == 33
    enc = CaeEncoder().set_params(lam=2.0, max_epochs=1)
    assert enc.lam == 2.0 and enc.max_epochs == 1


def test_encoder_classifier_pipeline():
    X, y = _toy_dataset(n=64, seed=11)
    pipe = Pipeline([
        ("latent", CaeEncoder(max_epochs=6, patience=5, batch_size=16,
                              noise_scale=0.0, channel_dropout=0.0, seed=3)),
        ("clf", AdaBoostStumps(n_rounds=25)),
    ])
    pipe.fit(X, y)
    acc = (pipe.predict(X) == y).mean()
    assert acc >= 0.9
    # transform surface exposes the 64-d latents
    Z = pipe.named_steps["latent"].transform(X)
    assert Z.shape == (64, 64)


def test_ica_cleaner_transform_shape():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((12, 4000)) * np.linspace(1, 3, 12)[:, None]
    cleaner = IcaArtifactCleaner(seed=4, max_iter=50).fit(X)
    out = cleaner.transform(X)
    assert out.shape == X.shape
    assert isinstance(cleaner.rejected_, list)
