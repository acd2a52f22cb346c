import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eegdecode.boost import AdaBoostStumps, Stump
from eegdecode.cae import init_params
from eegdecode.pipeline import ModelBundle


@pytest.fixture(scope="session")
def toy_bundle():
    """Untrained encoder + handcrafted stumps: enough structure to
    exercise every decode path without a training run."""
    params = init_params(seed=21, dtype=np.float32)
    clf = AdaBoostStumps(n_rounds=3)
    clf.stumps_ = [Stump(feature=0, threshold=0.0, polarity=1),
                   Stump(feature=7, threshold=0.1, polarity=-1),
                   Stump(feature=33, threshold=-0.2, polarity=1)]
    clf.alphas_ = np.array([1.0, 0.7, 0.4])
    clf.meta_ = None
    return ModelBundle(cae=params, classifier=clf)


@pytest.fixture(scope="session")
def synth_recordings():
    """Small deterministic dataset shared across pipeline-level tests."""
    from eegdecode.synth import SynthConfig, generate_synthetic
    cfg = SynthConfig(n_subjects=3, trials_per_subject=8, seed=17)
    return generate_synthetic(cfg)
