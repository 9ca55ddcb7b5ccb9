import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pboost import Dataset, RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


def make_blobs(n_pos, n_neg, separation=4.0, seed=0, d=2):
    """Two well-separated Gaussian blobs as a Dataset."""
    gen = np.random.default_rng(seed)
    pos = gen.normal(0.0, 1.0, (n_pos, d))
    neg = gen.normal(separation, 1.0, (n_neg, d))
    features = np.vstack([pos, neg])
    labels = np.concatenate(
        [np.ones(n_pos, dtype=np.int64), -np.ones(n_neg, dtype=np.int64)]
    )
    return Dataset(features, labels)


@pytest.fixture
def blobs():
    return make_blobs(25, 100)
