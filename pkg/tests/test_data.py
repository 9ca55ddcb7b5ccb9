import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pboost import Dataset, RngStream, normalize_weights, stratified_kfold, subsample_to_skew
from pboost.data import round_half_up
from pboost.errors import AllZeroWeights, InsufficientNegatives, TooFewSamples

from conftest import make_blobs


class TestNormalizeWeights:
    def test_symmetric(self):
        assert np.allclose(normalize_weights([2.0, 2.0]), [0.5, 0.5])

    def test_ratio(self):
        assert np.allclose(normalize_weights([1.0, 3.0]), [0.25, 0.75])

    def test_all_zero(self):
        with pytest.raises(AllZeroWeights):
            normalize_weights([0.0, 0.0])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            normalize_weights([0.5, -0.1])

    @settings(max_examples=1000, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=1, max_size=40).filter(
            lambda w: sum(w) > 0
        )
    )
    def test_sums_to_one_and_preserves_ratios(self, w):
        out = normalize_weights(np.array(w))
        assert abs(out.sum() - 1.0) < 1e-9
        w = np.array(w)
        positive = w > 0
        if positive.sum() >= 2:
            i, j = np.flatnonzero(positive)[:2]
            assert out[i] * w[j] == pytest.approx(out[j] * w[i], rel=1e-9)


class TestStratifiedKfold:
    def test_balanced_divisible(self):
        data = make_blobs(10, 10)
        folds = stratified_kfold(data, 5, RngStream(0))
        for _, held in folds:
            labels = data.labels[held]
            assert (labels == 1).sum() == 2 and (labels == -1).sum() == 2

    def test_imbalanced_divisible(self):
        data = make_blobs(10, 90)
        folds = stratified_kfold(data, 5, RngStream(0))
        for _, held in folds:
            labels = data.labels[held]
            assert (labels == 1).sum() == 2 and (labels == -1).sum() == 18

    def test_too_few_positives(self):
        data = make_blobs(3, 100)
        with pytest.raises(TooFewSamples):
            stratified_kfold(data, 5, RngStream(0))

    @settings(max_examples=1000, deadline=None)
    @given(
        n_pos=st.integers(min_value=2, max_value=30),
        n_neg=st.integers(min_value=2, max_value=60),
        k=st.integers(min_value=2, max_value=6),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_exact_partition_and_ratio(self, n_pos, n_neg, k, seed):
        if n_pos < k or n_neg < k:
            return
        data = make_blobs(n_pos, n_neg, seed=seed % 7)
        folds = stratified_kfold(data, k, RngStream(seed))
        held_all = np.concatenate([held for _, held in folds])
        assert np.array_equal(np.sort(held_all), np.arange(data.m))
        for train, held in folds:
            assert np.intersect1d(train, held).size == 0
            assert np.array_equal(
                np.sort(np.concatenate([train, held])), np.arange(data.m)
            )
            pos_in_fold = (data.labels[held] == 1).sum()
            assert abs(pos_in_fold - n_pos / k) < 1.0 + 1e-9

    def test_deterministic(self):
        data = make_blobs(8, 20)
        a = stratified_kfold(data, 4, RngStream(9))
        b = stratified_kfold(data, 4, RngStream(9))
        for (ta, ha), (tb, hb) in zip(a, b):
            assert np.array_equal(ta, tb) and np.array_equal(ha, hb)


class TestSubsampleToSkew:
    def test_one_to_one(self):
        data = make_blobs(100, 10000)
        out = subsample_to_skew(data, 1.0, RngStream(0))
        assert out.m_pos == 100 and out.m_neg == 100

    def test_exact_boundary(self):
        data = make_blobs(100, 10000)
        out = subsample_to_skew(data, 100.0, RngStream(0))
        assert out.m_pos == 100 and out.m_neg == 10000

    def test_insufficient(self):
        data = make_blobs(100, 5000)
        with pytest.raises(InsufficientNegatives):
            subsample_to_skew(data, 100.0, RngStream(0))

    def test_idempotent_counts(self):
        data = make_blobs(40, 900)
        once = subsample_to_skew(data, 10.0, RngStream(1))
        twice = subsample_to_skew(once, 10.0, RngStream(2))
        assert (once.m_pos, once.m_neg) == (twice.m_pos, twice.m_neg) == (40, 400)

    def test_group_ids_preserved(self):
        gen = np.random.default_rng(0)
        data = Dataset(
            gen.normal(size=(30, 2)),
            np.concatenate([np.ones(10, int), -np.ones(20, int)]),
            np.arange(30),
        )
        out = subsample_to_skew(data, 1.0, RngStream(3))
        assert out.group_ids is not None
        # group ids still identify the original rows
        assert set(out.group_ids.tolist()) <= set(range(30))

    def test_deterministic(self):
        data = make_blobs(40, 900)
        a = subsample_to_skew(data, 5.0, RngStream(11))
        b = subsample_to_skew(data, 5.0, RngStream(11))
        assert np.array_equal(a.features, b.features)


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.4) == 2


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf, 0.0]]), np.array([1]))
    with pytest.raises(ValueError):
        Dataset(np.array([[0.0, 0.0]]), np.array([2]))
