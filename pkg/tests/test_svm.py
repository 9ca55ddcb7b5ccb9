import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pboost import Dataset, RngStream
from pboost.errors import AllZeroWeights, DegenerateData, DimensionMismatch, SingleClassInput
from pboost.svm import (
    LearnerConfig,
    SvmModel,
    model_from_record,
    rbf_kappa_heuristic,
    rbf_kernel,
    train_svm,
    weighted_resample,
)

from oracles import smo_objective_from_model, svm_grid_search


class TestKappaHeuristic:
    def test_two_points(self):
        # distance 2, radius 1 from the midpoint
        assert rbf_kappa_heuristic([[0.0, 0.0], [2.0, 0.0]]) == pytest.approx(1.5)

    def test_unit_square(self):
        corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        expected = (1.0 + np.sqrt(2.0) / 2.0) / 2.0
        assert rbf_kappa_heuristic(corners) == pytest.approx(expected)

    def test_degenerate(self):
        with pytest.raises(DegenerateData):
            rbf_kappa_heuristic([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])

    @settings(max_examples=200, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=10_000),
        shift=st.floats(min_value=-50, max_value=50),
        scale=st.floats(min_value=0.1, max_value=20),
    )
    def test_translation_invariant_and_scale_linear(self, seed, shift, scale):
        gen = np.random.default_rng(seed)
        x = gen.normal(size=(8, 3))
        base = rbf_kappa_heuristic(x)
        assert rbf_kappa_heuristic(x + shift) == pytest.approx(base, rel=1e-6)
        assert rbf_kappa_heuristic(x * scale) == pytest.approx(base * scale, rel=1e-6)


class TestKernel:
    def test_self_similarity_is_one(self):
        x = np.random.default_rng(0).normal(size=(6, 4))
        k = rbf_kernel(x, x, 1.3)
        assert np.allclose(np.diag(k), 1.0)

    def test_bounds_and_symmetry(self):
        x = np.random.default_rng(1).normal(size=(7, 2))
        k = rbf_kernel(x, x, 0.8)
        assert np.all(k > 0) and np.all(k <= 1.0 + 1e-12)
        assert np.allclose(k, k.T)


SEPARABLE = (
    np.array([[1.0, 0.0], [1.0, 1.0], [-1.0, 0.0], [-1.0, 1.0]]),
    np.array([1, 1, -1, -1]),
)
XOR = (
    np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]),
    np.array([1, 1, -1, -1]),
)


class TestTrainSvm:
    def test_separable_four_points(self):
        x, y = SEPARABLE
        model = train_svm(x, y, LearnerConfig(), 1.0, RngStream(0))
        preds = np.where(model.decision_function(x) >= 0, 1, -1)
        assert np.array_equal(preds, y)

    def test_xor(self):
        x, y = XOR
        model = train_svm(x, y, LearnerConfig(), 0.5, RngStream(0))
        preds = np.where(model.decision_function(x) >= 0, 1, -1)
        assert np.array_equal(preds, y)

    def test_single_class(self):
        with pytest.raises(SingleClassInput):
            train_svm([[0.0], [1.0]], [1, 1], LearnerConfig(), 1.0, RngStream(0))

    def test_matches_grid_search_on_fixed_problems(self):
        for x, y, kappa in [
            (*SEPARABLE, 1.0),
            (*XOR, 0.5),
            (np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([1, -1]), 1.5),
            (np.array([[0.0, 0.0], [0.5, 0.0], [2.0, 0.0]]), np.array([1, 1, -1]), 1.0),
        ]:
            model = train_svm(x, y, LearnerConfig(), kappa, RngStream(3))
            smo_obj, _ = smo_objective_from_model(model, x, y, kappa)
            grid_obj, _, _, grid_preds = svm_grid_search(x, y, 1.0, kappa)
            assert abs(smo_obj - grid_obj) <= 1e-2
            preds = np.where(model.decision_function(x) >= 0, 1, -1)
            assert np.array_equal(preds, grid_preds)

    def test_matches_grid_search_on_random_problems(self):
        gen = np.random.default_rng(17)
        for _ in range(6):
            x = gen.normal(0.0, 1.5, size=(4, 2)).round(2)
            y = np.array([1, 1, -1, -1])
            kappa = rbf_kappa_heuristic(x)
            model = train_svm(x, y, LearnerConfig(), kappa, RngStream(5))
            smo_obj, _ = smo_objective_from_model(model, x, y, kappa)
            grid_obj, _, _, grid_preds = svm_grid_search(x, y, 1.0, kappa)
            assert abs(smo_obj - grid_obj) <= 1e-2
            preds = np.where(model.decision_function(x) >= 0, 1, -1)
            assert np.array_equal(preds, grid_preds)

    def test_alpha_within_box(self):
        gen = np.random.default_rng(2)
        x = np.vstack([gen.normal(0, 1, (20, 2)), gen.normal(2, 1, (20, 2))])
        y = np.concatenate([np.ones(20, int), -np.ones(20, int)])
        cfg = LearnerConfig(c_penalty=0.7)
        model = train_svm(x, y, cfg, 1.0, RngStream(1))
        assert np.all(np.abs(model.dual_coefficients) <= cfg.c_penalty + 1e-9)
        assert model.n_sv >= 1


class TestDecisionValue:
    def test_sign_at_strong_support_vector(self):
        x, y = SEPARABLE
        model = train_svm(x, y, LearnerConfig(), 1.0, RngStream(0))
        assert model.decision_function([1.0, 0.5])[0] > 0

    def test_midpoint_near_zero(self):
        x = np.array([[0.0, 0.0], [2.0, 0.0]])
        y = np.array([1, -1])
        model = train_svm(x, y, LearnerConfig(), 1.5, RngStream(0))
        assert abs(model.decision_function([1.0, 0.0])[0]) < 1e-6

    def test_permutation_invariant(self):
        x, y = XOR
        model = train_svm(x, y, LearnerConfig(), 0.5, RngStream(0))
        perm = [2, 0, 3, 1]
        permuted = SvmModel(
            support_vectors=model.support_vectors[perm],
            dual_coefficients=model.dual_coefficients[perm],
            bias=model.bias,
            kappa=model.kappa,
        )
        probe = np.array([[0.3, 0.7], [0.9, 0.1]])
        assert np.allclose(
            model.decision_function(probe), permuted.decision_function(probe)
        )

    def test_dimension_mismatch(self):
        x, y = SEPARABLE
        model = train_svm(x, y, LearnerConfig(), 1.0, RngStream(0))
        with pytest.raises(DimensionMismatch):
            model.decision_function([1.0, 2.0, 3.0])


class TestSerialization:
    def test_round_trip(self):
        x, y = XOR
        model = train_svm(x, y, LearnerConfig(), 0.5, RngStream(0))
        clone = model_from_record(model.to_record())
        probe = np.random.default_rng(0).normal(size=(5, 2))
        assert np.allclose(
            model.decision_function(probe), clone.decision_function(probe)
        )


class TestWeightedResample:
    def _data(self, n=3):
        return Dataset(np.arange(n, dtype=float)[:, None], np.array([1] * (n - 1) + [-1]))

    def test_point_mass(self):
        out = weighted_resample(self._data(), [1.0, 0.0, 0.0], 5, RngStream(0))
        assert np.all(out.features == 0.0)

    def test_empty_draw(self):
        out = weighted_resample(self._data(), [0.4, 0.3, 0.3], 0, RngStream(0))
        assert out.m == 0

    def test_all_zero(self):
        with pytest.raises(AllZeroWeights):
            weighted_resample(self._data(), [0.0, 0.0, 0.0], 2, RngStream(0))

    def test_uniform_frequencies_chi_squared(self):
        n_rows, n_draws = 5, 10000
        data = Dataset(
            np.arange(n_rows, dtype=float)[:, None],
            np.array([1, 1, 1, -1, -1]),
        )
        out = weighted_resample(
            data, np.full(n_rows, 1.0 / n_rows), n_draws, RngStream(42)
        )
        counts = np.bincount(out.features[:, 0].astype(int), minlength=n_rows)
        expected = n_draws / n_rows
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # chi-squared with 4 dof: mean 4, sd sqrt(8); 3 sigma above the mean
        assert chi2 < 4 + 3 * np.sqrt(8.0)
