from __future__ import annotations

import numpy as np
import pytest
from helpers import ConstantModel, LinearWindowModel

from tsxfidel.explainers import (
    Direction,
    ReplacementScheme,
    explain_omission,
    explain_random,
    global_mean,
    local_mean,
    rank_cells,
    training_feature_means,
)


class TestMeans:
    def test_local_mean_arithmetic(self):
        x = np.array([[2.0, 4.0, 6.0], [1.0, 1.0, 1.0]])
        assert local_mean(x, 0) == 4.0

    def test_local_mean_constant_row(self):
        x = np.full((2, 5), 3.25)
        assert local_mean(x, 1) == 3.25

    def test_local_mean_hand_sum(self):
        x = np.array([[0.1, 0.2, 0.7]])
        assert local_mean(x, 0) == pytest.approx(1.0 / 3.0)

    def test_global_mean_simple_series(self):
        means = training_feature_means(np.array([[1.0], [2.0], [3.0]]), train_len=3)
        assert global_mean(means, 0) == 2.0

    def test_global_equals_local_when_window_spans_series(self):
        values = np.array([[1.0, 5.0], [2.0, 6.0], [3.0, 7.0]])
        means = training_feature_means(values, train_len=3)
        window = values.T  # (J, L) covering the full series
        for j in range(2):
            assert global_mean(means, j) == local_mean(window, j)

    def test_global_mean_time_invariant_across_windows(self):
        rng = np.random.default_rng(8)
        values = rng.normal(size=(50, 3))
        means = training_feature_means(values, train_len=40)
        # a recomputation for any window anchored inside the training range
        # must agree because the statistic only depends on the training span
        again = training_feature_means(values, train_len=40)
        np.testing.assert_array_equal(means, again)
        window_a = values[0:5].T
        window_b = values[20:25].T
        assert local_mean(window_a, 0) != local_mean(window_b, 0)


class TestRandomExplainer:
    def test_same_seed_identical(self):
        x = np.zeros((2, 3))
        a = explain_random(x, 0, seed=42)
        b = explain_random(x, 0, seed=42)
        np.testing.assert_array_equal(a.phi, b.phi)

    def test_different_seeds_differ(self):
        x = np.zeros((2, 3))
        a = explain_random(x, 0, seed=1)
        b = explain_random(x, 0, seed=2)
        assert not np.array_equal(a.phi, b.phi)

    def test_top_cell_frequency_uniform(self):
        x = np.zeros((2, 3))
        counts = np.zeros(6)
        n = 10_000
        for seed in range(n):
            ranking = rank_cells(explain_random(x, 0, seed=seed), Direction.MOST_POSITIVE)
            j, l = ranking.cells[0]
            counts[j * 3 + l] += 1
        np.testing.assert_allclose(counts / n, 1.0 / 6.0, atol=0.01)

    def test_scores_inside_unit_interval(self):
        phi = explain_random(np.zeros((3, 4)), 0, seed=9).phi
        assert np.all(phi > -1.0) and np.all(phi < 1.0)


class TestOmission:
    def test_linear_model_closed_form_local(self):
        rng = np.random.default_rng(3)
        w = rng.normal(size=(2, 3, 4))
        x = rng.normal(size=(3, 4))
        model = LinearWindowModel(w, bias=np.array([0.3, -0.1]))
        for horizon in range(2):
            imp = explain_omission(model, x, horizon, ReplacementScheme.LOCAL_MEAN)
            mu = x.mean(axis=1)
            expected = w[horizon] * (x - mu[:, None])
            np.testing.assert_allclose(imp.phi, expected, atol=1e-12)

    def test_linear_model_closed_form_global(self):
        rng = np.random.default_rng(4)
        w = rng.normal(size=(1, 2, 3))
        x = rng.normal(size=(2, 3))
        means = rng.normal(size=2)
        model = LinearWindowModel(w)
        imp = explain_omission(model, x, 0, ReplacementScheme.GLOBAL_MEAN, global_means=means)
        expected = w[0] * (x - means[:, None])
        np.testing.assert_allclose(imp.phi, expected, atol=1e-12)

    def test_cell_equal_to_replacement_scores_zero(self):
        w = np.ones((1, 2, 2))
        x = np.array([[0.5, 0.5], [1.0, 3.0]])  # row 0 equals its own mean
        model = LinearWindowModel(w)
        imp = explain_omission(model, x, 0, ReplacementScheme.LOCAL_MEAN)
        np.testing.assert_array_equal(imp.phi[0], [0.0, 0.0])

    def test_dead_feature_scores_zero(self):
        w = np.zeros((1, 3, 2))
        w[0, 0] = 1.0
        w[0, 2] = -2.0  # feature 1 ignored
        x = np.random.default_rng(5).normal(size=(3, 2))
        model = LinearWindowModel(w)
        imp = explain_omission(model, x, 0, ReplacementScheme.LOCAL_MEAN)
        np.testing.assert_array_equal(imp.phi[1], [0.0, 0.0])

    def test_local_and_global_coincide_when_means_agree(self):
        rng = np.random.default_rng(6)
        w = rng.normal(size=(1, 2, 3))
        x = rng.normal(size=(2, 3))
        model = LinearWindowModel(w)
        means = x.mean(axis=1)
        local = explain_omission(model, x, 0, ReplacementScheme.LOCAL_MEAN)
        global_ = explain_omission(model, x, 0, ReplacementScheme.GLOBAL_MEAN, global_means=means)
        np.testing.assert_allclose(local.phi, global_.phi, atol=1e-12)

    def test_constant_model_all_zero(self):
        model = ConstantModel(0.7, shape=(2, 3))
        imp = explain_omission(model, np.ones((2, 3)), 0, ReplacementScheme.LOCAL_MEAN)
        np.testing.assert_array_equal(imp.phi, np.zeros((2, 3)))


class TestRanking:
    def test_spec_fixture_most_positive(self):
        from tsxfidel.explainers import ImportanceMatrix

        imp = ImportanceMatrix(phi=np.array([[3.0, 1.0], [2.0, 0.0]]), horizon=0, method="test")
        ranking = rank_cells(imp, Direction.MOST_POSITIVE)
        assert [tuple(c) for c in ranking.cells.tolist()] == [(0, 0), (1, 0), (0, 1), (1, 1)]

    def test_all_equal_lexicographic(self):
        from tsxfidel.explainers import ImportanceMatrix

        imp = ImportanceMatrix(phi=np.zeros((2, 2)), horizon=0, method="test")
        for direction in Direction:
            ranking = rank_cells(imp, direction)
            assert [tuple(c) for c in ranking.cells.tolist()] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_directions_reverse_for_distinct_values(self):
        from tsxfidel.explainers import ImportanceMatrix

        rng = np.random.default_rng(2)
        phi = rng.permutation(12).reshape(3, 4).astype(float)
        imp = ImportanceMatrix(phi=phi, horizon=0, method="test")
        pos = rank_cells(imp, Direction.MOST_POSITIVE)
        neg = rank_cells(imp, Direction.MOST_NEGATIVE)
        assert pos.cells.tolist() == neg.cells.tolist()[::-1]

    def test_positive_scaling_invariance(self):
        from tsxfidel.explainers import ImportanceMatrix

        rng = np.random.default_rng(7)
        phi = rng.normal(size=(2, 5))
        a = rank_cells(ImportanceMatrix(phi=phi, horizon=0, method="t"), Direction.MOST_POSITIVE)
        b = rank_cells(ImportanceMatrix(phi=3.5 * phi, horizon=0, method="t"), Direction.MOST_POSITIVE)
        assert a.cells.tolist() == b.cells.tolist()
