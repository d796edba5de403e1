"""
Tests for the gradient-boosted tree learner.
Run with: pytest tests/test_gbdt.py -v
"""
import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import expit

from src.dataset import ColumnSpec, FeatureSchema, TabularDataset
from src.errors import ContractError, DegenerateLabelError, SchemaError
from src.gbdt import BoostParams, feature_importance, fit, load_model, predict_score, save_model
from src.gbdt.binning import FeatureSpace, bin_matrix, numeric_thresholds
from src.metrics import auc
from tests.helpers import logistic_dataset, make_dataset


def full_batch(**overrides) -> BoostParams:
    values = dict(subsample=1.0, colsample_bytree=1.0, min_data_in_leaf=5, verbose_every=0)
    values.update(overrides)
    return BoostParams(**values)


def categorical_dataset(categories, labels, numeric=None) -> TabularDataset:
    schema = FeatureSchema(
        columns=[
            ColumnSpec(name="c", kind="categorical"),
            ColumnSpec(name="x0", kind="numeric"),
            ColumnSpec(name="y", kind="numeric", missing_allowed=False),
        ],
        label_column="y",
    )
    numeric = np.zeros(len(labels)) if numeric is None else numeric
    return TabularDataset.from_columns(schema, {"c": categories, "x0": numeric, "y": labels})


class TestParams:
    """Hyperparameter validation."""

    def test_defaults(self):
        params = BoostParams()
        assert (params.num_boost_round, params.early_stopping_rounds, params.learning_rate) == (50000, 200, 0.1)
        assert (params.max_depth, params.num_leaves) == (4, 8)
        assert (params.colsample_bytree, params.subsample, params.subsample_freq) == (0.8, 0.8, 3)
        assert (params.min_data_in_leaf, params.l2_reg, params.max_bins, params.seed) == (20, 1.0, 255, 42)

    def test_leaves_bounded_by_depth(self):
        with pytest.raises(ValueError):
            BoostParams(max_depth=2, num_leaves=5)

    def test_fraction_range(self):
        with pytest.raises(ValueError):
            BoostParams(subsample=0.0)
        with pytest.raises(ValueError):
            BoostParams(colsample_bytree=1.5)


class TestBinning:
    """Threshold construction and bin codes."""

    def test_midpoints_for_few_distinct(self):
        thresholds = numeric_thresholds(np.array([3.0, 1.0, 2.0, 2.0, np.nan]), max_bins=255)
        assert thresholds.tolist() == [1.5, 2.5]

    def test_constant_column_has_no_thresholds(self):
        assert numeric_thresholds(np.array([4.0, 4.0]), max_bins=8).size == 0

    def test_quantile_cuts_respect_budget(self):
        values = np.random.default_rng(0).normal(size=5000)
        assert numeric_thresholds(values, max_bins=16).size <= 15

    def test_missing_bin(self):
        ds = make_dataset([[1.0], [np.nan], [3.0]], [0, 1, 0])
        space = FeatureSpace.from_dataset(ds, max_bins=8)
        binned = bin_matrix(space.encode(ds), space, max_bins=8)
        assert binned.codes[:, 0].tolist() == [0, 8, 1]
        assert binned.n_bins.tolist() == [2]


class TestFit:
    """Fitting behaviour."""

    def test_zero_rounds_base_score(self):
        ds = make_dataset(np.arange(8.0), [1, 0, 0, 0, 1, 0, 0, 0])
        model = fit(ds, params=full_batch(num_boost_round=0))
        assert model.trees == []
        assert model.base_score == pytest.approx(np.log(1.0 / 3.0), abs=1e-12)
        np.testing.assert_allclose(predict_score(model, ds), 0.25, atol=1e-12)

    def test_weighted_base_rate(self):
        ds = make_dataset(np.arange(4.0), [1, 0, 0, 0])
        model = fit(ds, params=full_batch(num_boost_round=0), weights=[3.0, 1.0, 1.0, 1.0])
        assert model.base_score == pytest.approx(0.0, abs=1e-12)

    def test_separable_reaches_auc_one(self, toy_separable):
        model = fit(toy_separable, toy_separable, full_batch(num_boost_round=50, early_stopping_rounds=50))
        assert max(model.valid_auc_history) == 1.0
        assert auc(toy_separable.labels, predict_score(model, toy_separable)) == 1.0

    def test_noise_stops_early(self):
        rng = np.random.default_rng(21)
        train = make_dataset(rng.normal(size=(400, 3)), rng.integers(0, 2, size=400))
        valid = make_dataset(rng.normal(size=(200, 3)), rng.integers(0, 2, size=200))
        params = BoostParams(num_boost_round=500, early_stopping_rounds=20, verbose_every=0)
        model = fit(train, valid, params)
        assert len(model.trees) < params.num_boost_round
        assert len(model.trees) - model.best_iteration == params.early_stopping_rounds
        assert len(model.valid_auc_history) == len(model.trees)

    def test_trees_respect_shape_limits(self):
        ds = logistic_dataset(600, seed=1)
        params = BoostParams(num_boost_round=30, max_depth=3, num_leaves=6, verbose_every=0)
        model = fit(ds, params=params)
        assert model.best_iteration == len(model.trees) == 30
        for tree in model.trees:
            assert tree.depth() <= 3
            assert tree.n_leaves <= 6

    def test_log_loss_non_increasing(self):
        ds = logistic_dataset(300, seed=2)
        model = fit(ds, params=full_batch(num_boost_round=100))
        matrix = model.feature_space.encode(ds)
        y = ds.labels
        raw = np.full(ds.n_rows, model.base_score)
        losses = []
        for tree in model.trees:
            raw = raw + tree.predict(matrix)
            p = expit(raw)
            losses.append(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
        assert len(losses) == 100
        assert np.all(np.diff(losses) <= 1e-12)

    def test_refit_is_bit_identical(self):
        ds = logistic_dataset(400, seed=3)
        params = BoostParams(num_boost_round=25, verbose_every=0)
        a = predict_score(fit(ds, params=params), ds)
        b = predict_score(fit(ds, params=params), ds)
        np.testing.assert_array_equal(a, b)

    def test_weight_scaling_leaves_model_unchanged(self):
        ds = logistic_dataset(300, seed=4)
        params = full_batch(num_boost_round=20, l2_reg=0.0, min_sum_hessian_in_leaf=0.0)
        weights = np.random.default_rng(4).uniform(0.5, 2.0, size=ds.n_rows)
        a = fit(ds, params=params, weights=weights)
        b = fit(ds, params=params, weights=4.0 * weights)
        np.testing.assert_array_equal(predict_score(a, ds), predict_score(b, ds))

    def test_histogram_matches_exact_split(self):
        rng = np.random.default_rng(5)
        x = np.round(rng.normal(size=(150, 2)), 2)
        y = (rng.random(150) < expit(2.0 * x[:, 0] - x[:, 1])).astype(np.int8)
        ds = make_dataset(x, y)
        params = full_batch(num_boost_round=1, max_depth=1, num_leaves=2, min_data_in_leaf=1,
                            min_sum_hessian_in_leaf=0.0)
        root = fit(ds, params=params).trees[0].nodes[0]

        p = y.mean()
        g, h = p - y, np.full(y.size, p * (1 - p))
        lam = params.l2_reg

        def score(gs, hs):
            return gs * gs / (hs + lam)

        best = (-np.inf, None, None)
        for j in range(2):
            distinct = np.unique(x[:, j])
            for threshold in (distinct[:-1] + distinct[1:]) / 2:
                left = x[:, j] <= threshold
                gain = score(g[left].sum(), h[left].sum()) + score(g[~left].sum(), h[~left].sum()) \
                    - score(g.sum(), h.sum())
                if gain > best[0]:
                    best = (gain, j, threshold)

        assert root.feature == best[1]
        assert root.threshold == best[2]
        assert root.gain == pytest.approx(best[0], rel=1e-9)

    def test_single_class_rejected(self):
        ds = make_dataset(np.arange(4.0), [1, 1, 1, 1])
        with pytest.raises(DegenerateLabelError):
            fit(ds, params=full_batch(num_boost_round=1))

    def test_weight_errors(self):
        ds = make_dataset(np.arange(4.0), [0, 1, 0, 1])
        with pytest.raises(ContractError):
            fit(ds, params=full_batch(num_boost_round=1), weights=[1.0, 1.0])
        with pytest.raises(ContractError):
            fit(ds, params=full_batch(num_boost_round=1), weights=[0.0] * 4)
        with pytest.raises(ContractError):
            fit(ds, params=full_batch(num_boost_round=1), weights=[1.0, -1.0, 1.0, 1.0])

    def test_zero_weight_class_is_degenerate(self):
        ds = make_dataset(np.arange(4.0), [0, 1, 0, 1])
        with pytest.raises(DegenerateLabelError):
            fit(ds, params=full_batch(num_boost_round=1), weights=[1.0, 0.0, 1.0, 0.0])


class TestPredict:
    """Scoring behaviour."""

    def test_outputs_in_open_interval(self):
        ds = logistic_dataset(300, seed=6)
        scores = predict_score(fit(ds, params=BoostParams(num_boost_round=40, verbose_every=0)), ds)
        assert np.all(np.isfinite(scores))
        assert np.all((scores > 0) & (scores < 1))

    def test_duplicate_rows_score_equal(self):
        ds = logistic_dataset(200, seed=7)
        model = fit(ds, params=BoostParams(num_boost_round=10, verbose_every=0))
        x = ds.frame[["x0", "x1", "x2"]].to_numpy()[[3, 3, 8]]
        scores = predict_score(model, make_dataset(x, [0, 1, 0]))
        assert scores[0] == scores[1]

    def test_row_order_invariance(self):
        ds = logistic_dataset(250, seed=8)
        model = fit(ds, params=BoostParams(num_boost_round=15, verbose_every=0))
        order = np.random.default_rng(8).permutation(ds.row_ids)
        np.testing.assert_array_equal(
            predict_score(model, ds.take(order)), predict_score(model, ds)[order]
        )

    def test_missing_values_follow_learned_direction(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=400)
        y = (x > 0).astype(np.int8)
        # missing rows are all positives, so they should travel with the high side
        hidden = rng.random(400) < 0.2
        x[hidden] = np.nan
        y[hidden] = 1
        model = fit(make_dataset(x, y), params=full_batch(num_boost_round=10))
        scores = predict_score(model, make_dataset([np.nan, -2.0, 2.0], [1, 0, 1]))
        assert scores[0] > scores[1]

    def test_unseen_category_routes_like_missing(self):
        rng = np.random.default_rng(10)
        categories = rng.choice(["a", "b", "c", "d"], size=400)
        labels = np.isin(categories, ["b", "d"]).astype(np.int8)
        model = fit(categorical_dataset(categories, labels), params=full_batch(num_boost_round=10))
        scores = predict_score(model, categorical_dataset(["zzz", None, "b", "a"], [0, 1, 1, 0]))
        assert scores[0] == scores[1]
        assert scores[2] > scores[3]

    def test_categorical_split_separates(self):
        rng = np.random.default_rng(11)
        categories = rng.choice(["a", "b", "c", "d", "e"], size=500)
        labels = np.isin(categories, ["a", "c", "e"]).astype(np.int8)
        ds = categorical_dataset(categories, labels)
        model = fit(ds, params=full_batch(num_boost_round=5))
        assert auc(ds.labels, predict_score(model, ds)) == 1.0
        root = model.trees[0].nodes[0]
        chosen = {ds.categories("c")[code] for code in root.categories}
        assert chosen in ({"a", "c", "e"}, {"b", "d"})

    def test_feature_mismatch(self):
        model = fit(logistic_dataset(100, seed=12), params=BoostParams(num_boost_round=2, verbose_every=0))
        with pytest.raises(SchemaError):
            predict_score(model, make_dataset([[1.0, 2.0]], [0]))


class TestImportanceAndPersistence:
    """Feature importance and JSON round trip."""

    def test_zero_trees_all_zero(self):
        ds = logistic_dataset(50, seed=13)
        model = fit(ds, params=full_batch(num_boost_round=0))
        assert feature_importance(model) == {"x0": 0.0, "x1": 0.0, "x2": 0.0}

    def test_only_split_feature_has_gain(self):
        rng = np.random.default_rng(14)
        x0 = rng.normal(size=200)
        ds = make_dataset(np.column_stack([x0, np.ones(200)]), (x0 > 0).astype(np.int8))
        model = fit(ds, params=full_batch(num_boost_round=1))
        importance = feature_importance(model)
        assert importance["x0"] > 0
        assert importance["x1"] == 0.0

    def test_duplicated_trees_double_gain(self):
        ds = logistic_dataset(200, seed=15)
        model = fit(ds, params=full_batch(num_boost_round=1))
        doubled = model.model_copy(update={"trees": model.trees * 2, "best_iteration": 2})
        single, double = feature_importance(model), feature_importance(doubled)
        for name in single:
            assert double[name] == 2 * single[name]

    def test_fitted_model_is_frozen(self):
        model = fit(logistic_dataset(60, seed=19), params=full_batch(num_boost_round=2))
        with pytest.raises(ValidationError):
            model.best_iteration = 0
        assert model.best_iteration == 2

    def test_json_round_trip(self, tmp_path):
        ds = categorical_dataset(
            np.random.default_rng(16).choice(["a", "b", "c"], size=300),
            np.random.default_rng(17).integers(0, 2, size=300),
            numeric=np.random.default_rng(18).normal(size=300),
        )
        model = fit(ds, params=BoostParams(num_boost_round=10, verbose_every=0))
        loaded = load_model(save_model(model, tmp_path / "model.json"))
        assert loaded.model_dump() == model.model_dump()
        np.testing.assert_array_equal(predict_score(loaded, ds), predict_score(model, ds))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
