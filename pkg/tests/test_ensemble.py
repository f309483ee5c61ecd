import numpy as np
import pytest

from baitpress.corpus import Dataset, make_label, parse_instances
from baitpress.ensemble import (
    FEATURES_MEAN,
    FEATURES_MEAN_STD,
    ExtraTreesModel,
    StackConfig,
    Tree,
    feature_importance,
    meta_columns_for,
    oof_predictions,
    predict_extratrees,
    score_posts,
    train_extratrees,
    train_stacked,
)
from baitpress.folds import make_folds
from baitpress.linear import SolverConfig
from baitpress.textprep import FieldView


class TestMakeFolds:
    def test_even_split(self):
        plan = make_folds(10, 5, seed=0)
        sizes = [len(plan.fold_rows(f)) for f in range(5)]
        assert sizes == [2, 2, 2, 2, 2]

    def test_uneven_split(self):
        plan = make_folds(11, 5, seed=0)
        sizes = sorted((len(plan.fold_rows(f)) for f in range(5)), reverse=True)
        assert sizes == [3, 2, 2, 2, 2]

    def test_deterministic(self):
        a = make_folds(50, 5, seed=9)
        b = make_folds(50, 5, seed=9)
        np.testing.assert_array_equal(a.assignment, b.assignment)

    def test_partition(self):
        plan = make_folds(23, 4, seed=1)
        all_rows = np.concatenate([plan.fold_rows(f) for f in range(4)])
        assert sorted(all_rows.tolist()) == list(range(23))

    def test_errors(self):
        with pytest.raises(ValueError):
            make_folds(3, 5, seed=0)
        with pytest.raises(ValueError):
            make_folds(10, 1, seed=0)


def single_leaf_tree(value: float) -> Tree:
    return Tree(
        feature=np.array([-1], dtype=np.int32),
        threshold=np.zeros(1),
        left=np.array([-1], dtype=np.int32),
        right=np.array([-1], dtype=np.int32),
        value=np.array([value]),
        n_samples=np.array([1], dtype=np.int64),
    )


class TestExtraTrees:
    def test_constant_target_single_leaves(self):
        x = np.random.default_rng(0).normal(size=(20, 3))
        model = train_extratrees(x, np.full(20, 0.7), n_trees=5, seed=1)
        assert all(tree.n_nodes == 1 for tree in model.trees)
        np.testing.assert_allclose(predict_extratrees(model, x), 0.7)

    def test_fits_single_informative_column(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(120, 4))
        y = x[:, 2]
        model = train_extratrees(x, y, n_trees=30, min_samples_split=2, seed=3)
        mse = float(np.mean((predict_extratrees(model, x) - y) ** 2))
        assert mse < 1e-3

    def test_single_sample(self):
        model = train_extratrees(np.array([[1.0, 2.0]]), [0.5], n_trees=3, seed=0)
        assert all(tree.n_nodes == 1 for tree in model.trees)

    def test_thresholds_strictly_inside_node_ranges(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(60, 3))
        y = rng.normal(size=60)
        model = train_extratrees(x, y, n_trees=4, min_samples_split=4, seed=5)
        for tree in model.trees:
            # replay the routing to recover each node's sample set
            stack = [(0, np.arange(len(y)))]
            while stack:
                node, idx = stack.pop()
                f = tree.feature[node]
                if f < 0:
                    assert tree.n_samples[node] >= 1
                    continue
                col = x[idx, f]
                thr = tree.threshold[node]
                assert col.min() < thr < col.max()
                mask = col <= thr
                assert mask.any() and (~mask).any()
                stack.append((tree.left[node], idx[mask]))
                stack.append((tree.right[node], idx[~mask]))

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        a = train_extratrees(x, y, n_trees=7, seed=8)
        b = train_extratrees(x, y, n_trees=7, seed=8)
        for ta, tb in zip(a.trees, b.trees):
            np.testing.assert_array_equal(ta.feature, tb.feature)
            np.testing.assert_array_equal(ta.threshold, tb.threshold)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            train_extratrees(np.empty((0, 3)), [], n_trees=1)

    def test_prediction_mean_of_trees(self):
        model = ExtraTreesModel(
            trees=[single_leaf_tree(0.0), single_leaf_tree(1.0)],
            n_features=2, min_samples_split=5, seed=0,
        )
        np.testing.assert_allclose(
            predict_extratrees(model, np.zeros((3, 2))), [0.5, 0.5, 0.5]
        )

    def test_prediction_permutation_invariant_and_mean_monotone(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(30, 3))
        y = rng.normal(size=30)
        model = train_extratrees(x, y, n_trees=5, seed=9)
        swapped = ExtraTreesModel(
            trees=list(reversed(model.trees)), n_features=3,
            min_samples_split=model.min_samples_split, seed=model.seed,
        )
        base = predict_extratrees(model, x)
        np.testing.assert_allclose(predict_extratrees(swapped, x), base)
        # adding one tree that predicts the current mean leaves output unchanged
        for i in range(len(x)):
            extended = ExtraTreesModel(
                trees=model.trees + [single_leaf_tree(base[i])], n_features=3,
                min_samples_split=model.min_samples_split, seed=model.seed,
            )
            assert predict_extratrees(extended, x[i : i + 1])[0] == pytest.approx(base[i])

    def test_column_mismatch(self):
        model = train_extratrees(np.zeros((3, 2)), [1.0, 1.0, 1.0], n_trees=1)
        with pytest.raises(ValueError):
            predict_extratrees(model, np.zeros((2, 3)))


class TestFeatureImportance:
    def test_single_leaf_forest_empty(self):
        model = ExtraTreesModel(
            trees=[single_leaf_tree(0.2)], n_features=2, min_samples_split=5, seed=0
        )
        assert feature_importance(model) == {}

    def test_single_feature_forest(self):
        tree = Tree(
            feature=np.array([3, -1, -1], dtype=np.int32),
            threshold=np.array([0.5, 0.0, 0.0]),
            left=np.array([1, -1, -1], dtype=np.int32),
            right=np.array([2, -1, -1], dtype=np.int32),
            value=np.array([0.5, 0.0, 1.0]),
            n_samples=np.array([2, 1, 1], dtype=np.int64),
        )
        model = ExtraTreesModel(trees=[tree], n_features=5, min_samples_split=2, seed=0)
        assert feature_importance(model) == {3: 1.0}

    def test_fractions_sum_to_one(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(80, 4))
        y = x[:, 0] + rng.normal(size=80)
        model = train_extratrees(x, y, n_trees=10, seed=11)
        importances = feature_importance(model)
        assert all(v >= 0 for v in importances.values())
        assert sum(importances.values()) == pytest.approx(1.0, abs=1e-9)


def constant_target_dataset(n=12, k=0.0):
    posts = parse_instances(
        "\n".join(
            '{"id":"%d","postText":["post number %d about town news"]}' % (i, i)
            for i in range(n)
        )
    )
    judgment = 1.0 if k == 1.0 else 0.0
    labels = {p.id: make_label(p.id, [judgment] * 3) for p in posts}
    return Dataset(posts=posts, labels=labels)


class TestOofPredictions:
    def test_constant_zero_targets_give_constant_column(self):
        ds = constant_target_dataset(12, k=0.0)
        plan = make_folds(12, 3, seed=0)
        column = oof_predictions(ds, FieldView.POST_TEXT, "mean", c=10.0, plan=plan)
        np.testing.assert_allclose(column, 0.0, atol=1e-8)

    def test_unlabeled_rejected(self):
        ds = Dataset(posts=parse_instances('{"id":"1"}\n{"id":"2"}'))
        with pytest.raises(ValueError, match="labeled"):
            oof_predictions(ds, FieldView.POST_TEXT, "mean", 1.0, make_folds(2, 2, 0))

    def test_small_fold_rejected(self, mini_dataset):
        plan = make_folds(len(mini_dataset.posts), 30, seed=0)
        with pytest.raises(ValueError, match="too small"):
            oof_predictions(mini_dataset, FieldView.POST_TEXT, "mean", 0.1, plan)

    def test_leakage_immunity(self, mini_dataset):
        """Corrupting the labels inside fold f must not change fold f's
        out-of-fold predictions."""
        plan = make_folds(len(mini_dataset.posts), 5, seed=7)
        cfg = SolverConfig(seed=7)
        base = oof_predictions(
            mini_dataset, FieldView.POST_TEXT, "mean", c=0.1, plan=plan, cfg=cfg
        )
        fold = 2
        inside = plan.fold_rows(fold)
        corrupted_labels = dict(mini_dataset.labels)
        for row in inside:
            post_id = mini_dataset.posts[row].id
            old = corrupted_labels[post_id]
            flipped = 0.0 if old.mean > 0.5 else 1.0
            corrupted_labels[post_id] = make_label(post_id, [flipped] * 5)
        corrupted = Dataset(posts=mini_dataset.posts, labels=corrupted_labels)
        perturbed = oof_predictions(
            corrupted, FieldView.POST_TEXT, "mean", c=0.1, plan=plan, cfg=cfg
        )
        np.testing.assert_array_equal(base[inside], perturbed[inside])
        # and the other folds' models did see those labels, so they move
        outside = plan.train_rows(fold)
        assert not np.array_equal(base[outside], perturbed[outside])


class TestTrainStacked:
    def test_fixture_end_to_end(self, fixture_result, mini_dataset):
        model = fixture_result.model
        assert len(model.meta_columns) == 14
        assert set(model.linear_models) == set(model.meta_columns)
        assert fixture_result.meta.shape == (50, 14)
        scores = score_posts(model, mini_dataset.posts)
        assert [s[0] for s in scores] == [p.id for p in mini_dataset.posts]
        assert all(0.0 <= s[1] <= 1.0 for s in scores)

    def test_stacking_beats_weakest_base(self, fixture_result):
        mean_cols = [c for c in fixture_result.report.oof_mse if c.endswith("/mean")]
        worst = max(fixture_result.report.oof_mse[c] for c in mean_cols)
        assert fixture_result.report.stacked_cv_mse < worst

    def test_mean_only_variant(self, mini_dataset):
        config = StackConfig(
            seed=3, feature_set=FEATURES_MEAN, n_trees=20, max_iterations=200
        )
        result = train_stacked(mini_dataset, config)
        assert len(result.model.meta_columns) == 7
        assert all(c.endswith("/mean") for c in result.model.meta_columns)
        scores = score_posts(result.model, mini_dataset.posts)
        assert all(0.0 <= s[1] <= 1.0 for s in scores)

    def test_external_variant_requires_classifier(self, mini_dataset):
        config = StackConfig(feature_set="mean+std+external")
        with pytest.raises(ValueError, match="external"):
            train_stacked(mini_dataset, config)

    def test_meta_columns_shape(self):
        assert meta_columns_for(FEATURES_MEAN_STD)[:2] == (
            "postText/mean",
            "targetTitle/mean",
        )
        assert len(meta_columns_for("mean+std+external")) == 21

    def test_score_posts_empty(self, fixture_result):
        assert score_posts(fixture_result.model, []) == []

    def test_unlabeled_rejected(self):
        ds = Dataset(posts=parse_instances('{"id":"1"}'))
        with pytest.raises(ValueError, match="labeled"):
            train_stacked(ds, StackConfig())

    def test_parallel_jobs_reproduce_sequential_run(self, mini_dataset):
        config = dict(seed=5, n_trees=10, max_iterations=200)
        sequential = train_stacked(mini_dataset, StackConfig(n_jobs=1, **config))
        parallel = train_stacked(mini_dataset, StackConfig(n_jobs=4, **config))
        np.testing.assert_array_equal(sequential.meta, parallel.meta)
        assert score_posts(sequential.model, mini_dataset.posts) == score_posts(
            parallel.model, mini_dataset.posts
        )
