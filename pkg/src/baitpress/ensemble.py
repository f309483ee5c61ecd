"""Out-of-fold stacking of per-view SVR base models under an
extremely-randomized-trees meta-regressor.

The meta matrix holds one column per (view, target) pair: out-of-fold
predictions during training (so the meta-model never sees a prediction made
by a model that was fit on that row's label), full-data refit predictions at
inference time. Final scores are clamped to [0, 1] at the pipeline boundary.
"""

from __future__ import annotations

import hashlib
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpus import Dataset, Post
from .features import (
    Vocabulary,
    count_ngrams,
    default_min_df,
    fit_vocabulary_from_counts,
    matrix_from_counts,
)
from .folds import FoldPlan, make_folds
from .linear import LinearModel, SolverConfig, predict, train_svc, train_svr
from .textprep import FieldView, preprocess_field, preprocess_text, stopwords

FEATURES_MEAN = "mean"
FEATURES_MEAN_STD = "mean+std"
FEATURES_MEAN_STD_EXTERNAL = "mean+std+external"
FEATURE_SETS = (FEATURES_MEAN, FEATURES_MEAN_STD, FEATURES_MEAN_STD_EXTERNAL)

TARGET_MEAN = "mean"
TARGET_STD = "std"

VIEW_ORDER = tuple(FieldView)

# Per-(view, target) regularization defaults: the values 5-fold tuning selects
# on the public 19.5k-post corpus.
DEFAULT_C = {
    (FieldView.POST_TEXT, TARGET_MEAN): 0.1,
    (FieldView.TARGET_TITLE, TARGET_MEAN): 0.01,
    (FieldView.TARGET_DESCRIPTION, TARGET_MEAN): 0.005,
    (FieldView.TARGET_KEYWORDS, TARGET_MEAN): 0.5,
    (FieldView.TARGET_PARAGRAPHS, TARGET_MEAN): 0.001,
    (FieldView.TARGET_CAPTIONS, TARGET_MEAN): 0.001,
    (FieldView.ALL_CONCATENATED, TARGET_MEAN): 0.001,
    (FieldView.POST_TEXT, TARGET_STD): 0.01,
    (FieldView.TARGET_TITLE, TARGET_STD): 0.01,
    (FieldView.TARGET_DESCRIPTION, TARGET_STD): 0.005,
    (FieldView.TARGET_KEYWORDS, TARGET_STD): 0.01,
    (FieldView.TARGET_PARAGRAPHS, TARGET_STD): 0.001,
    (FieldView.TARGET_CAPTIONS, TARGET_STD): 0.001,
    (FieldView.ALL_CONCATENATED, TARGET_STD): 0.001,
}

TOKENIZER_VERSION = "baitpress-prep-1"


def column_name(view: FieldView, target: str) -> str:
    return f"{view.value}/{target}"


def meta_columns_for(feature_set: str) -> tuple[str, ...]:
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    columns = [column_name(v, TARGET_MEAN) for v in VIEW_ORDER]
    if feature_set != FEATURES_MEAN:
        columns += [column_name(v, TARGET_STD) for v in VIEW_ORDER]
    if feature_set == FEATURES_MEAN_STD_EXTERNAL:
        columns += [column_name(v, "external") for v in VIEW_ORDER]
    return tuple(columns)


def preprocess_digest() -> str:
    """Fingerprint of the preprocessing configuration baked into a model."""
    payload = TOKENIZER_VERSION + "\n" + "\n".join(sorted(stopwords()))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Extremely randomized trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tree:
    """Preorder node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass(frozen=True)
class ExtraTreesModel:
    trees: list[Tree]
    n_features: int
    min_samples_split: int
    seed: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)


class _TreeBuilder:
    def __init__(self, x: np.ndarray, y: np.ndarray, min_samples_split: int, rng):
        self.x = x
        self.y = y
        self.min_samples_split = min_samples_split
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_samples: list[int] = []

    def add_node(self, idx: np.ndarray) -> int:
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(self.y[idx].mean()))
        self.n_samples.append(len(idx))
        return node

    def split(self, idx: np.ndarray) -> int:
        node = self.add_node(idx)
        ys = self.y[idx]
        if len(idx) < self.min_samples_split or ys.min() == ys.max():
            return node
        sub = self.x[idx]
        lo = sub.min(axis=0)
        hi = sub.max(axis=0)
        # one uniform threshold per feature, kept strictly inside (lo, hi)
        thr = lo + (hi - lo) * self.rng.random(sub.shape[1])
        thr = np.where(thr <= lo, np.nextafter(lo, hi), thr)
        thr = np.where(thr >= hi, np.nextafter(hi, lo), thr)
        valid = (lo < thr) & (thr < hi)
        if not valid.any():
            return node
        # child SSEs for every candidate at once: sse = sum(y^2) - n*mean^2
        masks = sub <= thr
        n_left = masks.sum(axis=0)
        n_right = len(idx) - n_left
        s_left = ys @ masks
        q_left = (ys * ys) @ masks
        s_right = ys.sum() - s_left
        q_right = float(ys @ ys) - q_left
        with np.errstate(invalid="ignore", divide="ignore"):
            sse = (q_left - s_left * s_left / n_left) + (
                q_right - s_right * s_right / n_right
            )
        sse = np.where(valid, sse, np.inf)
        f = int(np.argmin(sse))  # ties resolve to the lowest feature index
        mask = masks[:, f]
        self.feature[node] = f
        self.threshold[node] = float(thr[f])
        self.left[node] = self.split(idx[mask])
        self.right[node] = self.split(idx[~mask])
        return node

    def build(self) -> Tree:
        self.split(np.arange(len(self.y)))
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=np.asarray(self.value),
            n_samples=np.asarray(self.n_samples, dtype=np.int64),
        )


def train_extratrees(
    x,
    y,
    n_trees: int = 100,
    min_samples_split: int = 5,
    seed: int = 0,
) -> ExtraTreesModel:
    """Fit the forest: full data per tree (no bootstrap), one uniform-random
    threshold per non-constant feature per node, best variance reduction
    wins."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("need a non-empty 2d feature matrix")
    if len(x) != len(y):
        raise ValueError("feature/target length mismatch")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    seeds = np.random.SeedSequence(seed).spawn(n_trees)
    trees = [
        _TreeBuilder(x, y, min_samples_split, np.random.default_rng(s)).build()
        for s in seeds
    ]
    return ExtraTreesModel(
        trees=trees, n_features=x.shape[1], min_samples_split=min_samples_split, seed=seed
    )


def predict_extratrees(model: ExtraTreesModel, x) -> np.ndarray:
    """Mean of per-tree leaf values (unclamped; the pipeline clamps)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} feature columns, got {x.shape}")
    total = np.zeros(len(x))
    for tree in model.trees:
        nodes = np.zeros(len(x), dtype=np.int64)
        while True:
            feats = tree.feature[nodes]
            rows = np.flatnonzero(feats >= 0)
            if len(rows) == 0:
                break
            go_left = x[rows, feats[rows]] <= tree.threshold[nodes[rows]]
            nodes[rows[go_left]] = tree.left[nodes[rows[go_left]]]
            nodes[rows[~go_left]] = tree.right[nodes[rows[~go_left]]]
        total += tree.value[nodes]
    return total / model.n_trees


def feature_importance(model: ExtraTreesModel) -> dict[int, float]:
    """Fraction of internal nodes splitting on each feature (sums to 1)."""
    counts: Counter = Counter()
    for tree in model.trees:
        for f in tree.feature:
            if f >= 0:
                counts[int(f)] += 1
    total = sum(counts.values())
    if total == 0:
        return {}
    return {f: n / total for f, n in sorted(counts.items())}


# ---------------------------------------------------------------------------
# Stacking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StackConfig:
    n_folds: int = 5
    seed: int = 0
    feature_set: str = FEATURES_MEAN_STD
    n_trees: int = 100
    min_samples_split: int = 5
    min_df: int | None = None  # None applies the corpus-size default
    c_values: dict = field(default_factory=dict)  # (view, target) -> C override
    epsilon: float = 0.0  # SVR insensitivity width
    tolerance: float = 1e-4
    max_iterations: int = 1000
    n_jobs: int = 1

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            tolerance=self.tolerance, max_iterations=self.max_iterations, seed=self.seed
        )

    def c_for(self, view: FieldView, target: str) -> float:
        return float(self.c_values.get((view, target), DEFAULT_C[(view, target)]))


@dataclass(frozen=True)
class ExternalModel:
    """User-supplied-corpus classifier whose margins become meta features."""

    model: LinearModel
    vocab: Vocabulary


@dataclass(frozen=True)
class StackedModel:
    vocabularies: dict[FieldView, Vocabulary]
    linear_models: dict[str, LinearModel]  # keyed "view/target"
    trees: ExtraTreesModel
    meta_columns: tuple[str, ...]
    feature_set: str
    digest: str
    seed: int
    n_folds: int
    external: ExternalModel | None = None


@dataclass(frozen=True)
class TrainReport:
    oof_mse: dict[str, float]  # column -> out-of-fold MSE vs its own target
    stacked_cv_mse: float  # fold-mean MSE of the clamped meta-model
    base_seconds: dict[str, float]
    n_posts: int


@dataclass(frozen=True)
class TrainResult:
    model: StackedModel
    meta: np.ndarray  # out-of-fold meta matrix used to fit the trees
    report: TrainReport


def _doc_counts(tokens: list[list[str]]) -> list[Counter]:
    return [count_ngrams(seq) for seq in tokens]


def _fit_view_matrix(doc_counts, train_idx, min_df, view):
    fold_min_df = min_df if min_df is not None else default_min_df(len(train_idx))
    vocab = fit_vocabulary_from_counts([doc_counts[i] for i in train_idx], fold_min_df, view)
    return vocab, matrix_from_counts(vocab, [doc_counts[i] for i in train_idx])


def oof_predictions(
    ds: Dataset,
    view: FieldView,
    target: str,
    c: float,
    plan: FoldPlan,
    cfg: SolverConfig | None = None,
    min_df: int | None = None,
    tokens: list[list[str]] | None = None,
    epsilon: float = 0.0,
) -> np.ndarray:
    """Out-of-fold SVR predictions: each row is predicted by the model fit on
    the other folds, so no row is scored by a model that saw its label."""
    if ds.labels is None:
        raise ValueError("out-of-fold predictions need a labeled dataset")
    cfg = cfg or SolverConfig()
    y = np.asarray(ds.mean_targets() if target == TARGET_MEAN else ds.std_targets())
    if tokens is None:
        tokens = [preprocess_field(p, view) for p in ds.posts]
    doc_counts = _doc_counts(tokens)
    return _oof_from_counts(doc_counts, y, view, target, c, plan, cfg, min_df, epsilon)


def _oof_from_counts(doc_counts, y, view, target, c, plan, cfg, min_df, epsilon=0.0) -> np.ndarray:
    columns, _ = _oof_view_columns(
        doc_counts, {target: (np.asarray(y), c)}, view, plan, cfg, min_df, epsilon
    )
    return columns[target]


def _oof_view_columns(doc_counts, targets, view, plan, cfg, min_df, epsilon=0.0):
    """Out-of-fold columns for several targets of one view, sharing the
    per-fold vocabulary and matrices. `targets` maps name -> (y, c)."""
    sizes = [len(plan.fold_rows(f)) for f in range(plan.n_folds)]
    if min(sizes) < 2:
        raise ValueError(f"fold of size {min(sizes)} is too small (need >= 2 rows)")
    n_rows = len(doc_counts)
    columns = {name: np.empty(n_rows) for name in targets}
    seconds = {name: 0.0 for name in targets}
    for fold in range(plan.n_folds):
        train_idx = plan.train_rows(fold)
        test_idx = plan.fold_rows(fold)
        shared_start = time.perf_counter()
        vocab, x_train = _fit_view_matrix(doc_counts, train_idx, min_df, view)
        x_test = matrix_from_counts(vocab, [doc_counts[i] for i in test_idx])
        shared = (time.perf_counter() - shared_start) / len(targets)
        for name, (y, c) in targets.items():
            start = time.perf_counter()
            model = train_svr(x_train, y[train_idx], c, epsilon, cfg, view=view, target=name)
            columns[name][test_idx] = predict(model, x_test)
            seconds[name] += shared + time.perf_counter() - start
    return columns, seconds


def train_external_classifier(
    texts: list[str],
    labels,
    c: float = 1.0,
    cfg: SolverConfig | None = None,
    min_df: int | None = None,
) -> ExternalModel:
    """Fit the squared-hinge classifier on a user-supplied labeled corpus."""
    tokens = [preprocess_text([t]) for t in texts]
    counts = _doc_counts(tokens)
    use_min_df = min_df if min_df is not None else default_min_df(len(tokens))
    vocab = fit_vocabulary_from_counts(counts, use_min_df)
    x = matrix_from_counts(vocab, counts)
    model = train_svc(x, labels, c, cfg, target="class")
    return ExternalModel(model=model, vocab=vocab)


def _external_columns(external: ExternalModel, view_counts) -> dict[str, np.ndarray]:
    columns = {}
    for view in VIEW_ORDER:
        x = matrix_from_counts(external.vocab, view_counts[view])
        columns[column_name(view, "external")] = predict(external.model, x)
    return columns


def train_stacked(
    ds: Dataset,
    config: StackConfig | None = None,
    external: ExternalModel | None = None,
) -> TrainResult:
    """Full stacking pipeline.

    Builds the out-of-fold meta matrix with per-pair C values, fits the
    extra-trees meta-regressor on the mean target, then refits every base
    model (and vocabulary) on the full dataset for inference.
    """
    config = config or StackConfig()
    if config.feature_set == FEATURES_MEAN_STD_EXTERNAL and external is None:
        raise ValueError("feature set 'mean+std+external' needs an external classifier")
    if ds.labels is None:
        raise ValueError("training needs a labeled dataset")

    cfg = config.solver_config()
    plan = make_folds(len(ds.posts), config.n_folds, config.seed)
    y_mean = np.asarray(ds.mean_targets())
    y_std = np.asarray(ds.std_targets())

    view_tokens = {v: [preprocess_field(p, v) for p in ds.posts] for v in VIEW_ORDER}
    view_counts = {v: _doc_counts(view_tokens[v]) for v in VIEW_ORDER}

    columns = meta_columns_for(config.feature_set)
    pairs_by_view: dict[FieldView, list[tuple[str, str]]] = {}
    for col in columns:
        view_name, _, target = col.partition("/")
        if target != "external":
            pairs_by_view.setdefault(FieldView(view_name), []).append((col, target))

    def oof_job(view):
        targets = {
            target: (
                y_mean if target == TARGET_MEAN else y_std,
                config.c_for(view, target),
            )
            for _, target in pairs_by_view[view]
        }
        preds, secs = _oof_view_columns(
            view_counts[view], targets, view, plan, cfg, config.min_df, config.epsilon
        )
        return view, preds, secs

    def refit_job(view):
        all_rows = np.arange(len(ds.posts))
        vocab, x = _fit_view_matrix(view_counts[view], all_rows, config.min_df, view)
        models = {}
        for col, target in pairs_by_view[view]:
            y = y_mean if target == TARGET_MEAN else y_std
            models[col] = train_svr(
                x, y, config.c_for(view, target), config.epsilon, cfg,
                view=view, target=target,
            )
        return view, vocab, models

    views = list(pairs_by_view)
    if config.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
            oof_results = list(pool.map(oof_job, views))
            refit_results = list(pool.map(refit_job, views))
    else:
        oof_results = [oof_job(v) for v in views]
        refit_results = [refit_job(v) for v in views]

    oof_by_col = {}
    seconds = {}
    for view, preds, secs in oof_results:
        for col, target in pairs_by_view[view]:
            oof_by_col[col] = preds[target]
            seconds[col] = secs[target]
    if config.feature_set == FEATURES_MEAN_STD_EXTERNAL:
        oof_by_col.update(_external_columns(external, view_counts))
    meta = np.column_stack([oof_by_col[col] for col in columns])

    trees = train_extratrees(
        meta, y_mean, config.n_trees, config.min_samples_split, config.seed
    )

    vocabularies = {}
    linear_models = {}
    for view, vocab, models in refit_results:
        vocabularies[view] = vocab
        linear_models.update(models)

    oof_mse = {}
    for col in columns:
        _, _, target = col.partition("/")
        if target == "external":
            continue
        y = y_mean if target == TARGET_MEAN else y_std
        oof_mse[col] = float(np.mean((oof_by_col[col] - y) ** 2))

    stacked_cv = stacked_cv_mse(meta, y_mean, plan, config)

    model = StackedModel(
        vocabularies=vocabularies,
        linear_models=linear_models,
        trees=trees,
        meta_columns=columns,
        feature_set=config.feature_set,
        digest=preprocess_digest(),
        seed=config.seed,
        n_folds=config.n_folds,
        external=external,
    )
    report = TrainReport(
        oof_mse=oof_mse,
        stacked_cv_mse=stacked_cv,
        base_seconds=seconds,
        n_posts=len(ds.posts),
    )
    return TrainResult(model=model, meta=meta, report=report)


def stacked_cv_mse(meta: np.ndarray, y_mean: np.ndarray, plan: FoldPlan, config: StackConfig) -> float:
    """Fold-mean MSE of the meta-model cross-validated on the OOF matrix,
    with predictions clamped to [0, 1] (the pipeline's output contract)."""
    fold_mses = []
    for fold in range(plan.n_folds):
        train_idx = plan.train_rows(fold)
        test_idx = plan.fold_rows(fold)
        trees = train_extratrees(
            meta[train_idx], y_mean[train_idx],
            config.n_trees, config.min_samples_split, config.seed + 1000 + fold,
        )
        preds = np.clip(predict_extratrees(trees, meta[test_idx]), 0.0, 1.0)
        fold_mses.append(float(np.mean((preds - y_mean[test_idx]) ** 2)))
    return float(np.mean(fold_mses))


def meta_features(model: StackedModel, posts: list[Post]) -> np.ndarray:
    """Inference-time meta matrix from the refit base models."""
    view_tokens = {v: [preprocess_field(p, v) for p in posts] for v in VIEW_ORDER}
    view_counts = {v: _doc_counts(view_tokens[v]) for v in VIEW_ORDER}
    columns = {}
    for col, linear_model in model.linear_models.items():
        view_name, _, _ = col.partition("/")
        view = FieldView(view_name)
        x = matrix_from_counts(model.vocabularies[view], view_counts[view])
        columns[col] = predict(linear_model, x)
    if model.external is not None:
        columns.update(_external_columns(model.external, view_counts))
    return np.column_stack([columns[col] for col in model.meta_columns])


def score_posts(model: StackedModel, posts: list[Post]) -> list[tuple[str, float]]:
    """Clickbaitness scores in [0, 1], preserving input order."""
    if not posts:
        return []
    meta = meta_features(model, posts)
    scores = np.clip(predict_extratrees(model.trees, meta), 0.0, 1.0)
    return [(post.id, float(score)) for post, score in zip(posts, scores)]
