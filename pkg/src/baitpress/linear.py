"""L2-regularized linear models on sparse data, trained by dual coordinate
descent: epsilon-insensitive SVR (mean/std targets) and squared-hinge SVC.

The bias is a regularized constant-1 feature appended to every row, which is
what makes single-coordinate dual updates valid. Coordinates are visited in a
fresh random permutation each pass (seeded, so training is reproducible); the
solver stops when the largest projected-gradient violation over a pass drops
below the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .features import SparseMatrix, Vocabulary
from .folds import make_folds
from .textprep import FieldView

SOLVER_BACKEND = _kernels.BACKEND

TASK_REGRESSION = "regression"
TASK_CLASSIFICATION = "classification"

# Superset of the per-view regularization values that tuning selects on the
# public corpora.
DEFAULT_C_GRID = (0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-4
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    c: float
    epsilon: float
    task: str
    view: FieldView | None = None
    target: str | None = None

    def __post_init__(self):
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValueError("model has non-finite parameters")

    @property
    def n_features(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class SolverState:
    """Diagnostics from one training run (dual variables included so callers
    can compute duality gaps)."""

    dual: np.ndarray
    passes: int
    max_violation: float
    converged: bool


def _augmented(x: SparseMatrix) -> tuple[SparseMatrix, np.ndarray]:
    xa = x.with_bias_column()
    qd = np.add.reduceat(xa.data * xa.data, xa.indptr[:-1])
    return xa, qd


def _check_training_inputs(x: SparseMatrix, y: np.ndarray, c: float):
    if x.n_rows == 0:
        raise ValueError("cannot train on an empty matrix")
    if x.n_rows != len(y):
        raise ValueError(f"matrix has {x.n_rows} rows but {len(y)} targets given")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets contain non-finite values")
    if c <= 0:
        raise ValueError("c must be > 0")


def train_svr(
    x: SparseMatrix,
    y,
    c: float,
    epsilon: float = 0.0,
    cfg: SolverConfig | None = None,
    view: FieldView | None = None,
    target: str | None = None,
    return_state: bool = False,
):
    """Fit epsilon-insensitive SVR; returns the model (and state on request)."""
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=np.float64)
    _check_training_inputs(x, y, c)
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")

    xa, qd = _augmented(x)
    beta = np.zeros(xa.n_rows)
    w = np.zeros(xa.n_cols)
    rng = np.random.default_rng(cfg.seed)
    violation = np.inf
    passes = 0
    for passes in range(1, cfg.max_iterations + 1):
        perm = rng.permutation(xa.n_rows)
        violation = _kernels.svr_pass(
            xa.indptr, xa.indices, xa.data, qd, y, beta, w, perm, c, epsilon
        )
        if violation < cfg.tolerance:
            break
    model = LinearModel(
        weights=w[:-1].copy(), bias=float(w[-1]), c=c, epsilon=epsilon,
        task=TASK_REGRESSION, view=view, target=target,
    )
    if return_state:
        return model, SolverState(beta, passes, violation, violation < cfg.tolerance)
    return model


def train_svc(
    x: SparseMatrix,
    y,
    c: float,
    cfg: SolverConfig | None = None,
    view: FieldView | None = None,
    target: str | None = None,
    return_state: bool = False,
):
    """Fit a squared-hinge SVC on +1/-1 labels."""
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=np.float64)
    _check_training_inputs(x, y, c)
    classes = set(np.unique(y))
    if not classes <= {-1.0, 1.0}:
        raise ValueError("labels must be +1 or -1")
    if len(classes) < 2:
        raise ValueError("training data contains a single class")

    xa, qd = _augmented(x)
    qd = qd + 1.0 / (2.0 * c)
    alpha = np.zeros(xa.n_rows)
    w = np.zeros(xa.n_cols)
    rng = np.random.default_rng(cfg.seed)
    violation = np.inf
    passes = 0
    for passes in range(1, cfg.max_iterations + 1):
        perm = rng.permutation(xa.n_rows)
        violation = _kernels.svc_pass(
            xa.indptr, xa.indices, xa.data, qd, y, alpha, w, perm, c
        )
        if violation < cfg.tolerance:
            break
    model = LinearModel(
        weights=w[:-1].copy(), bias=float(w[-1]), c=c, epsilon=0.0,
        task=TASK_CLASSIFICATION, view=view, target=target,
    )
    if return_state:
        return model, SolverState(alpha, passes, violation, violation < cfg.tolerance)
    return model


def predict(model: LinearModel, x: SparseMatrix) -> np.ndarray:
    """Margin w . x_i + b per row (unclamped)."""
    if x.n_cols != model.n_features:
        raise ValueError(
            f"matrix has {x.n_cols} columns but model expects {model.n_features}"
        )
    return x.dot(model.weights) + model.bias


def top_weights(
    model: LinearModel,
    vocab: Vocabulary,
    k: int,
    sign: str = "positive",
) -> list[tuple[str, float]]:
    """The k most positive (or most negative) n-grams; ties break
    lexicographically."""
    if vocab.n_features != model.n_features:
        raise ValueError("vocabulary does not match model dimensionality")
    if sign not in ("positive", "negative"):
        raise ValueError("sign must be 'positive' or 'negative'")
    k = min(k, model.n_features)
    if k <= 0:
        return []
    pairs = list(zip(vocab.ngrams, model.weights.tolist()))
    if sign == "positive":
        pairs.sort(key=lambda p: (-p[1], p[0]))
    else:
        pairs.sort(key=lambda p: (p[1], p[0]))
    return pairs[:k]


@dataclass(frozen=True)
class TuneResult:
    best_c: float
    mse_by_c: dict[float, float] = field(repr=False)


def tune_c(
    x: SparseMatrix,
    y,
    grid=DEFAULT_C_GRID,
    folds: int = 5,
    cfg: SolverConfig | None = None,
    epsilon: float = 0.0,
) -> TuneResult:
    """Pick C by k-fold cross-validated MSE; near-ties go to the smaller C."""
    cfg = cfg or SolverConfig()
    grid = list(grid)
    if not grid:
        raise ValueError("empty C grid")
    y = np.asarray(y, dtype=np.float64)
    plan = make_folds(x.n_rows, folds, cfg.seed)
    mse_by_c: dict[float, float] = {}
    for c in grid:
        fold_mses = []
        for fold in range(plan.n_folds):
            train_idx = plan.train_rows(fold)
            test_idx = plan.fold_rows(fold)
            model = train_svr(x.take_rows(train_idx), y[train_idx], c, epsilon, cfg)
            residual = predict(model, x.take_rows(test_idx)) - y[test_idx]
            fold_mses.append(float(residual @ residual) / len(test_idx))
        mse_by_c[c] = float(np.mean(fold_mses))
    best_mse = min(mse_by_c.values())
    best_c = min(c for c, mse in mse_by_c.items() if mse <= best_mse * (1 + 1e-9) + 1e-15)
    return TuneResult(best_c=best_c, mse_by_c=mse_by_c)
