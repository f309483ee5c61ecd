"""Clickbait scoring: sparse bag-of-words linear SVR base models per text
view, stacked with an extremely-randomized-trees meta-regressor."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    CLICKBAIT,
    NO_CLICKBAIT,
    CorpusFormatError,
    Dataset,
    Post,
    TruthLabel,
    dataset_stats,
    derive_class,
    load_dataset,
    load_instances,
    load_truth,
    parse_instances,
    parse_truth,
)
from .ensemble import (  # noqa: F401
    ExtraTreesModel,
    StackConfig,
    StackedModel,
    feature_importance,
    oof_predictions,
    predict_extratrees,
    score_posts,
    train_extratrees,
    train_stacked,
)
from .features import (  # noqa: F401
    SparseMatrix,
    SparseVector,
    Vocabulary,
    extract_ngrams,
    fit_vocabulary,
    transform,
    transform_matrix,
)
from .folds import FoldPlan, make_folds  # noqa: F401
from .linear import (  # noqa: F401
    SOLVER_BACKEND,
    LinearModel,
    SolverConfig,
    predict,
    top_weights,
    train_svc,
    train_svr,
    tune_c,
)
from .metrics import mse, regression_report, roc_auc, table_report  # noqa: F401
from .porter import porter_stem  # noqa: F401
from .textprep import (  # noqa: F401
    FieldView,
    dedupe_sentences,
    preprocess_field,
    remove_stopwords,
    strip_html,
    tokenize,
)
