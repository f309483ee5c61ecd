"""Command-line surface: train, predict, evaluate, tune, inspect.

Exit codes are a stable contract for scripting: 0 success, 2 input error,
3 model-compatibility error, 4 data mismatch between files. Option
precedence is CLI flags > --config file > built-in defaults; the defaults
reproduce the mean+std submission configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .corpus import CorpusFormatError, dataset_stats, load_dataset, load_instances, load_truth
from .ensemble import (
    FEATURE_SETS,
    FEATURES_MEAN_STD,
    FEATURES_MEAN_STD_EXTERNAL,
    TARGET_MEAN,
    TARGET_STD,
    VIEW_ORDER,
    StackConfig,
    column_name,
    feature_importance,
    score_posts,
    train_external_classifier,
    train_stacked,
)
from .features import default_min_df, fit_vocabulary, transform_matrix
from .linear import DEFAULT_C_GRID, SolverConfig, top_weights, tune_c
from .metrics import regression_report, table_report
from .serialize import ModelFormatError, load_stacked, save_stacked, write_text_atomic
from .textprep import FieldView, preprocess_field

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODEL = 3
EXIT_MISMATCH = 4


class InputError(Exception):
    pass


class DataMismatchError(Exception):
    pass


DEFAULTS = {
    "features": FEATURES_MEAN_STD,
    "folds": 5,
    "seed": 0,
    "jobs": 1,
    "min_df": None,
    "grid": ",".join(str(c) for c in DEFAULT_C_GRID),
    "trees": 100,
    "min_samples_split": 5,
    "tolerance": 1e-4,
    "max_iter": 1000,
    "external_c": 1.0,
    "top_k": 10,
    "target": "both",
    "view": None,
    "c_values": None,
    "epsilon": 0.0,
    # paths may come from the config file as well
    "instances": None,
    "truth": None,
    "model": None,
    "out": None,
    "results": None,
    "external_corpus": None,
}


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("config file must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in obj.items()}


def _resolve(args: argparse.Namespace, file_config: dict):
    """Apply flag > config-file > default precedence in place."""
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, file_config.get(key, default))


def _parse_grid(spec: str) -> list[float]:
    try:
        grid = [float(part) for part in str(spec).split(",") if part.strip()]
    except ValueError as exc:
        raise InputError(f"bad --grid value: {spec!r}") from exc
    if not grid:
        raise InputError("empty --grid")
    return grid


def _require(args: argparse.Namespace, *names: str):
    for name in names:
        if getattr(args, name, None) is None:
            raise InputError(f"--{name.replace('_', '-')} is required")


def _load_dataset(args):
    try:
        return load_dataset(args.instances, args.truth)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc
    except CorpusFormatError as exc:
        raise InputError(f"corpus error: {exc}") from exc


def _parse_c_values(spec) -> dict:
    """Per-pair C overrides: {"postText/mean": 0.2, ...} or "postText/mean=0.2,..."."""
    if not spec:
        return {}
    if isinstance(spec, str):
        try:
            spec = dict(part.split("=") for part in spec.split(",") if part.strip())
        except ValueError as exc:
            raise InputError("bad --c-values value: expected view/target=C pairs") from exc
    overrides = {}
    for key, value in spec.items():
        view_name, _, target = str(key).partition("/")
        try:
            overrides[(FieldView(view_name), target)] = float(value)
        except ValueError as exc:
            raise InputError(f"bad C override {key!r}: {exc}") from exc
        if target not in (TARGET_MEAN, TARGET_STD):
            raise InputError(f"bad C override target in {key!r}")
    return overrides


def _stack_config(args) -> StackConfig:
    return StackConfig(
        n_folds=int(args.folds),
        seed=int(args.seed),
        feature_set=args.features,
        n_trees=int(args.trees),
        min_samples_split=int(args.min_samples_split),
        min_df=None if args.min_df is None else int(args.min_df),
        c_values=_parse_c_values(args.c_values),
        epsilon=float(args.epsilon),
        tolerance=float(args.tolerance),
        max_iterations=int(args.max_iter),
        n_jobs=int(args.jobs),
    )


def _load_external_corpus(path: str) -> tuple[list[str], list[float]]:
    texts, labels = [], []
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise InputError(f"external corpus line {line_no}: {exc.msg}") from exc
                if "text" not in obj or "label" not in obj:
                    raise InputError(
                        f'external corpus line {line_no}: need "text" and "label" keys'
                    )
                texts.append(str(obj["text"]))
                labels.append(1.0 if float(obj["label"]) > 0 else -1.0)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc
    if not texts:
        raise InputError("external corpus is empty")
    return texts, labels


def cmd_train(args) -> int:
    _require(args, "instances", "truth", "out")
    if args.features not in FEATURE_SETS:
        raise InputError(f"--features must be one of {', '.join(FEATURE_SETS)}")
    ds = _load_dataset(args)
    config = _stack_config(args)

    external = None
    if args.features == FEATURES_MEAN_STD_EXTERNAL:
        if not args.external_corpus:
            raise InputError("--external-corpus is required with --features mean+std+external")
        texts, labels = _load_external_corpus(args.external_corpus)
        external = train_external_classifier(
            texts, labels, c=float(args.external_c), cfg=config.solver_config(),
            min_df=config.min_df,
        )

    start = time.perf_counter()
    result = train_stacked(ds, config, external=external)
    elapsed = time.perf_counter() - start

    try:
        save_stacked(result.model, args.out)
    except FileExistsError as exc:
        raise InputError(str(exc)) from exc

    stats = dataset_stats(ds)
    rows = []
    for col in result.model.meta_columns:
        view_name, _, target = col.partition("/")
        if target == "external":
            continue
        view = FieldView(view_name)
        rows.append(
            {
                "model": col,
                "c": config.c_for(view, target),
                "oof_mse": result.report.oof_mse[col],
                "seconds": result.report.base_seconds.get(col, 0.0),
            }
        )
    report = table_report(rows, ["model", "c", "oof_mse", "seconds"])
    print(f"trained on {stats.n_posts} posts "
          f"({stats.n_clickbait} clickbait / {stats.n_no_clickbait} not)")
    print(report.text, end="")
    print(f"stacked cv mse (clamped): {result.report.stacked_cv_mse:.6g}")
    print(f"model written to {args.out} in {elapsed:.1f}s")
    return EXIT_OK


def cmd_predict(args) -> int:
    _require(args, "model", "instances", "out")
    model = load_stacked(args.model)
    try:
        posts = load_instances(args.instances)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc
    except CorpusFormatError as exc:
        raise InputError(f"corpus error: {exc}") from exc
    scored = score_posts(model, posts)
    lines = "".join(
        json.dumps({"id": post_id, "clickbaitScore": score}) + "\n"
        for post_id, score in scored
    )
    write_text_atomic(args.out, lines)
    print(f"wrote {len(scored)} scores to {args.out}")
    return EXIT_OK


def _load_results(path: str) -> dict[str, float]:
    results: dict[str, float] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise InputError(f"results line {line_no}: {exc.msg}") from exc
                if "id" not in obj or "clickbaitScore" not in obj:
                    raise InputError(
                        f'results line {line_no}: need "id" and "clickbaitScore"'
                    )
                results[str(obj["id"])] = float(obj["clickbaitScore"])
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc
    return results


def cmd_evaluate(args) -> int:
    _require(args, "results", "truth")
    results = _load_results(args.results)
    try:
        truth = load_truth(args.truth)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc
    except CorpusFormatError as exc:
        raise InputError(f"truth error: {exc}") from exc

    for post_id in results:
        if post_id not in truth:
            raise DataMismatchError(f"id {post_id!r} in results but not in truth")
    for post_id in truth:
        if post_id not in results:
            raise DataMismatchError(f"id {post_id!r} in truth but not in results")
    if not results:
        raise InputError("results file is empty")

    ids = list(results.keys())
    pred = np.array([results[i] for i in ids])
    target = np.array([truth[i].mean for i in ids])
    report = regression_report(pred, target)
    print(f"n={report.n}  mse={report.mse:.6g}  rmse={report.rmse:.6g}")

    rows = [{"subset": "all", "n": report.n, "mse": report.mse, "rmse": report.rmse}]
    if args.per_class:
        for cls in ("clickbait", "no-clickbait"):
            mask = np.array([truth[i].truth_class == cls for i in ids])
            if mask.any():
                sub = regression_report(pred[mask], target[mask])
                rows.append({"subset": cls, "n": sub.n, "mse": sub.mse, "rmse": sub.rmse})
                print(f"  {cls}: n={sub.n}  mse={sub.mse:.6g}  rmse={sub.rmse:.6g}")
    if args.out:
        write_text_atomic(args.out, table_report(rows, ["subset", "n", "mse", "rmse"]).jsonl)
    return EXIT_OK


def _tune_pairs(args):
    views = [FieldView(args.view)] if args.view else list(VIEW_ORDER)
    targets = [args.target] if args.target in (TARGET_MEAN, TARGET_STD) else [TARGET_MEAN, TARGET_STD]
    return [(v, t) for v in views for t in targets]


def cmd_tune(args) -> int:
    _require(args, "instances", "truth")
    ds = _load_dataset(args)
    grid = _parse_grid(args.grid)
    cfg = SolverConfig(
        tolerance=float(args.tolerance), max_iterations=int(args.max_iter), seed=int(args.seed)
    )
    rows = []
    for view, target in _tune_pairs(args):
        tokens = [preprocess_field(p, view) for p in ds.posts]
        min_df = int(args.min_df) if args.min_df is not None else default_min_df(len(tokens))
        vocab = fit_vocabulary(tokens, min_df, view)
        x = transform_matrix(vocab, tokens)
        y = ds.mean_targets() if target == TARGET_MEAN else ds.std_targets()
        start = time.perf_counter()
        result = tune_c(x, y, grid, int(args.folds), cfg, epsilon=float(args.epsilon))
        rows.append(
            {
                "view": view.value,
                "target": target,
                "best_c": result.best_c,
                "mse": result.mse_by_c[result.best_c],
                "seconds": time.perf_counter() - start,
            }
        )
        detail = "  ".join(f"c={c:g}:{m:.5f}" for c, m in result.mse_by_c.items())
        print(f"{column_name(view, target)}: {detail}")
    report = table_report(rows, ["view", "target", "best_c", "mse", "seconds"])
    print(report.text, end="")
    if args.out:
        write_text_atomic(args.out, report.jsonl)
    return EXIT_OK


def cmd_inspect(args) -> int:
    _require(args, "model")
    model = load_stacked(args.model)
    k = int(args.top_k)
    if k > 0:
        for col in model.meta_columns:
            linear_model = model.linear_models.get(col)
            if linear_model is None:
                continue
            view = FieldView(col.partition("/")[0])
            vocab = model.vocabularies[view]
            print(f"== {col}")
            for label, sign in (("positive", "positive"), ("negative", "negative")):
                pairs = top_weights(linear_model, vocab, k, sign)
                print(f"  top {label}:")
                for gram, weight in pairs:
                    print(f"    {weight:+.6f}  {gram}")
    importances = feature_importance(model.trees)
    print("== meta-feature importances (split fractions)")
    named = sorted(
        ((model.meta_columns[f], frac) for f, frac in importances.items()),
        key=lambda kv: (-kv[1], kv[0]),
    )
    for col, frac in named:
        view_name, _, target = col.partition("/")
        display = FieldView(view_name).display_name if view_name != "external" else view_name
        print(f"  {display} {target}: {frac:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baitpress",
        description="Clickbaitness scoring: stacked linear SVR models over text views.",
    )
    parser.add_argument("--version", action="version", version=f"baitpress {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--folds", type=int, default=None)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--min-df", dest="min_df", type=int, default=None)
        p.add_argument("--epsilon", type=float, default=None, help="SVR tube width")
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)

    p_train = sub.add_parser("train", help="train and serialize a stacked model")
    p_train.add_argument("--instances")
    p_train.add_argument("--truth")
    p_train.add_argument("--out", help="model directory to create")
    p_train.add_argument("--features", choices=FEATURE_SETS, default=None)
    p_train.add_argument("--trees", type=int, default=None)
    p_train.add_argument("--min-samples-split", dest="min_samples_split", type=int, default=None)
    p_train.add_argument(
        "--c-values", dest="c_values", default=None,
        help="per-pair C overrides, e.g. postText/mean=0.2,targetTitle/std=0.01",
    )
    p_train.add_argument("--external-corpus", dest="external_corpus", default=None)
    p_train.add_argument("--external-c", dest="external_c", type=float, default=None)
    add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="score posts with a trained model")
    p_predict.add_argument("--model")
    p_predict.add_argument("--instances")
    p_predict.add_argument("--out", help="results file (one JSON object per line)")
    add_common(p_predict)
    p_predict.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="score a results file against truth")
    p_eval.add_argument("--results")
    p_eval.add_argument("--truth")
    p_eval.add_argument("--out", help="optional report file (JSON lines)")
    p_eval.add_argument("--per-class", dest="per_class", action="store_true")
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_tune = sub.add_parser("tune", help="cross-validated C search per view/target")
    p_tune.add_argument("--instances")
    p_tune.add_argument("--truth")
    p_tune.add_argument("--out", help="optional table file (JSON lines)")
    p_tune.add_argument("--grid", default=None, help="comma-separated C values")
    p_tune.add_argument("--view", choices=[v.value for v in FieldView], default=None)
    p_tune.add_argument("--target", choices=[TARGET_MEAN, TARGET_STD, "both"], default=None)
    add_common(p_tune)
    p_tune.set_defaults(func=cmd_tune)

    p_inspect = sub.add_parser("inspect", help="top weights and meta importances")
    p_inspect.add_argument("--model")
    p_inspect.add_argument("--top-k", dest="top_k", type=int, default=None)
    add_common(p_inspect)
    p_inspect.set_defaults(func=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _resolve(args, _load_config_file(getattr(args, "config", None)))
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelFormatError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except DataMismatchError as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
