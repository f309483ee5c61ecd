#!/usr/bin/env python3
"""Regenerate the frozen regression outputs in tests/golden/.

Run from the repo root after any intentional behaviour change:

    python scripts/regen_goldens.py

Every value here is produced by the pipeline itself, so regenerate only after
the oracle-backed unit tests pass; the goldens then pin that verified
behaviour against future regressions.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

import numpy as np

from baitpress.corpus import load_dataset
from baitpress.ensemble import StackConfig, oof_predictions, score_posts, train_stacked
from baitpress.features import fit_vocabulary, transform_matrix
from baitpress.folds import make_folds
from baitpress.linear import SolverConfig, predict, train_svr
from baitpress.metrics import mse
from baitpress.textprep import FieldView, preprocess_field

GOLDEN = ROOT / "tests" / "golden"
MINI = ROOT / "tests" / "fixtures" / "mini"


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)
    ds = load_dataset(str(MINI / "instances.jsonl"), str(MINI / "truth.jsonl"))
    y_mean = np.asarray(ds.mean_targets())

    # 1) single linear model predictions (postText/mean, c=0.1, seed=7)
    tokens = [preprocess_field(p, FieldView.POST_TEXT) for p in ds.posts]
    vocab = fit_vocabulary(tokens, min_df=1, view=FieldView.POST_TEXT)
    x = transform_matrix(vocab, tokens)
    model = train_svr(x, y_mean, c=0.1, cfg=SolverConfig(seed=7))
    (GOLDEN / "linear_predict_postText_mean.json").write_text(
        json.dumps(predict(model, x).tolist()) + "\n"
    )

    # 2) out-of-fold column (postText/mean, c=0.1, 5 folds, seed=7)
    plan = make_folds(len(ds.posts), 5, seed=7)
    column = oof_predictions(
        ds, FieldView.POST_TEXT, "mean", c=0.1, plan=plan, cfg=SolverConfig(seed=7)
    )
    (GOLDEN / "oof_postText_mean_seed7.json").write_text(
        json.dumps(column.tolist()) + "\n"
    )

    # 3) tree-dependent outputs: per solver backend, because ~1e-13 meta
    # feature differences between backends flip tree split decisions
    import baitpress.linear as linear_mod
    from baitpress import _pykernels

    backends = {"python": _pykernels}
    try:
        from baitpress import _ckernels

        backends["cython"] = _ckernels
    except ImportError:
        print("note: compiled kernels not built; cython goldens not regenerated")

    for name, backend in sorted(backends.items()):
        linear_mod._kernels = backend
        result = train_stacked(ds, StackConfig(seed=7))
        scores = score_posts(result.model, ds.posts)
        (GOLDEN / f"stacked_scores_seed7.{name}.json").write_text(
            json.dumps({post_id: score for post_id, score in scores}, indent=0) + "\n"
        )
        eval_mse = mse([s for _, s in scores], y_mean)
        (GOLDEN / f"eval_mse_seed7.{name}.json").write_text(
            json.dumps({"mse": eval_mse}) + "\n"
        )

        # the CLI prediction file for the same seed, via the real surface
        with tempfile.TemporaryDirectory() as td:
            model_dir = Path(td) / "model"
            env = {"PYTHONPATH": str(ROOT / "src"), "PATH": "/usr/bin:/bin"}
            if name == "python":
                env["BAITPRESS_PURE_PYTHON"] = "1"
            subprocess.run(
                [sys.executable, "-m", "baitpress.cli", "train",
                 "--instances", str(MINI / "instances.jsonl"),
                 "--truth", str(MINI / "truth.jsonl"),
                 "--out", str(model_dir), "--seed", "7"],
                check=True, cwd=ROOT, capture_output=True, env=env,
            )
            out = Path(td) / "results.jsonl"
            subprocess.run(
                [sys.executable, "-m", "baitpress.cli", "predict",
                 "--model", str(model_dir),
                 "--instances", str(MINI / "instances.jsonl"),
                 "--out", str(out)],
                check=True, cwd=ROOT, capture_output=True, env=env,
            )
            (GOLDEN / f"predictions_seed7.{name}.jsonl").write_text(out.read_text())

    print(f"goldens written to {GOLDEN}")


if __name__ == "__main__":
    main()
