"""Stacked-model directory serialization.

Layout (documented in docs/formats.md): a manifest, one vocabulary TSV per
view, one binary file per linear model (JSON header line + little-endian
float64 weights), and one trees file (JSON header line + per-tree preorder
node records). Directories are written atomically (temp dir + rename) and
all content is byte-deterministic for a given model.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import ExternalModel, ExtraTreesModel, StackedModel, Tree, preprocess_digest
from .features import Vocabulary
from .linear import LinearModel
from .textprep import FieldView

MANIFEST_FORMAT = "baitpress-stacked"
LINEAR_FORMAT = "baitpress-linear"
TREES_FORMAT = "baitpress-trees"
FORMAT_VERSION = 1

# Preorder node record: kind (0 leaf, 1 internal), feature, threshold,
# left/right child offsets, leaf/node value, training sample count.
NODE_DTYPE = np.dtype(
    [
        ("kind", "<u1"),
        ("feature", "<i4"),
        ("threshold", "<f8"),
        ("left", "<i4"),
        ("right", "<i4"),
        ("value", "<f8"),
        ("n_samples", "<i8"),
    ]
)


class ModelFormatError(ValueError):
    """Model directory is missing, corrupt, or built for a different setup."""


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def dump_linear(model: LinearModel) -> bytes:
    header = _dumps(
        {
            "format": LINEAR_FORMAT,
            "version": FORMAT_VERSION,
            "task": model.task,
            "view": model.view.value if model.view else None,
            "target": model.target,
            "c": model.c,
            "epsilon": model.epsilon,
            "n_features": model.n_features,
            "bias": model.bias,
        }
    )
    return header.encode("utf-8") + b"\n" + model.weights.astype("<f8").tobytes()


def load_linear(blob: bytes) -> LinearModel:
    newline = blob.find(b"\n")
    if newline < 0:
        raise ModelFormatError("linear model file has no header line")
    try:
        header = json.loads(blob[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"bad linear model header: {exc}") from exc
    if header.get("format") != LINEAR_FORMAT or header.get("version") != FORMAT_VERSION:
        raise ModelFormatError("unsupported linear model format/version")
    weights = np.frombuffer(blob[newline + 1 :], dtype="<f8")
    if len(weights) != header["n_features"]:
        raise ModelFormatError(
            f"weight array has {len(weights)} entries, header says {header['n_features']}"
        )
    return LinearModel(
        weights=weights.astype(np.float64),
        bias=float(header["bias"]),
        c=float(header["c"]),
        epsilon=float(header["epsilon"]),
        task=header["task"],
        view=FieldView(header["view"]) if header["view"] else None,
        target=header["target"],
    )


def _tree_records(tree: Tree) -> np.ndarray:
    records = np.empty(tree.n_nodes, dtype=NODE_DTYPE)
    records["kind"] = (tree.feature >= 0).astype("<u1")
    records["feature"] = tree.feature
    records["threshold"] = tree.threshold
    records["left"] = tree.left
    records["right"] = tree.right
    records["value"] = tree.value
    records["n_samples"] = tree.n_samples
    return records


def dump_trees(model: ExtraTreesModel) -> bytes:
    header = _dumps(
        {
            "format": TREES_FORMAT,
            "version": FORMAT_VERSION,
            "n_trees": model.n_trees,
            "n_features": model.n_features,
            "min_samples_split": model.min_samples_split,
            "seed": model.seed,
        }
    )
    parts = [header.encode("utf-8") + b"\n"]
    for tree in model.trees:
        parts.append(np.uint64(tree.n_nodes).astype("<u8").tobytes())
        parts.append(_tree_records(tree).tobytes())
    return b"".join(parts)


def load_trees(blob: bytes) -> ExtraTreesModel:
    newline = blob.find(b"\n")
    if newline < 0:
        raise ModelFormatError("trees file has no header line")
    try:
        header = json.loads(blob[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"bad trees header: {exc}") from exc
    if header.get("format") != TREES_FORMAT or header.get("version") != FORMAT_VERSION:
        raise ModelFormatError("unsupported trees format/version")
    offset = newline + 1
    trees = []
    for _ in range(header["n_trees"]):
        n_nodes = int(np.frombuffer(blob, dtype="<u8", count=1, offset=offset)[0])
        offset += 8
        records = np.frombuffer(blob, dtype=NODE_DTYPE, count=n_nodes, offset=offset)
        offset += n_nodes * NODE_DTYPE.itemsize
        feature = records["feature"].astype(np.int32)
        feature[records["kind"] == 0] = -1
        trees.append(
            Tree(
                feature=feature,
                threshold=records["threshold"].astype(np.float64),
                left=records["left"].astype(np.int32),
                right=records["right"].astype(np.int32),
                value=records["value"].astype(np.float64),
                n_samples=records["n_samples"].astype(np.int64),
            )
        )
    return ExtraTreesModel(
        trees=trees,
        n_features=header["n_features"],
        min_samples_split=header["min_samples_split"],
        seed=header["seed"],
    )


def _config_digest(manifest: dict) -> str:
    keyed = {k: v for k, v in manifest.items() if k not in ("config_digest", "files")}
    return hashlib.sha256(_dumps(keyed).encode("utf-8")).hexdigest()


def _linear_filename(column: str) -> str:
    return "linear_" + column.replace("/", "_") + ".bin"


def save_stacked(model: StackedModel, path: str | Path) -> None:
    """Write the model directory; refuses to overwrite an existing one."""
    path = Path(path)
    if path.exists():
        raise FileExistsError(f"model directory {path} already exists")
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=path.name + ".tmp-", dir=path.parent))
    try:
        files: dict[str, str] = {}
        for view, vocab in sorted(model.vocabularies.items(), key=lambda kv: kv[0].value):
            name = f"vocab_{view.value}.tsv"
            (tmp / name).write_text(vocab.to_tsv(), encoding="utf-8")
            files[f"vocab/{view.value}"] = name
        for column, linear_model in sorted(model.linear_models.items()):
            name = _linear_filename(column)
            (tmp / name).write_bytes(dump_linear(linear_model))
            files[f"linear/{column}"] = name
        (tmp / "trees.bin").write_bytes(dump_trees(model.trees))
        files["trees"] = "trees.bin"
        if model.external is not None:
            (tmp / "vocab_external.tsv").write_text(
                model.external.vocab.to_tsv(), encoding="utf-8"
            )
            (tmp / "linear_external.bin").write_bytes(dump_linear(model.external.model))
            files["vocab/external"] = "vocab_external.tsv"
            files["linear/external"] = "linear_external.bin"

        manifest = {
            "format": MANIFEST_FORMAT,
            "version": FORMAT_VERSION,
            "package_version": __version__,
            "feature_set": model.feature_set,
            "meta_columns": list(model.meta_columns),
            "seed": model.seed,
            "n_folds": model.n_folds,
            "preprocess_digest": model.digest,
            "min_df": {v.value: model.vocabularies[v].min_df for v in model.vocabularies},
            "files": files,
        }
        manifest["config_digest"] = _config_digest(manifest)
        (tmp / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        os.replace(tmp, path)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def load_stacked(path: str | Path, check_digest: bool = True) -> StackedModel:
    """Read a model directory back; raises :class:`ModelFormatError` when the
    format version or the preprocessing configuration does not match."""
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise ModelFormatError(f"{path} is not a model directory (no manifest.json)")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupt manifest: {exc}") from exc
    if manifest.get("format") != MANIFEST_FORMAT or manifest.get("version") != FORMAT_VERSION:
        raise ModelFormatError("unsupported model format/version")
    if check_digest and manifest.get("preprocess_digest") != preprocess_digest():
        raise ModelFormatError(
            "model was built with a different preprocessing configuration "
            "(stopword list/tokenizer mismatch)"
        )

    files = manifest["files"]
    vocabularies = {}
    linear_models = {}
    external_vocab = None
    external_model = None
    for key, name in files.items():
        blob_path = path / name
        if not blob_path.is_file():
            raise ModelFormatError(f"missing model file {name}")
        if key.startswith("vocab/"):
            view_name = key.split("/", 1)[1]
            min_df = manifest.get("min_df", {}).get(view_name, 1)
            vocab = Vocabulary.from_tsv(
                blob_path.read_text(encoding="utf-8"),
                view=None if view_name == "external" else FieldView(view_name),
                min_df=min_df,
            )
            if view_name == "external":
                external_vocab = vocab
            else:
                vocabularies[FieldView(view_name)] = vocab
        elif key.startswith("linear/"):
            column = key.split("/", 1)[1]
            model = load_linear(blob_path.read_bytes())
            if column == "external":
                external_model = model
            else:
                linear_models[column] = model
    trees = load_trees((path / files["trees"]).read_bytes())

    external = None
    if external_model is not None and external_vocab is not None:
        external = ExternalModel(model=external_model, vocab=external_vocab)

    for column, model in linear_models.items():
        view_name = column.partition("/")[0]
        vocab = vocabularies.get(FieldView(view_name))
        if vocab is None or vocab.n_features != model.n_features:
            raise ModelFormatError(f"vocabulary/model dimension mismatch for {column}")

    return StackedModel(
        vocabularies=vocabularies,
        linear_models=linear_models,
        trees=trees,
        meta_columns=tuple(manifest["meta_columns"]),
        feature_set=manifest["feature_set"],
        digest=manifest["preprocess_digest"],
        seed=manifest["seed"],
        n_folds=manifest["n_folds"],
        external=external,
    )


def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
