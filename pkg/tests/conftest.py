from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
import pytest

from baitpress.corpus import load_dataset
from baitpress.features import SparseMatrix

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

CORPUS_ENV_VAR = "BAITPRESS_CORPUS_DIR"


@pytest.fixture(scope="session")
def mini_paths() -> dict:
    base = FIXTURES / "mini"
    return {
        "instances": str(base / "instances.jsonl"),
        "truth": str(base / "truth.jsonl"),
        "manifest": json.loads((base / "manifest.json").read_text()),
    }


@pytest.fixture(scope="session")
def mini_dataset(mini_paths):
    return load_dataset(mini_paths["instances"], mini_paths["truth"])


@pytest.fixture(scope="session")
def fixture_result(mini_dataset):
    """One stacked training run on the mini corpus, shared across tests.

    seed=7 matches the bundled golden files.
    """
    from baitpress.ensemble import StackConfig, train_stacked

    return train_stacked(mini_dataset, StackConfig(seed=7))


def dense_to_sparse(dense) -> SparseMatrix:
    dense = np.asarray(dense, dtype=np.float64)
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for row in dense:
        nz = np.nonzero(row)[0]
        indices.extend(nz.tolist())
        data.extend(row[nz].tolist())
        indptr.append(len(indices))
    return SparseMatrix(
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        data=np.asarray(data, dtype=np.float64),
        n_rows=dense.shape[0],
        n_cols=dense.shape[1],
    )


def public_corpus_paths() -> dict | None:
    """Paths to the full 19,538-post corpus, when the user points at one."""
    root = os.environ.get(CORPUS_ENV_VAR)
    if not root:
        return None
    base = Path(root)
    instances = base / "instances.jsonl"
    truth = base / "truth.jsonl"
    if instances.is_file() and truth.is_file():
        return {"instances": str(instances), "truth": str(truth)}
    return None
