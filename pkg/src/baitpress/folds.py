"""Shuffled round-robin cross-validation fold assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FoldPlan:
    n_folds: int
    assignment: np.ndarray  # row index -> fold index
    seed: int

    def fold_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)


def make_folds(n_rows: int, n_folds: int, seed: int) -> FoldPlan:
    """Partition rows into folds whose sizes differ by at most one."""
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if n_rows < n_folds:
        raise ValueError(f"cannot split {n_rows} rows into {n_folds} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_rows)
    assignment = np.empty(n_rows, dtype=np.int64)
    assignment[order] = np.arange(n_rows, dtype=np.int64) % n_folds
    return FoldPlan(n_folds=n_folds, assignment=assignment, seed=seed)
