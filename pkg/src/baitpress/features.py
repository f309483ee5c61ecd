"""Bag-of-words features over 1-3-grams with a compressed sparse row matrix.

Vocabulary indices are assigned lexicographically over the kept n-grams, so
fitted vocabularies (and everything downstream) are byte-reproducible.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .textprep import FieldView, TokenSeq

NGRAM_ORDERS = (1, 2, 3)


@dataclass(frozen=True)
class Vocabulary:
    index: dict[str, int]
    min_df: int = 1
    view: FieldView | None = None
    ngrams: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        grams = [""] * len(self.index)
        for gram, idx in self.index.items():
            grams[idx] = gram
        object.__setattr__(self, "ngrams", tuple(grams))

    @property
    def n_features(self) -> int:
        return len(self.index)

    def to_tsv(self) -> str:
        return "".join(f"{gram}\t{idx}\n" for gram, idx in sorted(self.index.items()))

    @classmethod
    def from_tsv(cls, text: str, view: FieldView | None = None, min_df: int = 1) -> "Vocabulary":
        index = {}
        for line in text.splitlines():
            if not line:
                continue
            gram, _, idx = line.rpartition("\t")
            index[gram] = int(idx)
        return cls(index=index, min_df=min_df, view=view)


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray  # strictly increasing column indices
    values: np.ndarray  # positive counts

    def __post_init__(self):
        assert len(self.indices) == len(self.values)


@dataclass(frozen=True)
class SparseMatrix:
    """Row-major compressed sparse matrix (CSR) over numpy buffers."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    n_rows: int
    n_cols: int

    def row(self, i: int) -> SparseVector:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return SparseVector(indices=self.indices[lo:hi], values=self.data[lo:hi])

    def row_nnz(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def dot(self, w: np.ndarray) -> np.ndarray:
        """Matrix-vector product (prediction path)."""
        out = np.empty(self.n_rows)
        for i in range(self.n_rows):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i] = self.data[lo:hi] @ w[self.indices[lo:hi]]
        return out

    def take_rows(self, rows: np.ndarray) -> "SparseMatrix":
        """Submatrix with the given rows, in the given order."""
        lengths = self.indptr[1:][rows] - self.indptr[:-1][rows]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=self.indices.dtype)
        data = np.empty(int(indptr[-1]))
        for out_i, i in enumerate(rows):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            indices[indptr[out_i] : indptr[out_i + 1]] = self.indices[lo:hi]
            data[indptr[out_i] : indptr[out_i + 1]] = self.data[lo:hi]
        return SparseMatrix(indptr, indices, data, len(rows), self.n_cols)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols))
        for i in range(self.n_rows):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            dense[i, self.indices[lo:hi]] = self.data[lo:hi]
        return dense

    def with_bias_column(self) -> "SparseMatrix":
        """Append a constant-1 column (index n_cols) to every row."""
        nnz = self.nnz
        indptr = self.indptr + np.arange(self.n_rows + 1, dtype=self.indptr.dtype)
        indices = np.empty(nnz + self.n_rows, dtype=self.indices.dtype)
        data = np.empty(nnz + self.n_rows)
        for i in range(self.n_rows):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            new_lo = indptr[i]
            indices[new_lo : new_lo + (hi - lo)] = self.indices[lo:hi]
            indices[new_lo + (hi - lo)] = self.n_cols
            data[new_lo : new_lo + (hi - lo)] = self.data[lo:hi]
            data[new_lo + (hi - lo)] = 1.0
        return SparseMatrix(indptr, indices, data, self.n_rows, self.n_cols + 1)


def extract_ngrams(seq: TokenSeq) -> list[str]:
    """All contiguous 1-, 2- and 3-grams, grouped by order, space-joined."""
    grams = []
    for n in NGRAM_ORDERS:
        for i in range(len(seq) - n + 1):
            grams.append(" ".join(seq[i : i + n]))
    return grams


def count_ngrams(seq: TokenSeq) -> Counter:
    return Counter(extract_ngrams(seq))


def fit_vocabulary(
    corpus: Sequence[TokenSeq],
    min_df: int = 1,
    view: FieldView | None = None,
) -> Vocabulary:
    """Keep n-grams occurring in at least ``min_df`` distinct documents."""
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    return fit_vocabulary_from_counts([count_ngrams(seq) for seq in corpus], min_df, view)


def fit_vocabulary_from_counts(
    doc_counts: Sequence[Counter],
    min_df: int = 1,
    view: FieldView | None = None,
) -> Vocabulary:
    df: Counter = Counter()
    for counts in doc_counts:
        df.update(counts.keys())
    kept = sorted(gram for gram, n in df.items() if n >= min_df)
    return Vocabulary(index={gram: i for i, gram in enumerate(kept)}, min_df=min_df, view=view)


def transform(vocab: Vocabulary, seq: TokenSeq) -> SparseVector:
    """Count vector of the sequence's in-vocabulary n-grams."""
    return _vector_from_counts(vocab, count_ngrams(seq))


def _vector_from_counts(vocab: Vocabulary, counts: Counter) -> SparseVector:
    index = vocab.index
    cols = sorted(index[g] for g in counts.keys() & index.keys())
    grams = vocab.ngrams
    return SparseVector(
        indices=np.asarray(cols, dtype=np.int64),
        values=np.asarray([float(counts[grams[c]]) for c in cols]),
    )


def transform_matrix(vocab: Vocabulary, corpus: Sequence[TokenSeq]) -> SparseMatrix:
    return matrix_from_counts(vocab, [count_ngrams(seq) for seq in corpus])


def matrix_from_counts(vocab: Vocabulary, doc_counts: Iterable[Counter]) -> SparseMatrix:
    rows = [_vector_from_counts(vocab, counts) for counts in doc_counts]
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum([len(r.indices) for r in rows], out=indptr[1:])
    return SparseMatrix(
        indptr=indptr,
        indices=np.concatenate([r.indices for r in rows]) if rows else np.empty(0, np.int64),
        data=np.concatenate([r.values for r in rows]) if rows else np.empty(0, np.float64),
        n_rows=len(rows),
        n_cols=vocab.n_features,
    )


def default_min_df(n_docs: int) -> int:
    """Pruning default: drop singleton n-grams once the corpus is large."""
    return 2 if n_docs > 5000 else 1
