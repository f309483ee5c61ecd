"""Evaluation metrics and experiment tables.

MSE is the primary metric; RMSE is always reported alongside. AUC uses the
rank (Mann-Whitney) statistic, which is exact for finite samples: ties count
one half.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RegressionReport:
    mse: float
    rmse: float
    n: int
    wall_time_seconds: float = 0.0


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    tp: int
    fp: int
    tn: int
    fn: int


def mse(pred, truth) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("mse of empty vectors is undefined")
    diff = pred - truth
    return float(diff @ diff) / pred.size


def regression_report(pred, truth, wall_time_seconds: float = 0.0) -> RegressionReport:
    value = mse(pred, truth)
    return RegressionReport(
        mse=value, rmse=math.sqrt(value), n=len(np.atleast_1d(pred)),
        wall_time_seconds=wall_time_seconds,
    )


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, ties sharing the average rank of their group."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Probability that a random positive outranks a random negative."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    pos = labels > 0
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs both classes present")
    ranks = _average_ranks(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def classification_report(scores, labels, threshold: float = 0.0) -> ClassificationReport:
    """Threshold the scores and summarize against +1/-1 labels."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    predicted_pos = scores > threshold
    actual_pos = labels > 0
    tp = int(np.sum(predicted_pos & actual_pos))
    fp = int(np.sum(predicted_pos & ~actual_pos))
    tn = int(np.sum(~predicted_pos & ~actual_pos))
    fn = int(np.sum(~predicted_pos & actual_pos))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClassificationReport(
        accuracy=(tp + tn) / len(labels),
        precision=precision,
        recall=recall,
        f1=f1,
        auc=roc_auc(scores, labels),
        tp=tp, fp=fp, tn=tn, fn=fn,
    )


@dataclass(frozen=True)
class TableReport:
    text: str
    jsonl: str


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def table_report(rows: list[dict], columns: list[str] | None = None) -> TableReport:
    """Aligned plain-text table plus one JSON object per row."""
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    cells = [[_format_cell(row.get(col, "")) for col in columns] for row in rows]
    widths = [
        max([len(col)] + [len(r[i]) for r in cells]) for i, col in enumerate(columns)
    ]
    lines = []
    if columns:
        lines.append("  ".join(col.ljust(w) for col, w in zip(columns, widths)).rstrip())
        lines.append("  ".join("-" * w for w in widths))
        for r in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    text = "\n".join(lines) + ("\n" if lines else "")
    jsonl = "".join(
        json.dumps({col: row.get(col) for col in columns}, ensure_ascii=False) + "\n"
        for row in rows
    )
    return TableReport(text=text, jsonl=jsonl)
