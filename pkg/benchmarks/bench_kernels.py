#!/usr/bin/env python3
"""Benchmark the compiled solver core against the pure-Python fallback.

Generates synthetic sparse bag-of-words-like regression/classification
problems, trains with both kernel backends, and reports wall time, speedup,
and the relative objective difference (the two backends must agree).

    python benchmarks/bench_kernels.py            # full sizes
    python benchmarks/bench_kernels.py --quick    # small sizes for CI
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import baitpress.linear as linear_mod
from baitpress import _pykernels
from baitpress.features import SparseMatrix
from baitpress.linear import SolverConfig, train_svc, train_svr

try:
    from baitpress import _ckernels
except ImportError:
    _ckernels = None


def synthetic_problem(rng, n_rows, n_cols, nnz_per_row):
    """Counts-valued sparse matrix with a planted linear signal."""
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    indices = []
    data = []
    for i in range(n_rows):
        cols = np.unique(rng.integers(0, n_cols, size=nnz_per_row))
        indices.append(np.sort(cols))
        data.append(rng.integers(1, 4, size=len(cols)).astype(np.float64))
        indptr[i + 1] = indptr[i] + len(cols)
    x = SparseMatrix(
        indptr=indptr,
        indices=np.concatenate(indices),
        data=np.concatenate(data),
        n_rows=n_rows,
        n_cols=n_cols,
    )
    w_true = rng.normal(size=n_cols) * (rng.random(n_cols) < 0.05)
    y = x.dot(w_true)
    y = (y - y.mean()) / max(y.std(), 1e-9) * 0.2 + 0.3
    return x, np.clip(y, 0.0, 1.0)


def run_backend(backend, task, x, y, c, cfg):
    linear_mod._kernels = backend
    start = time.perf_counter()
    if task == "svr":
        model, state = train_svr(x, y, c, 0.0, cfg, return_state=True)
    else:
        labels = np.where(y > np.median(y), 1.0, -1.0)
        labels[0], labels[1] = 1.0, -1.0
        model, state = train_svc(x, labels, c, cfg, return_state=True)
    elapsed = time.perf_counter() - start
    return model, state, elapsed


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="small sizes")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled kernels not built; run `python setup.py build_ext --inplace`")
        print("benchmarking the pure-Python backend against itself is pointless; exiting")
        raise SystemExit(1)

    rng = np.random.default_rng(args.seed)
    if args.quick:
        sizes = [(500, 2_000, 30), (1_000, 10_000, 60)]
        passes = 60
    else:
        sizes = [(2_000, 50_000, 60), (5_000, 200_000, 120), (19_538, 500_000, 200)]
        passes = 120
    cfg = SolverConfig(tolerance=1e-4, max_iterations=passes, seed=7)

    header = f"{'task':4}  {'rows':>6}  {'cols':>7}  {'nnz/row':>7}  {'cython':>9}  {'python':>9}  {'speedup':>7}  {'rel diff':>9}"
    print(header)
    print("-" * len(header))
    for n_rows, n_cols, nnz in sizes:
        x, y = synthetic_problem(rng, n_rows, n_cols, nnz)
        for task in ("svr", "svc"):
            _, state_c, t_c = run_backend(_ckernels, task, x, y, 0.1, cfg)
            _, state_p, t_p = run_backend(_pykernels, task, x, y, 0.1, cfg)
            # both backends run the same algorithm; violations must agree
            rel = abs(state_c.max_violation - state_p.max_violation) / max(
                state_c.max_violation, 1e-12
            )
            print(
                f"{task:4}  {n_rows:>6}  {n_cols:>7}  {nnz:>7}  "
                f"{t_c:>8.2f}s  {t_p:>8.2f}s  {t_p / max(t_c, 1e-9):>6.1f}x  {rel:>9.2e}"
            )


if __name__ == "__main__":
    main()
