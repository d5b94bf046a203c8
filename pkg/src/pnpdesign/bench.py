"""Timing of the full-matrix and fast target-query pipelines against rating count."""

from __future__ import annotations

import time
import tracemalloc
from dataclasses import dataclass

import numpy as np

from .graph import FeatureCatalog, MembershipMatrix, RatingsMatrix, _csr
from .kernels import aggregate_fused
from .walks import PathWeights, TargetSet, aggregate_fast, fit_operators, infer_full


@dataclass(frozen=True)
class BenchRow:
    nnz: int
    method: str
    seconds: float
    peak_bytes: int


def random_instance(nnz: int, seed: int = 0, ratings_per_user: int = 20, features_per_movie: int = 5):
    """Random tripartite graph with ``nnz`` ratings.

    Users, movies and features all grow linearly with ``nnz`` so the average
    degrees stay fixed across the grid.
    """
    rng = np.random.default_rng(seed)
    u = max(2, nnz // ratings_per_user)
    m = max(2, nnz // (2 * ratings_per_user))
    f = max(2, m // 2)
    key = rng.choice(u * m, size=min(nnz, u * m), replace=False)
    rows, cols = np.divmod(key, m)
    vals = rng.integers(2, 11, size=len(key)) / 2.0
    R = _csr(rows, cols, vals, (u, m))
    k = min(features_per_movie, f)
    frows = np.repeat(np.arange(m), k)
    fcols = np.concatenate([rng.choice(f, size=k, replace=False) for _ in range(m)])
    F = _csr(frows, fcols, np.ones(len(frows)), (m, f))
    F.data[:] = 1.0
    ids = lambda n: np.arange(n, dtype=np.int64)  # noqa: E731
    ratings = RatingsMatrix(R, ids(u), ids(m))
    membership = MembershipMatrix(F, ids(m), FeatureCatalog(ids(f), np.full(f, "feature", dtype=object)))
    return ratings, membership


def run_fast(ratings, membership, target, weights, delta):
    return aggregate_fused(ratings, membership, target, weights, delta)[0]


def run_fast_sparse(ratings, membership, target, weights, delta):
    # same chains through scipy operator objects; fixed per-call overhead
    # dominates below ~1e5 ratings
    ops = fit_operators(ratings, membership, delta)
    return aggregate_fast(ops, target, weights).combined


def run_naive(ratings, membership, target, weights, delta):
    ops = fit_operators(ratings, membership, delta)
    return infer_full(ops, weights).values[target.indices].sum(axis=0)


METHODS = {"fast": run_fast, "fast-sparse": run_fast_sparse, "naive": run_naive}


def _time(fn, repeats: int):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    tracemalloc.start()
    fn()
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    return best, peak, out


def bench(
    grid=(1_000, 10_000, 100_000),
    methods=("fast", "naive"),
    seed: int = 0,
    repeats: int = 3,
    target_fraction: float = 0.1,
    weights: PathWeights = PathWeights(),
    delta: float = 0.5,
):
    """Best-of-``repeats`` wall time and peak traced memory per (nnz, method).

    Returns the rows and, per grid point, the max abs difference between the
    methods' outputs (a correctness check riding along with the timing).
    """
    rows, diffs = [], {}
    for nnz in grid:
        ratings, membership = random_instance(nnz, seed)
        rng = np.random.default_rng([seed, nnz])
        u = ratings.shape[0]
        n_t = max(1, int(round(target_fraction * u)))
        target = TargetSet.from_indices(rng.choice(u, size=n_t, replace=False), u)
        outs = {}
        for name in methods:
            fn = METHODS[name]
            secs, peak, out = _time(lambda: fn(ratings, membership, target, weights, delta), repeats)
            rows.append(BenchRow(int(ratings.nnz), name, secs, int(peak)))
            outs[name] = out
        if len(outs) > 1:
            vals = list(outs.values())
            diffs[int(ratings.nnz)] = float(max(np.abs(v - vals[0]).max() for v in vals[1:]))
    return rows, diffs


def loglog_slope(rows, method: str = "fast") -> float:
    pts = [(r.nnz, r.seconds) for r in rows if r.method == method]
    x = np.log10([p[0] for p in pts])
    y = np.log10([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def write_tsv(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("nnz\tmethod\tseconds\tpeak_bytes\n")
        for r in rows:
            fh.write(f"{r.nnz}\t{r.method}\t{r.seconds:.6g}\t{r.peak_bytes}\n")
