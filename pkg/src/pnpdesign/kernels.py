"""Fused single-pass kernels for target queries straight from CSR arrays.

:func:`aggregate_fused` produces the same per-feature sums as
:func:`pnpdesign.walks.aggregate_fast` but computes user means, the signed
reweighing, all normalizers and the backward matvec chains inside compiled
loops, without building any intermediate sparse matrix objects.
"""

from __future__ import annotations

import numba
import numpy as np

from .graph import MembershipMatrix, RatingsMatrix
from .walks import PathKind, PathWeights, TargetSet

_PATHS = (PathKind.TWO_STEP, PathKind.FOUR_STEP_USER, PathKind.FOUR_STEP_FEATURE)


@numba.njit(cache=True)
def _signed_weights(indptr, data, delta, ties_positive):
    u = len(indptr) - 1
    weight = np.empty(len(data))
    positive = np.empty(len(data), dtype=np.bool_)
    for i in range(u):
        lo, hi = indptr[i], indptr[i + 1]
        if hi == lo:
            continue
        s = 0.0
        for e in range(lo, hi):
            s += data[e]
        mean = s / (hi - lo)
        for e in range(lo, hi):
            c = data[e] - mean
            weight[e] = 2.0 ** (delta * abs(c))
            positive[e] = c >= 0.0 if ties_positive else c > 0.0
    return weight, positive


@numba.njit(cache=True)
def _chains(indptr, indices, weight, positive, f_indptr, f_indices, n_movies, n_features, x, sign):
    u = len(indptr) - 1
    row_sum = np.zeros(u)
    col_sum = np.zeros(n_movies)
    for i in range(u):
        for e in range(indptr[i], indptr[i + 1]):
            if positive[e] == sign:
                row_sum[i] += weight[e]
                col_sum[indices[e]] += weight[e]

    movie_deg = np.zeros(n_movies)
    feat_deg = np.zeros(n_features)
    for j in range(n_movies):
        movie_deg[j] = f_indptr[j + 1] - f_indptr[j]
        for p in range(f_indptr[j], f_indptr[j + 1]):
            feat_deg[f_indices[p]] += 1.0

    # a = T_um^T x
    a = np.zeros(n_movies)
    for i in range(u):
        if x[i] == 0.0 or row_sum[i] == 0.0:
            continue
        scale = x[i] / row_sum[i]
        for e in range(indptr[i], indptr[i + 1]):
            if positive[e] == sign:
                a[indices[e]] += weight[e] * scale

    # b = T_mu^T a ; c = T_um^T b
    b = np.zeros(u)
    for i in range(u):
        acc = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            if positive[e] == sign:
                j = indices[e]
                if col_sum[j] > 0.0:
                    acc += weight[e] / col_sum[j] * a[j]
        b[i] = acc
    c = np.zeros(n_movies)
    for i in range(u):
        if b[i] == 0.0 or row_sum[i] == 0.0:
            continue
        scale = b[i] / row_sum[i]
        for e in range(indptr[i], indptr[i + 1]):
            if positive[e] == sign:
                c[indices[e]] += weight[e] * scale

    two = np.zeros(n_features)
    usr = np.zeros(n_features)
    for j in range(n_movies):
        if movie_deg[j] == 0.0:
            continue
        inv = 1.0 / movie_deg[j]
        for p in range(f_indptr[j], f_indptr[j + 1]):
            k = f_indices[p]
            two[k] += a[j] * inv
            usr[k] += c[j] * inv

    # feature -> movie -> feature leg on the two-step result
    d = np.zeros(n_movies)
    for j in range(n_movies):
        acc = 0.0
        for p in range(f_indptr[j], f_indptr[j + 1]):
            k = f_indices[p]
            acc += two[k] / feat_deg[k]
        d[j] = acc
    feat = np.zeros(n_features)
    for j in range(n_movies):
        if movie_deg[j] == 0.0:
            continue
        inv = 1.0 / movie_deg[j]
        for p in range(f_indptr[j], f_indptr[j + 1]):
            feat[f_indices[p]] += d[j] * inv
    return two, usr, feat


def aggregate_fused(
    ratings: RatingsMatrix,
    membership: MembershipMatrix,
    target: TargetSet,
    weights: PathWeights = PathWeights(),
    delta: float = 0.5,
    ties_positive: bool = True,
) -> tuple[np.ndarray, dict]:
    """Aggregated scores for ``target`` computed from raw ratings in one pass.

    Returns ``(combined, per_path)`` with the same layout as
    :class:`pnpdesign.walks.FastAggregate`.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    R, F = ratings.matrix, membership.matrix
    if R.shape[1] != F.shape[0]:
        raise ValueError(f"ratings have {R.shape[1]} movies, membership has {F.shape[0]}")
    if target.n_users != R.shape[0]:
        raise ValueError("target set built for a different user axis")
    w, pos = _signed_weights(R.indptr, R.data, float(delta), bool(ties_positive))
    x = target.indicator
    per = {}
    for s, flag in (("+", True), ("-", False)):
        out = _chains(R.indptr, R.indices, w, pos, F.indptr, F.indices, F.shape[0], F.shape[1], x, flag)
        for p, vec in zip(_PATHS, out):
            per[(s, p)] = vec
    combined = np.zeros(F.shape[1])
    for p in _PATHS:
        combined += weights.of(p) * (per[("+", p)] - per[("-", p)])
    return combined, per
