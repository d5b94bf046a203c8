"""Like/dislike classification with per-user AUC, and design-quality scoring."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .design import Design, design_cardinality
from .graph import (
    MembershipMatrix,
    RatingsMatrix,
    UserStats,
    split_and_reweigh,
    user_means,
)
from .walks import DEFAULT_DELTA, PathWeights, PreferenceMatrix, TargetSet, build_operators, infer_full

_log = logging.getLogger(__name__)


# ------------------------------------------------------------------ labels


@dataclass(frozen=True)
class LikeLabels:
    """Binary like labels on the support of a ratings matrix (COO layout)."""

    rows: np.ndarray
    cols: np.ndarray
    labels: np.ndarray

    @property
    def like_fraction(self) -> float:
        return float(self.labels.mean()) if len(self.labels) else float("nan")


def _coo(R) -> tuple:
    R = R.matrix if isinstance(R, RatingsMatrix) else sp.csr_matrix(R)
    rows = np.repeat(np.arange(R.shape[0]), np.diff(R.indptr))
    return rows, R.indices.copy(), R.data.copy()


def label_likes(R_train, stats: UserStats) -> LikeLabels:
    """``1`` where a rating is at or above its user's mean, else ``0``."""
    rows, cols, vals = _coo(R_train)
    labels = (vals >= stats.mean[rows]).astype(np.int8)
    return LikeLabels(rows, cols, labels)


def predict_movie_scores(W, membership, users, movies) -> np.ndarray:
    """``score(i, j) = sum_k W[i, k] * F[j, k]`` for each (user, movie) pair."""
    W = W.values if isinstance(W, PreferenceMatrix) else np.asarray(W)
    F = membership.matrix if isinstance(membership, MembershipMatrix) else sp.csr_matrix(membership)
    users = np.asarray(users, dtype=np.int64)
    movies = np.asarray(movies, dtype=np.int64)
    rows = F[movies]
    owner = np.repeat(np.arange(len(movies)), np.diff(rows.indptr))
    contrib = W[users[owner], rows.indices] * rows.data
    return np.bincount(owner, weights=contrib, minlength=len(movies))


# --------------------------------------------------------------------- AUC


def auc(scores, labels) -> float:
    """Mann-Whitney AUC with midranks for tied scores."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative label")
    ranks = rankdata(scores)  # average method gives midranks
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class AucReport:
    """Per-user AUC summary.

    ``mean``/``std`` are over users (each user's AUC averaged across the folds
    where it was defined); ``fold_means``/``fold_std`` are over folds.
    """

    per_user: dict  # user index -> AUC
    mean: float
    std: float
    excluded_single_class: int = 0
    skipped_no_train: int = 0
    fold_means: list = field(default_factory=list)
    fold_std: float = float("nan")
    per_fold: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "mean_auc": self.mean,
            "std_auc_users": self.std,
            "fold_means": list(self.fold_means),
            "std_auc_folds": self.fold_std,
            "users_scored": len(self.per_user),
            "excluded_single_class": self.excluded_single_class,
            "skipped_no_train": self.skipped_no_train,
            "params": dict(self.params),
        }


def per_user_auc(users, scores, labels) -> tuple[dict, int]:
    """AUC per user; returns ``(aucs, n_single_class_users)``."""
    users = np.asarray(users)
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    order = np.argsort(users, kind="stable")
    u_sorted = users[order]
    bounds = np.flatnonzero(np.diff(u_sorted)) + 1
    out, single = {}, 0
    for grp in np.split(order, bounds):
        if len(grp) == 0:
            continue
        lab = labels[grp]
        if lab.all() or not lab.any():
            single += 1
            continue
        out[int(users[grp[0]])] = auc(scores[grp], lab)
    return out, single


def summarize(aucs: dict, single: int = 0) -> AucReport:
    vals = np.array([aucs[k] for k in sorted(aucs)])
    mean = float(vals.mean()) if len(vals) else float("nan")
    std = float(vals.std()) if len(vals) else float("nan")
    return AucReport(dict(aucs), mean, std, excluded_single_class=single)


# ---------------------------------------------------------- cross validation


@dataclass(frozen=True)
class FoldPlan:
    """Fold index of every stored rating, in CSR order of the ratings matrix."""

    k: int
    seed: int
    assignment: np.ndarray

    @classmethod
    def build(cls, ratings, k: int = 5, seed: int = 0) -> "FoldPlan":
        """Spread each user's ratings round-robin over ``k`` folds after a seeded shuffle."""
        if k < 2:
            raise ValueError("need at least two folds")
        R = ratings.matrix if isinstance(ratings, RatingsMatrix) else sp.csr_matrix(ratings)
        rng = np.random.default_rng(seed)
        assign = np.empty(R.nnz, dtype=np.int64)
        for i in range(R.shape[0]):
            lo, hi = R.indptr[i], R.indptr[i + 1]
            n = hi - lo
            if n == 0:
                continue
            offset = rng.integers(k)
            assign[lo + rng.permutation(n)] = (np.arange(n) + offset) % k
        return cls(k, seed, assign)

    def masks(self, fold: int):
        test = self.assignment == fold
        return ~test, test


def _subset(R: sp.csr_matrix, keep: np.ndarray) -> sp.csr_matrix:
    rows = np.repeat(np.arange(R.shape[0]), np.diff(R.indptr))
    out = sp.csr_matrix((R.data[keep], (rows[keep], R.indices[keep])), shape=R.shape)
    out.sort_indices()
    return out


@dataclass
class FoldResult:
    fold: int
    aucs: dict
    single_class: int
    skipped_no_train: int


def train_preferences(R_train, membership, weights: PathWeights, delta: float, ties_positive=True):
    """Preference matrix learned from training ratings only."""
    stats = user_means(R_train)
    split = split_and_reweigh(R_train, stats, delta, ties_positive)
    ops = build_operators(split, membership)
    return infer_full(ops, weights), stats


def run_fold(
    ratings,
    membership,
    plan: FoldPlan,
    fold: int,
    weights: PathWeights = PathWeights(),
    delta: float = DEFAULT_DELTA,
    shuffle_labels: bool = False,
    ties_positive: bool = True,
) -> FoldResult:
    R = ratings.matrix if isinstance(ratings, RatingsMatrix) else sp.csr_matrix(ratings)
    train, test = plan.masks(fold)
    R_train = _subset(R, train)
    W, stats = train_preferences(R_train, membership, weights, delta, ties_positive)

    rows = np.repeat(np.arange(R.shape[0]), np.diff(R.indptr))[test]
    cols = R.indices[test]
    vals = R.data[test]
    has_train = stats.count[rows] > 0
    skipped = int(len(np.unique(rows[~has_train])))
    rows, cols, vals = rows[has_train], cols[has_train], vals[has_train]
    labels = vals >= stats.mean[rows]
    if shuffle_labels:
        rng = np.random.default_rng([plan.seed, fold, 1])
        labels = labels.copy()
        for u in np.unique(rows):
            sel = np.flatnonzero(rows == u)
            labels[sel] = rng.permutation(labels[sel])
    scores = predict_movie_scores(W, membership, rows, cols)
    aucs, single = per_user_auc(rows, scores, labels)
    return FoldResult(fold, aucs, single, skipped)


def cross_validate(
    ratings,
    membership,
    weights: PathWeights = PathWeights(),
    delta: float = DEFAULT_DELTA,
    k: int = 5,
    seed: int = 0,
    folds=None,
    workers: int = 1,
    shuffle_labels: bool = False,
    ties_positive: bool = True,
) -> AucReport:
    """k-fold CV of like/dislike prediction with per-user AUC.

    Means, the signed split and the preference matrix of each fold come from
    that fold's training ratings only. ``folds`` restricts which folds run.
    """
    plan = FoldPlan.build(ratings, k, seed)
    todo = list(range(k)) if folds is None else list(folds)

    def go(f):
        return run_fold(ratings, membership, plan, f, weights, delta, shuffle_labels, ties_positive)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(go, todo))
    else:
        results = [go(f) for f in todo]

    per_user: dict = {}
    for res in results:  # fold order is fixed, so accumulation is deterministic
        for u, a in res.aucs.items():
            per_user.setdefault(u, []).append(a)
    user_auc = {u: float(np.mean(v)) for u, v in sorted(per_user.items())}
    report = summarize(user_auc)
    report.excluded_single_class = sum(r.single_class for r in results)
    report.skipped_no_train = sum(r.skipped_no_train for r in results)
    report.fold_means = [float(np.mean(list(r.aucs.values()))) if r.aucs else float("nan") for r in results]
    report.fold_std = float(np.std(report.fold_means))
    report.per_fold = [dict(r.aucs) for r in results]
    report.params = {
        "alpha": weights.alpha,
        "beta": weights.beta,
        "gamma": weights.gamma,
        "delta": delta,
        "k": k,
        "seed": seed,
        "folds": todo,
    }
    return report


# ---------------------------------------------------------- design baselines


def _target_rows(ratings, target: TargetSet) -> sp.csr_matrix:
    R = ratings.matrix if isinstance(ratings, RatingsMatrix) else sp.csr_matrix(ratings)
    return R[target.indices]


def movie_means(ratings, target: TargetSet) -> np.ndarray:
    """Mean rating of each movie over targeted raters; 0 where none rated it."""
    Rt = _target_rows(ratings, target)
    total = np.asarray(Rt.sum(axis=0)).ravel()
    count = np.asarray((Rt != 0).sum(axis=0)).ravel()
    return np.divide(total, count, out=np.zeros_like(total), where=count > 0)


def popularity_scores(ratings, membership, target: TargetSet) -> np.ndarray:
    F = membership.matrix if isinstance(membership, MembershipMatrix) else sp.csr_matrix(membership)
    v = np.asarray((_target_rows(ratings, target) != 0).sum(axis=0)).ravel().astype(float)
    return F.T @ v


def top_rated_scores(ratings, membership, target: TargetSet) -> np.ndarray:
    F = membership.matrix if isinstance(membership, MembershipMatrix) else sp.csr_matrix(membership)
    col = np.asarray(F.sum(axis=0)).ravel()
    inv = np.divide(1.0, col, out=np.zeros_like(col), where=col > 0)
    Fn = F @ sp.diags(inv)
    return Fn.T @ movie_means(ratings, target)


def baseline_popular(ratings, membership: MembershipMatrix, target, caps: dict) -> Design:
    d = design_cardinality(popularity_scores(ratings, membership, target), membership.catalog, caps)
    d.method = "popular"
    return d


def baseline_top(ratings, membership: MembershipMatrix, target, caps: dict) -> Design:
    d = design_cardinality(top_rated_scores(ratings, membership, target), membership.catalog, caps)
    d.method = "top"
    return d


def cosine_to_movies(x: np.ndarray, membership) -> np.ndarray:
    F = membership.matrix if isinstance(membership, MembershipMatrix) else sp.csr_matrix(membership)
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("cosine similarity undefined for an all-zero design vector")
    norms = np.sqrt(np.asarray(F.multiply(F).sum(axis=1)).ravel())
    dots = F @ x
    return np.divide(dots, norms * nx, out=np.zeros_like(dots), where=norms > 0)


def knn_design_score(
    design,
    membership,
    means: np.ndarray,
    k: int = 20,
    weighted: bool = False,
    include: np.ndarray | None = None,
) -> float:
    """Score a design by the mean rating of its ``k`` most cosine-similar movies.

    ``design`` is a :class:`Design` or a binary feature vector. Neighbors
    are ranked by similarity, ties by ascending movie index. The weighted
    variant averages with similarity weights and falls back to the plain
    mean if every neighbor has similarity zero.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n_feat = membership.shape[1]
    x = design.vector(n_feat) if isinstance(design, Design) else np.asarray(design, dtype=float)
    sims = cosine_to_movies(x, membership)
    cand = np.arange(len(sims)) if include is None else np.flatnonzero(include)
    order = cand[np.lexsort((cand, -sims[cand]))][:k]
    r = means[order]
    if weighted:
        s = sims[order]
        if s.sum() > 0:
            return float((s * r).sum() / s.sum())
    return float(r.mean())


def compare_designs(designs: dict, membership, means: np.ndarray, k: int = 20, include=None) -> dict:
    """kNN and weighted-kNN scores for several named designs."""
    out = {}
    for name, d in designs.items():
        out[name] = {
            "knn": knn_design_score(d, membership, means, k, False, include),
            "wknn": knn_design_score(d, membership, means, k, True, include),
        }
    return out
