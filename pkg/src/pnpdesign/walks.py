"""Signed predefined-path walks from users to features.

Three walk shapes are supported, each started at a user and following
row-stochastic steps:

* two-step:           user -> movie -> feature
* user-based 4-step:  user -> movie -> user -> movie -> feature
* feature-based 4-step: user -> movie -> feature -> movie -> feature

User-movie steps are taken on either the positive (like) or the negative
(dislike) graph; movie-feature steps are unweighted and shared by both signs.
A signed score is the positive-graph probability minus the negative-graph
probability, so every entry lies in ``[-1, 1]``.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import (
    MembershipMatrix,
    RatingsMatrix,
    SignedSplit,
    TransitionOperator,
    dataset_hash,
    row_normalize,
    split_and_reweigh,
    user_means,
)

_log = logging.getLogger(__name__)

DEFAULT_DELTA = 0.5
DEFAULT_MEMORY_BUDGET = 2 * 1024**3  # bytes for the dense u x f output


class PathKind(enum.Enum):
    TWO_STEP = "2step"
    FOUR_STEP_USER = "4step-usr"
    FOUR_STEP_FEATURE = "4step-feat"


class UnknownUserError(KeyError):
    def __init__(self, offenders):
        self.offenders = list(offenders)
        super().__init__(f"unknown user ids: {self.offenders[:20]}")


class MemoryBudgetError(MemoryError):
    pass


@dataclass(frozen=True)
class PathWeights:
    alpha: float = 0.5
    beta: float = 0.2
    gamma: float = 0.3

    def __post_init__(self):
        w = (self.alpha, self.beta, self.gamma)
        if min(w) < 0:
            raise ValueError(f"path weights must be nonnegative, got {w}")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError(f"path weights must sum to 1, got {sum(w)}")

    def of(self, path: PathKind) -> float:
        return {
            PathKind.TWO_STEP: self.alpha,
            PathKind.FOUR_STEP_USER: self.beta,
            PathKind.FOUR_STEP_FEATURE: self.gamma,
        }[path]

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True, eq=False)
class SignOperators:
    """Transition operators of one sign's user-movie graph."""

    user_movie: TransitionOperator
    movie_user: TransitionOperator

    @classmethod
    def from_weights(cls, Q: sp.spmatrix) -> "SignOperators":
        Q = sp.csr_matrix(Q)
        return cls(row_normalize(Q), row_normalize(Q.T.tocsr()))


@dataclass(frozen=True, eq=False)
class MembershipOperators:
    movie_feature: TransitionOperator
    feature_movie: TransitionOperator

    @classmethod
    def from_membership(cls, F) -> "MembershipOperators":
        F = F.matrix if isinstance(F, MembershipMatrix) else sp.csr_matrix(F)
        return cls(row_normalize(F), row_normalize(F.T.tocsr()))


@dataclass(frozen=True, eq=False)
class WalkOperators:
    """Everything the walks need; immutable and shareable between queries."""

    positive: SignOperators
    negative: SignOperators
    membership: MembershipOperators
    delta: float = DEFAULT_DELTA
    user_ids: np.ndarray | None = None
    feature_ids: np.ndarray | None = None
    dataset_hash: str = ""
    _transposed: dict = field(default_factory=dict, repr=False)

    @property
    def n_users(self) -> int:
        return self.positive.user_movie.shape[0]

    @property
    def n_features(self) -> int:
        return self.membership.movie_feature.shape[1]

    def sign(self, s: str) -> SignOperators:
        return {"+": self.positive, "-": self.negative}[s]

    def transposed(self):
        """CSR copies of the transposed operators used by the backward matvec chains."""
        if not self._transposed:
            t = self._transposed
            for s in "+-":
                ops = self.sign(s)
                t["um" + s] = ops.user_movie.matrix.T.tocsr()
                t["mu" + s] = ops.movie_user.matrix.T.tocsr()
            t["mf"] = self.membership.movie_feature.matrix.T.tocsr()
            t["fm"] = self.membership.feature_movie.matrix.T.tocsr()
        return self._transposed


def build_operators(
    split: SignedSplit,
    membership,
    user_ids=None,
    feature_ids=None,
    data_hash: str = "",
) -> WalkOperators:
    F = membership.matrix if isinstance(membership, MembershipMatrix) else sp.csr_matrix(membership)
    if split.positive.shape != split.negative.shape:
        raise ValueError("positive and negative graphs differ in shape")
    if split.positive.shape[1] != F.shape[0]:
        raise ValueError(
            f"ratings have {split.positive.shape[1]} movies, membership has {F.shape[0]}"
        )
    if feature_ids is None and isinstance(membership, MembershipMatrix):
        feature_ids = membership.feature_ids
    return WalkOperators(
        positive=SignOperators.from_weights(split.positive),
        negative=SignOperators.from_weights(split.negative),
        membership=MembershipOperators.from_membership(F),
        delta=split.delta,
        user_ids=user_ids,
        feature_ids=feature_ids,
        dataset_hash=data_hash,
    )


def fit_operators(
    ratings: RatingsMatrix,
    membership: MembershipMatrix,
    delta: float = DEFAULT_DELTA,
    ties_positive: bool = True,
) -> WalkOperators:
    """Means, signed split and transition operators for aligned inputs."""
    if not np.array_equal(ratings.movie_ids, membership.movie_ids):
        raise ValueError("ratings and membership are not aligned on movies; call graph.align")
    split = split_and_reweigh(ratings, user_means(ratings), delta, ties_positive)
    return build_operators(
        split,
        membership,
        user_ids=ratings.user_ids,
        feature_ids=membership.feature_ids,
        data_hash=dataset_hash(ratings, membership),
    )


# ------------------------------------------------------------ full matrices


def _check_chain(*mats):
    for a, b in zip(mats, mats[1:]):
        if a.shape[1] != b.shape[0]:
            raise ValueError(f"dimension mismatch in walk chain: {a.shape} x {b.shape}")


def _tail(sign_ops: SignOperators, membership: MembershipOperators, path: PathKind):
    """The part of a walk after the first user->movie step, as an m x f operator."""
    mf = membership.movie_feature.matrix
    if path is PathKind.TWO_STEP:
        return mf
    if path is PathKind.FOUR_STEP_USER:
        mu, um = sign_ops.movie_user.matrix, sign_ops.user_movie.matrix
        _check_chain(mu, um, mf)
        return mu @ (um @ mf)
    if path is PathKind.FOUR_STEP_FEATURE:
        fm = membership.feature_movie.matrix
        _check_chain(mf, fm, mf)
        return mf @ (fm @ mf)
    raise ValueError(f"unknown path {path!r}")


def walk_scores_single_sign(
    sign_ops: SignOperators,
    membership: MembershipOperators,
    path: PathKind,
) -> np.ndarray:
    """Dense ``u x f`` probabilities that a ``path`` walk from user i ends at feature k."""
    um = sign_ops.user_movie.matrix
    tail = _tail(sign_ops, membership, path)
    _check_chain(um, tail)
    return np.asarray((um @ tail).todense())


def signed_path_scores(ops: WalkOperators, path: PathKind) -> np.ndarray:
    return walk_scores_single_sign(ops.positive, ops.membership, path) - walk_scores_single_sign(
        ops.negative, ops.membership, path
    )


@dataclass(frozen=True, eq=False)
class PreferenceMatrix:
    """Dense ``u x f`` signed user-feature preference scores."""

    values: np.ndarray
    weights: PathWeights
    delta: float
    dataset_hash: str = ""
    user_ids: np.ndarray | None = None
    feature_ids: np.ndarray | None = None

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ValueError("preference matrix must be 2-D")
        if v.size and (v.min() < -1 - 1e-12 or v.max() > 1 + 1e-12):
            raise ValueError("preference scores outside [-1, 1]")

    @property
    def shape(self):
        return self.values.shape


def combine_paths(W2, W4u, W4f, weights: PathWeights = PathWeights(), **provenance) -> PreferenceMatrix:
    W2, W4u, W4f = (np.asarray(w, dtype=np.float64) for w in (W2, W4u, W4f))
    if not (W2.shape == W4u.shape == W4f.shape):
        raise ValueError(f"shape mismatch: {W2.shape}, {W4u.shape}, {W4f.shape}")
    W = weights.alpha * W2 + weights.beta * W4u + weights.gamma * W4f
    provenance.setdefault("delta", float("nan"))
    return PreferenceMatrix(W, weights, **provenance)


def _combined_tails(ops: WalkOperators, weights: PathWeights):
    """Per-sign user->movie operators and the weighted m x f tail they multiply."""
    mb = ops.membership
    two = mb.movie_feature.matrix
    feat = _tail(ops.positive, mb, PathKind.FOUR_STEP_FEATURE)
    # combine tails per sign so each block needs one product per sign
    combo = {}
    for s in "+-":
        usr = _tail(ops.sign(s), mb, PathKind.FOUR_STEP_USER)
        combo[s] = sp.csr_matrix(weights.alpha * two + weights.beta * usr + weights.gamma * feat)
    P = {s: ops.sign(s).user_movie.matrix for s in "+-"}
    _check_chain(P["+"], combo["+"])
    return P, combo


def infer_rows(ops: WalkOperators, rows, weights: PathWeights = PathWeights()) -> np.ndarray:
    """Dense preference rows for the given internal user indices only."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= ops.n_users):
        raise UnknownUserError(rows[(rows < 0) | (rows >= ops.n_users)].tolist())
    P, combo = _combined_tails(ops, weights)
    W = (P["+"][rows] @ combo["+"]).toarray() - (P["-"][rows] @ combo["-"]).toarray()
    return np.clip(W, -1.0, 1.0, out=W)


def infer_full(
    ops: WalkOperators,
    weights: PathWeights = PathWeights(),
    workers: int = 1,
    block_rows: int = 4096,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> PreferenceMatrix:
    """Materialize the full preference matrix.

    Users are processed in fixed row blocks; each output row depends only on
    its own row of the user->movie operators, so the result is identical for
    any ``workers``.
    """
    u, f = ops.n_users, ops.n_features
    need = u * f * 8
    if need > memory_budget:
        raise MemoryBudgetError(
            f"dense {u}x{f} preference matrix needs {need / 2**20:.0f} MiB "
            f"(budget {memory_budget / 2**20:.0f} MiB); use aggregate_fast for target queries"
        )
    P, combo = _combined_tails(ops, weights)
    W = np.empty((u, f), dtype=np.float64)

    def run(lo):
        hi = min(lo + block_rows, u)
        pos = P["+"][lo:hi] @ combo["+"]
        neg = P["-"][lo:hi] @ combo["-"]
        # scores are differences of probabilities; clip only the round-off
        # that can carry a sum of path masses a few ulps past 1
        W[lo:hi] = np.clip(pos.toarray() - neg.toarray(), -1.0, 1.0)

    starts = range(0, u, block_rows)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(run, starts))
    else:
        for lo in starts:
            run(lo)
    return PreferenceMatrix(
        W,
        weights,
        ops.delta,
        dataset_hash=ops.dataset_hash,
        user_ids=ops.user_ids,
        feature_ids=ops.feature_ids,
    )


def infer_paths(ops: WalkOperators) -> dict:
    """The three signed path matrices, keyed by :class:`PathKind`."""
    return {p: signed_path_scores(ops, p) for p in PathKind}


# ------------------------------------------------------------- fast queries


@dataclass(frozen=True)
class TargetSet:
    """Targeted users as internal indices plus the matching indicator vector."""

    indices: np.ndarray
    n_users: int

    def __post_init__(self):
        if len(self.indices) == 0:
            raise ValueError("target set is empty")

    @classmethod
    def from_ids(cls, ids, user_ids: np.ndarray) -> "TargetSet":
        ids = np.unique(np.asarray(list(ids), dtype=np.int64))
        pos = np.searchsorted(user_ids, ids)
        pos_c = np.minimum(pos, len(user_ids) - 1)
        ok = (pos < len(user_ids)) & (user_ids[pos_c] == ids)
        if not ok.all():
            raise UnknownUserError(ids[~ok].tolist())
        return cls(pos_c.astype(np.int64), len(user_ids))

    @classmethod
    def from_indices(cls, indices, n_users: int) -> "TargetSet":
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= n_users):
            raise UnknownUserError(idx[(idx < 0) | (idx >= n_users)].tolist())
        return cls(idx, n_users)

    @classmethod
    def everyone(cls, n_users: int) -> "TargetSet":
        return cls(np.arange(n_users, dtype=np.int64), n_users)

    @property
    def indicator(self) -> np.ndarray:
        x = np.zeros(self.n_users)
        x[self.indices] = 1.0
        return x

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class FastAggregate:
    """Per-feature sums of preference scores over a target set."""

    combined: np.ndarray
    per_path: dict  # (sign, PathKind) -> 1-D array
    target: TargetSet
    weights: PathWeights

    def signed(self, path: PathKind) -> np.ndarray:
        return self.per_path[("+", path)] - self.per_path[("-", path)]


def aggregate_fast(
    ops: WalkOperators,
    target: TargetSet,
    weights: PathWeights = PathWeights(),
) -> FastAggregate:
    """Sum of the target users' preference rows via backward sparse matvecs.

    Never forms a ``u x f`` array; working memory is O(u + m + f).
    """
    if target.n_users != ops.n_users:
        raise ValueError("target set built for a different user axis")
    t = ops.transposed()
    x = target.indicator
    per = {}
    for s in "+-":
        a = t["um" + s] @ x  # mass on movies after the first step
        two = t["mf"] @ a
        per[(s, PathKind.TWO_STEP)] = two
        per[(s, PathKind.FOUR_STEP_USER)] = t["mf"] @ (t["um" + s] @ (t["mu" + s] @ a))
        per[(s, PathKind.FOUR_STEP_FEATURE)] = t["mf"] @ (t["fm"] @ two)
    combined = np.zeros(ops.n_features)
    for p in PathKind:
        combined += weights.of(p) * (per[("+", p)] - per[("-", p)])
    return FastAggregate(combined, per, target, weights)
