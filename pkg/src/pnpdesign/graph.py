"""Tripartite user-movie-feature graph: ingestion, filtering and signed split.

Ratings live in a sparse ``u x m`` matrix and movie-feature memberships in a
sparse binary ``m x f`` matrix. External ids are arbitrary nonnegative
integers; every structure keeps the sorted external ids of its axes so that
internal (dense, 0-based) indices can be mapped back.
"""

from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

_log = logging.getLogger(__name__)


class IngestError(ValueError):
    """Malformed or out-of-range input record.

    ``errors`` holds ``(line_number, message)`` pairs; line numbers are
    1-based positions in the record stream or file.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        head = "; ".join(f"line {ln}: {msg}" for ln, msg in self.errors[:5])
        more = f" (+{len(self.errors) - 5} more)" if len(self.errors) > 5 else ""
        super().__init__(head + more)


class DuplicateRatingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RatingRange:
    low: float = 1.0
    high: float = 5.0

    def contains(self, values):
        return (values >= self.low) & (values <= self.high)


def _lookup(ids: np.ndarray, query) -> np.ndarray:
    """Map external ids to positions in the sorted array ``ids``; -1 if absent."""
    query = np.asarray(query, dtype=np.int64)
    if len(ids) == 0:
        return np.full(query.shape, -1, dtype=np.int64)
    pos = np.minimum(np.searchsorted(ids, query), len(ids) - 1)
    return np.where(ids[pos] == query, pos, -1)


@dataclass(frozen=True, eq=False)
class RatingsMatrix:
    """Sparse ``u x m`` ratings; zero means absent."""

    matrix: sp.csr_matrix
    user_ids: np.ndarray
    movie_ids: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.shape != (len(self.user_ids), len(self.movie_ids)):
            raise ValueError("matrix shape does not match id arrays")
        if m.nnz and np.any(m.data == 0):
            raise ValueError("ratings matrix stores explicit zeros")

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def counts(self) -> np.ndarray:
        return np.diff(self.matrix.indptr)

    def user_index(self, ids) -> np.ndarray:
        return _lookup(self.user_ids, ids)

    def movie_index(self, ids) -> np.ndarray:
        return _lookup(self.movie_ids, ids)

    def triples(self):
        """Yield ``(user_id, movie_id, value)`` in row-major order."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            yield int(self.user_ids[r]), int(self.movie_ids[c]), float(v)


@dataclass(frozen=True, eq=False)
class FeatureCatalog:
    """Feature ids with their type labels; types partition the feature set."""

    feature_ids: np.ndarray
    types: np.ndarray  # object array of str, aligned with feature_ids

    def __post_init__(self):
        if len(self.feature_ids) != len(self.types):
            raise ValueError("feature_ids and types differ in length")
        if any(not t for t in self.types):
            raise ValueError("empty type label")

    def __len__(self):
        return len(self.feature_ids)

    def type_labels(self) -> list[str]:
        return sorted(set(self.types.tolist()))

    def indices_of(self, label: str) -> np.ndarray:
        return np.flatnonzero(self.types == label)

    def index(self, ids) -> np.ndarray:
        return _lookup(self.feature_ids, ids)

    def type_of(self, feature_id) -> str:
        i = int(self.index([feature_id])[0])
        if i < 0:
            raise KeyError(feature_id)
        return str(self.types[i])

    def subset(self, keep: np.ndarray) -> "FeatureCatalog":
        return FeatureCatalog(self.feature_ids[keep], self.types[keep])


@dataclass(frozen=True, eq=False)
class MembershipMatrix:
    """Sparse binary ``m x f`` movie-feature membership."""

    matrix: sp.csr_matrix
    movie_ids: np.ndarray
    catalog: FeatureCatalog

    def __post_init__(self):
        m = self.matrix
        if m.shape != (len(self.movie_ids), len(self.catalog)):
            raise ValueError("matrix shape does not match id arrays")
        if m.nnz and not np.all(m.data == 1):
            raise ValueError("membership entries must be 0/1")

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def feature_ids(self) -> np.ndarray:
        return self.catalog.feature_ids

    def movie_index(self, ids) -> np.ndarray:
        return _lookup(self.movie_ids, ids)


@dataclass(frozen=True)
class UserStats:
    """Per-user mean rating over nonzeros. ``mean`` is NaN for unrated users."""

    mean: np.ndarray
    count: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return self.count > 0


@dataclass(frozen=True, eq=False)
class SignedSplit:
    """Positive (like) and negative (dislike) reweighed user-movie graphs."""

    positive: sp.csr_matrix
    negative: sp.csr_matrix
    delta: float


@dataclass(frozen=True, eq=False)
class TransitionOperator:
    matrix: sp.csr_matrix
    dangling: np.ndarray  # bool, rows without out-edges

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class FilterThresholds:
    min_users_per_movie: int = 20
    min_features_per_movie: int = 2
    min_movies_per_user: int = 20
    min_movies_per_feature: int = 2


@dataclass(frozen=True, eq=False)
class FilterResult:
    ratings: RatingsMatrix | None
    membership: MembershipMatrix | None
    rounds: int
    removed: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.ratings is None


# ---------------------------------------------------------------- ingestion


def _csr(rows, cols, vals, shape) -> sp.csr_matrix:
    m = sp.csr_matrix((np.asarray(vals, dtype=np.float64), (rows, cols)), shape=shape)
    m.sum_duplicates()
    m.sort_indices()
    return m


def ingest_ratings(
    records: Iterable[Sequence],
    rating_range: RatingRange = RatingRange(),
    duplicates: str = "last",
    first_line: int = 1,
) -> RatingsMatrix:
    """Build a :class:`RatingsMatrix` from ``(user_id, movie_id, value)`` records.

    ``duplicates`` is ``"last"`` (keep last occurrence, warn), ``"first"`` or
    ``"error"``. Out-of-range values and negative ids raise
    :class:`IngestError` listing every offending line.
    """
    if duplicates not in ("last", "first", "error"):
        raise ValueError(f"unknown duplicate policy {duplicates!r}")
    users, movies, values, errors = [], [], [], []
    for n, rec in enumerate(records, start=first_line):
        try:
            uid, mid, val = int(rec[0]), int(rec[1]), float(rec[2])
        except (TypeError, ValueError, IndexError) as exc:
            errors.append((n, f"malformed record {rec!r}: {exc}"))
            continue
        if uid < 0 or mid < 0:
            errors.append((n, f"negative id in {rec!r}"))
        elif not (rating_range.low <= val <= rating_range.high):
            errors.append((n, f"rating {val} outside [{rating_range.low}, {rating_range.high}]"))
        else:
            users.append(uid)
            movies.append(mid)
            values.append(val)
    if errors:
        raise IngestError(errors)
    if not users:
        raise IngestError([(first_line, "empty rating stream")])

    users = np.asarray(users, dtype=np.int64)
    movies = np.asarray(movies, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    user_ids, rows = np.unique(users, return_inverse=True)
    movie_ids, cols = np.unique(movies, return_inverse=True)

    key = rows * len(movie_ids) + cols
    if duplicates == "first":
        _, keep = np.unique(key, return_index=True)
    else:
        _, rev_idx = np.unique(key[::-1], return_index=True)
        keep = len(key) - 1 - rev_idx
    n_dup = len(key) - len(keep)
    if n_dup:
        if duplicates == "error":
            seen, dup_lines = set(), []
            for i, k in enumerate(key.tolist()):
                if k in seen:
                    dup_lines.append((first_line + i, "duplicate (user, movie) pair"))
                seen.add(k)
            raise IngestError(dup_lines)
        warnings.warn(
            f"{n_dup} duplicate ratings resolved (keep {duplicates})",
            DuplicateRatingWarning,
            stacklevel=2,
        )
    keep = np.sort(keep)
    mat = _csr(rows[keep], cols[keep], values[keep], (len(user_ids), len(movie_ids)))
    return RatingsMatrix(mat, user_ids, movie_ids)


def ingest_membership(records: Iterable[Sequence], first_line: int = 1) -> MembershipMatrix:
    """Build a membership matrix from ``(movie_id, feature_id, type_label)`` records.

    A feature listed with two different type labels is an error; repeated
    identical edges collapse to a single membership.
    """
    movies, feats, errors = [], [], []
    ftype: dict[int, str] = {}
    for n, rec in enumerate(records, start=first_line):
        try:
            mid, fid, label = int(rec[0]), int(rec[1]), str(rec[2]).strip()
        except (TypeError, ValueError, IndexError) as exc:
            errors.append((n, f"malformed record {rec!r}: {exc}"))
            continue
        if mid < 0 or fid < 0:
            errors.append((n, f"negative id in {rec!r}"))
            continue
        if not label:
            errors.append((n, "empty type label"))
            continue
        prev = ftype.setdefault(fid, label)
        if prev != label:
            errors.append((n, f"feature {fid} has types {prev!r} and {label!r}"))
            continue
        movies.append(mid)
        feats.append(fid)
    if errors:
        raise IngestError(errors)
    if not movies:
        raise IngestError([(first_line, "empty membership stream")])
    movie_ids, rows = np.unique(np.asarray(movies, dtype=np.int64), return_inverse=True)
    feature_ids, cols = np.unique(np.asarray(feats, dtype=np.int64), return_inverse=True)
    types = np.array([ftype[int(k)] for k in feature_ids], dtype=object)
    mat = _csr(rows, cols, np.ones(len(rows)), (len(movie_ids), len(feature_ids)))
    mat.data[:] = 1.0
    return MembershipMatrix(mat, movie_ids, FeatureCatalog(feature_ids, types))


def _read_tsv(path, ncols: int):
    path = Path(path)
    out = []
    errors = []
    with path.open(encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != ncols:
                errors.append((n, f"expected {ncols} tab-separated fields, got {len(parts)}"))
                continue
            out.append((n, parts))
    if errors:
        raise IngestError(errors)
    return out


def _with_lines(rows, convert):
    """Convert parsed rows, re-raising errors with the file's line numbers."""
    records, lines = [], []
    for n, parts in rows:
        records.append(parts)
        lines.append(n)
    try:
        return convert(records)
    except IngestError as exc:
        mapped = [(lines[ln - 1] if 0 < ln <= len(lines) else ln, msg) for ln, msg in exc.errors]
        raise IngestError(mapped) from None


def read_ratings(path, rating_range: RatingRange = RatingRange(), duplicates: str = "last"):
    """Read a ``user_id<TAB>movie_id<TAB>rating`` file."""
    rows = _read_tsv(path, 3)
    return _with_lines(rows, lambda recs: ingest_ratings(recs, rating_range, duplicates))


def read_membership(path):
    """Read a ``movie_id<TAB>feature_id<TAB>type_label`` file."""
    rows = _read_tsv(path, 3)
    return _with_lines(rows, ingest_membership)


def write_ratings(path, ratings: RatingsMatrix) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for uid, mid, val in ratings.triples():
            fh.write(f"{uid}\t{mid}\t{val:g}\n")


def write_membership(path, membership: MembershipMatrix) -> None:
    coo = membership.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    cat = membership.catalog
    with open(path, "w", encoding="utf-8") as fh:
        for r, c in zip(coo.row[order], coo.col[order]):
            fh.write(f"{membership.movie_ids[r]}\t{cat.feature_ids[c]}\t{cat.types[c]}\n")


# -------------------------------------------------------------- alignment


def align(ratings: RatingsMatrix, membership: MembershipMatrix):
    """Re-index both matrices onto the union of their movie ids.

    Movies present on only one side get an empty row/column on the other.
    """
    movie_ids = np.union1d(ratings.movie_ids, membership.movie_ids)
    if np.array_equal(movie_ids, ratings.movie_ids) and np.array_equal(
        movie_ids, membership.movie_ids
    ):
        return ratings, membership
    rcoo = ratings.matrix.tocoo()
    rcols = _lookup(movie_ids, ratings.movie_ids[rcoo.col])
    R = _csr(rcoo.row, rcols, rcoo.data, (ratings.shape[0], len(movie_ids)))
    fcoo = membership.matrix.tocoo()
    frows = _lookup(movie_ids, membership.movie_ids[fcoo.row])
    F = _csr(frows, fcoo.col, fcoo.data, (len(movie_ids), membership.shape[1]))
    return (
        RatingsMatrix(R, ratings.user_ids, movie_ids),
        MembershipMatrix(F, movie_ids, membership.catalog),
    )


def dataset_hash(ratings: RatingsMatrix, membership: MembershipMatrix | None = None) -> str:
    """Content hash over ids, sparse structure and values (hex sha256, 16 chars)."""
    h = hashlib.sha256()
    R = ratings.matrix
    for arr in (ratings.user_ids, ratings.movie_ids, R.indptr, R.indices, R.data):
        h.update(np.ascontiguousarray(arr).tobytes())
    if membership is not None:
        F = membership.matrix
        cat = membership.catalog
        for arr in (membership.movie_ids, cat.feature_ids, F.indptr, F.indices):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update("\x1f".join(cat.types.tolist()).encode())
    return h.hexdigest()[:16]


# ------------------------------------------------------------ statistics


def user_means(ratings: RatingsMatrix | sp.spmatrix) -> UserStats:
    R = ratings.matrix if isinstance(ratings, RatingsMatrix) else sp.csr_matrix(ratings)
    count = np.diff(R.indptr)
    rows = np.repeat(np.arange(R.shape[0]), count)
    total = np.bincount(rows, weights=R.data, minlength=R.shape[0])
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return UserStats(mean=mean, count=count)


def split_and_reweigh(
    ratings: RatingsMatrix | sp.spmatrix,
    stats: UserStats,
    delta: float,
    ties_positive: bool = True,
) -> SignedSplit:
    """Split ratings into like/dislike graphs weighted by ``2**(delta*|r - mean|)``.

    A rating equal to the user's mean goes to the positive graph unless
    ``ties_positive`` is False.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    R = ratings.matrix if isinstance(ratings, RatingsMatrix) else sp.csr_matrix(ratings)
    rows = np.repeat(np.arange(R.shape[0]), np.diff(R.indptr))
    centered = R.data - stats.mean[rows]
    weight = np.exp2(delta * np.abs(centered))
    pos = centered >= 0 if ties_positive else centered > 0

    def part(mask):
        m = sp.csr_matrix((weight[mask], R.indices[mask], _indptr(rows[mask], R.shape[0])),
                          shape=R.shape)
        return m

    return SignedSplit(positive=part(pos), negative=part(~pos), delta=float(delta))


def _indptr(rows: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(np.bincount(rows, minlength=n)))).astype(np.int64)


def row_normalize(M: sp.spmatrix) -> TransitionOperator:
    """Divide each row by its sum; zero-sum rows stay empty and are marked dangling."""
    M = sp.csr_matrix(M, dtype=np.float64, copy=True)
    if M.nnz and M.data.min() < 0:
        raise ValueError("negative edge weight in transition source")
    M.eliminate_zeros()
    sums = np.asarray(M.sum(axis=1)).ravel()
    dangling = sums == 0
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=~dangling)
    M.data *= np.repeat(scale, np.diff(M.indptr))
    return TransitionOperator(matrix=M, dangling=dangling)


# ------------------------------------------------------------- filtering


def _degrees(R: sp.csr_matrix, F: sp.csr_matrix, users, movies, feats):
    """Degrees of every node in the subgraph induced by the alive masks."""
    Rm = sp.diags(users.astype(float)) @ R @ sp.diags(movies.astype(float))
    Fm = sp.diags(movies.astype(float)) @ F @ sp.diags(feats.astype(float))
    Rm = (Rm != 0).astype(np.int64)
    Fm = (Fm != 0).astype(np.int64)
    return (
        np.asarray(Rm.sum(axis=1)).ravel(),  # movies per user
        np.asarray(Rm.sum(axis=0)).ravel(),  # raters per movie
        np.asarray(Fm.sum(axis=1)).ravel(),  # features per movie
        np.asarray(Fm.sum(axis=0)).ravel(),  # movies per feature
    )


def filter_core(
    ratings: RatingsMatrix,
    membership: MembershipMatrix,
    thresholds: FilterThresholds = FilterThresholds(),
) -> FilterResult:
    """Iteratively peel users, movies and features below the degree thresholds.

    Every node violating a threshold in the current induced subgraph is
    removed at once, and the scan repeats until nothing changes. All four
    conditions are monotone in the node sets, so the fixed point is the
    unique maximal subgraph satisfying them regardless of removal order.
    """
    ratings, membership = align(ratings, membership)
    R, F = ratings.matrix, membership.matrix
    users = np.ones(R.shape[0], bool)
    movies = np.ones(R.shape[1], bool)
    feats = np.ones(F.shape[1], bool)
    t = thresholds
    rounds = 0
    while True:
        per_user, per_movie, fpm, mpf = _degrees(R, F, users, movies, feats)
        new_users = users & (per_user >= t.min_movies_per_user)
        new_movies = movies & (per_movie >= t.min_users_per_movie) & (fpm >= t.min_features_per_movie)
        new_feats = feats & (mpf >= t.min_movies_per_feature)
        if (
            np.array_equal(new_users, users)
            and np.array_equal(new_movies, movies)
            and np.array_equal(new_feats, feats)
        ):
            break
        users, movies, feats = new_users, new_movies, new_feats
        rounds += 1

    removed = {
        "users": int((~users).sum()),
        "movies": int((~movies).sum()),
        "features": int((~feats).sum()),
    }
    _log.debug("filter_core: %d rounds, removed %s", rounds, removed)
    if not (users.any() and movies.any() and feats.any()):
        return FilterResult(None, None, rounds, removed)
    Rk = R[users][:, movies].tocsr()
    Fk = F[movies][:, feats].tocsr()
    Rk.sort_indices()
    Fk.sort_indices()
    return FilterResult(
        RatingsMatrix(Rk, ratings.user_ids[users], ratings.movie_ids[movies]),
        MembershipMatrix(Fk, membership.movie_ids[movies], membership.catalog.subset(feats)),
        rounds,
        removed,
    )


def summary(ratings: RatingsMatrix, membership: MembershipMatrix) -> dict:
    """Entity and edge counts in the layout of a dataset statistics table."""
    return {
        "movies": int(ratings.shape[1]),
        "users": int(ratings.shape[0]),
        "features": int(membership.shape[1]),
        "ratings": int(ratings.nnz),
        "memberships": int(membership.matrix.nnz),
    }
