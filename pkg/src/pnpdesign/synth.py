"""Planted-preference synthetic ratings for benchmarks and end-to-end checks.

Every user belongs to a latent group; each group prefers a random subset of
the features. A user likes a movie iff the movie carries at least one of their
group's preferred features, flipped with probability ``noise``. Liked movies
are rated 1 to 2 points above a personal baseline, disliked ones 1 to 2
points below, on the configured rating grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import (
    FeatureCatalog,
    MembershipMatrix,
    RatingsMatrix,
    _csr,
    write_membership,
    write_ratings,
)

DEFAULT_FEATURES = {"actor": 120, "director": 30, "genre": 15, "producer": 20, "studio": 15}
DEFAULT_PER_MOVIE = {"actor": 2, "director": 1, "genre": 1, "producer": 1, "studio": 1}


@dataclass(frozen=True)
class SyntheticSpec:
    n_users: int = 500
    n_movies: int = 300
    features: dict = field(default_factory=lambda: dict(DEFAULT_FEATURES))
    per_movie: dict = field(default_factory=lambda: dict(DEFAULT_PER_MOVIE))
    groups: int = 3
    noise: float = 0.1
    ratings_per_user: int = 150
    rating_low: float = 1.0
    rating_high: float = 5.0
    rating_step: float = 0.5
    like_rate: float = 0.5
    preferred_types: tuple | None = ("genre",)  # None: every type can be preferred
    popularity_skew: float = 0.0  # Zipf exponent of movie rating propensity
    feature_skew: float = 0.5  # Zipf exponent of feature occurrence within a type
    graded: bool = False  # rating shift grows with the number of preferred features hit
    seed: int = 0

    def __post_init__(self):
        if min(self.n_users, self.n_movies, self.groups, self.ratings_per_user) < 1:
            raise ValueError("counts must be at least 1")
        if not self.features or min(self.features.values()) < 1:
            raise ValueError("every feature type needs at least one feature")
        if not 0 <= self.noise < 0.5:
            raise ValueError("noise must be in [0, 0.5)")
        if not 0 < self.like_rate < 1:
            raise ValueError("like_rate must be in (0, 1)")
        if self.rating_low <= 0 or self.rating_high <= self.rating_low or self.rating_step <= 0:
            raise ValueError("bad rating scale")

    @property
    def n_features(self) -> int:
        return sum(self.features.values())


@dataclass(frozen=True, eq=False)
class SyntheticData:
    ratings: RatingsMatrix
    membership: MembershipMatrix
    group: np.ndarray  # group of each user (internal index)
    preferred: np.ndarray  # groups x features, bool
    liked: np.ndarray  # noiseless like flag per stored rating, CSR order

    def group_members(self, g: int) -> np.ndarray:
        return self.ratings.user_ids[self.group == g]


def _grid(x, spec: SyntheticSpec):
    x = np.clip(x, spec.rating_low, spec.rating_high)
    return spec.rating_low + np.round((x - spec.rating_low) / spec.rating_step) * spec.rating_step


def generate(spec: SyntheticSpec = SyntheticSpec()) -> SyntheticData:
    rng = np.random.default_rng(spec.seed)
    u, m = spec.n_users, spec.n_movies

    labels = sorted(spec.features)
    types, offsets, start = [], {}, 0
    for lab in labels:
        offsets[lab] = start
        types.extend([lab] * spec.features[lab])
        start += spec.features[lab]
    f = start

    weights = {}
    for lab in labels:
        w = rng.permutation(np.arange(1, spec.features[lab] + 1, dtype=float) ** -spec.feature_skew)
        weights[lab] = w / w.sum()
    rows, cols = [], []
    for j in range(m):
        for lab in labels:
            n_t = spec.features[lab]
            k = min(spec.per_movie.get(lab, 1), n_t)
            picks = rng.choice(n_t, size=k, replace=False, p=weights[lab]) + offsets[lab]
            rows.extend([j] * k)
            cols.extend(picks.tolist())
    F = _csr(np.array(rows), np.array(cols), np.ones(len(rows)), (m, f))
    F.data[:] = 1.0

    # preferred-feature rate chosen so a random movie hits the preferred set
    # with probability close to like_rate
    eligible = np.array([spec.preferred_types is None or t in spec.preferred_types for t in types])
    if not eligible.any():
        raise ValueError(f"no features of preferred types {spec.preferred_types}")
    per_movie = max(1, int(F[:, eligible].sum()) // m)
    q = 1.0 - (1.0 - spec.like_rate) ** (1.0 / per_movie)
    pool = np.flatnonzero(eligible)
    n_pref = int(np.clip(round(q * len(pool)), 1, len(pool)))
    preferred = np.zeros((spec.groups, f), dtype=bool)
    for g in range(spec.groups):
        preferred[g, rng.choice(pool, size=n_pref, replace=False)] = True

    group = rng.integers(spec.groups, size=u)
    overlap = F @ preferred.T.astype(float)  # movies x groups
    hits = overlap > 0
    mid = (spec.rating_low + spec.rating_high) / 2
    baseline = _grid(rng.uniform(mid - 0.5, mid + 0.5, size=u), spec)

    n_per = min(spec.ratings_per_user, m)
    propensity = rng.permutation(np.arange(1, m + 1, dtype=float) ** -spec.popularity_skew)
    propensity /= propensity.sum()
    r_rows, r_cols, r_vals, truth = [], [], [], []
    for i in range(u):
        movies = np.sort(rng.choice(m, size=n_per, replace=False, p=propensity))
        like = hits[movies, group[i]]
        flip = rng.random(n_per) < spec.noise
        observed = like ^ flip
        shift = rng.choice([1.0, 1.5, 2.0], size=n_per)
        if spec.graded:
            shift = np.where(like & ~flip, np.minimum(0.5 + overlap[movies, group[i]], 2.0), shift)
        vals = _grid(baseline[i] + np.where(observed, shift, -shift), spec)
        r_rows.append(np.full(n_per, i))
        r_cols.append(movies)
        r_vals.append(vals)
        truth.append(like)
    R = _csr(np.concatenate(r_rows), np.concatenate(r_cols), np.concatenate(r_vals), (u, m))

    ratings = RatingsMatrix(R, np.arange(1, u + 1, dtype=np.int64), np.arange(1, m + 1, dtype=np.int64))
    catalog = FeatureCatalog(np.arange(1, f + 1, dtype=np.int64), np.array(types, dtype=object))
    membership = MembershipMatrix(F, ratings.movie_ids.copy(), catalog)
    return SyntheticData(ratings, membership, group, preferred, np.concatenate(truth))


def write(data: SyntheticData, out_dir) -> tuple[Path, Path]:
    """Write ``ratings.tsv`` and ``membership.tsv`` in the ingest format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rp, mp = out / "ratings.tsv", out / "membership.tsv"
    write_ratings(rp, data.ratings)
    write_membership(mp, data.membership)
    return rp, mp
