import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import make_graph, peel_naive, random_graph
from pnpdesign.graph import (
    DuplicateRatingWarning,
    FilterThresholds,
    IngestError,
    RatingRange,
    align,
    dataset_hash,
    filter_core,
    ingest_membership,
    ingest_ratings,
    read_membership,
    read_ratings,
    row_normalize,
    split_and_reweigh,
    summary,
    user_means,
    write_membership,
    write_ratings,
)


# ---------------------------------------------------------------- ingestion


def test_two_record_stream():
    R = ingest_ratings([(1, 10, 4.0), (1, 11, 2.0)])
    assert R.shape == (1, 2) and R.nnz == 2
    assert user_means(R).mean[0] == 3.0


def test_duplicate_keep_last_warns():
    with pytest.warns(DuplicateRatingWarning):
        R = ingest_ratings([(1, 10, 4.0), (1, 10, 5.0)])
    assert R.nnz == 1 and R.matrix.data[0] == 5.0


def test_duplicate_keep_first_and_error():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DuplicateRatingWarning)
        R = ingest_ratings([(1, 10, 4.0), (1, 10, 5.0)], duplicates="first")
    assert R.matrix.data[0] == 4.0
    with pytest.raises(IngestError) as exc:
        ingest_ratings([(1, 10, 4.0), (2, 10, 3.0), (1, 10, 5.0)], duplicates="error")
    assert exc.value.errors[0][0] == 3


def test_out_of_range_reports_line_numbers():
    with pytest.raises(IngestError) as exc:
        ingest_ratings([(1, 10, 4.0), (1, 11, 7.0), (2, 10, 0.5)])
    assert [ln for ln, _ in exc.value.errors] == [2, 3]


def test_empty_stream_is_an_error():
    with pytest.raises(IngestError):
        ingest_ratings([])


def test_configurable_range():
    R = ingest_ratings([(1, 1, 9.0), (1, 2, 10.0)], rating_range=RatingRange(1, 10))
    assert R.nnz == 2


def test_read_ratings_maps_file_lines(tmp_path):
    p = tmp_path / "r.tsv"
    p.write_text("# header comment\n1\t10\t4\n\n1\t11\tx\n")
    with pytest.raises(IngestError) as exc:
        read_ratings(p)
    assert exc.value.errors[0][0] == 4


def test_membership_type_conflict():
    with pytest.raises(IngestError):
        ingest_membership([(1, 5, "actor"), (2, 5, "genre")])


def test_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    ratings, membership = random_graph(rng, 6, 5, 4, density=0.6, fdensity=0.6)
    write_ratings(tmp_path / "r.tsv", ratings)
    write_membership(tmp_path / "m.tsv", membership)
    r2 = read_ratings(tmp_path / "r.tsv")
    m2 = read_membership(tmp_path / "m.tsv")
    assert list(r2.triples()) == list(ratings.triples())
    write_membership(tmp_path / "m2.tsv", m2)
    assert (tmp_path / "m.tsv").read_text() == (tmp_path / "m2.tsv").read_text()


def test_external_id_round_trip():
    R = ingest_ratings([(42, 7, 3.0), (5, 9, 2.0), (1000, 7, 4.0)])
    idx = R.user_index([5, 42, 1000])
    assert np.array_equal(R.user_ids[idx], [5, 42, 1000])
    assert R.user_index([3])[0] == -1


def test_align_unions_movies():
    R = ingest_ratings([(1, 1, 3.0), (1, 2, 4.0)])
    F = ingest_membership([(2, 9, "genre"), (3, 9, "genre")])
    R2, F2 = align(R, F)
    assert list(R2.movie_ids) == [1, 2, 3] == list(F2.movie_ids)
    assert R2.nnz == 2 and F2.matrix.nnz == 2


# -------------------------------------------------------------- statistics


def test_user_means_examples():
    R = ingest_ratings([(1, 1, 3.5), (2, 1, 4.0), (2, 2, 2.0)])
    assert list(user_means(R).mean) == [3.5, 3.0]


def test_user_means_match_accumulation_oracle():
    rng = np.random.default_rng(0)
    u, m = 5, 1000
    dense = rng.integers(2, 11, size=(u, m)) / 2.0
    stats = user_means(sp.csr_matrix(dense))
    for i in range(u):
        acc = 0.0
        for v in dense[i]:
            acc += v
        assert abs(stats.mean[i] - acc / m) <= 1e-12


def _split_one(r, mean_partner, delta):
    # a user with ratings r and a partner rating chosen so the mean is fixed
    R = sp.csr_matrix(np.array([[r, mean_partner]]))
    return split_and_reweigh(R, user_means(R), delta)


def test_reweigh_examples():
    s = _split_one(4.0, 2.0, 1.0)  # mean 3, r=4 -> +, weight 2
    assert s.positive[0, 0] == 2.0
    s = _split_one(2.0, 4.0, 0.5)  # mean 3, r=2 -> -, weight sqrt(2)
    assert s.negative[0, 0] == pytest.approx(1.41421356, abs=1e-8)
    R = sp.csr_matrix(np.array([[3.0, 3.0]]))
    s = split_and_reweigh(R, user_means(R), 1.7)
    assert s.positive.nnz == 2 and np.all(s.positive.data == 1.0) and s.negative.nnz == 0


def test_split_invariants():
    rng = np.random.default_rng(1)
    ratings, _ = random_graph(rng, 30, 20, 5, density=0.5)
    s = split_and_reweigh(ratings, user_means(ratings), 0.8)
    assert s.positive.nnz + s.negative.nnz == ratings.nnz
    assert s.positive.multiply(s.negative).nnz == 0
    assert ((s.positive + s.negative) != 0).sum() == ratings.nnz
    assert s.positive.data.min() >= 1.0 and s.negative.data.min() >= 1.0
    s0 = split_and_reweigh(ratings, user_means(ratings), 0.0)
    assert np.all(s0.positive.data == 1.0) and np.all(s0.negative.data == 1.0)


def test_ties_negative_policy():
    R = sp.csr_matrix(np.array([[3.0, 3.0]]))
    s = split_and_reweigh(R, user_means(R), 1.0, ties_positive=False)
    assert s.positive.nnz == 0 and s.negative.nnz == 2


@given(st.floats(0.01, 3), st.floats(0, 2), st.floats(0, 2))
def test_reweigh_monotone(delta, a, b):
    # user 0 is centered at 3 with deviation a, user 1 with deviation b
    R = sp.csr_matrix(np.array([[3 + a, 3 - a], [3 + b, 3 - b]]))
    s = split_and_reweigh(R, user_means(R), delta)
    wa, wb = s.positive[0, 0], s.positive[1, 0]
    if a < b - 1e-6:
        assert wa < wb
    elif b < a - 1e-6:
        assert wb < wa


def test_negative_delta_rejected():
    R = sp.csr_matrix(np.array([[3.0]]))
    with pytest.raises(ValueError):
        split_and_reweigh(R, user_means(R), -0.1)


# ------------------------------------------------------------ normalization


def test_row_normalize_examples():
    op = row_normalize(sp.csr_matrix(np.array([[2.0, 2.0], [0.0, 0.0]])))
    assert op.matrix.toarray().tolist() == [[0.5, 0.5], [0.0, 0.0]]
    assert op.dangling.tolist() == [False, True]


def test_row_normalize_random_sums():
    M = sp.random(20, 20, density=0.2, random_state=4) * 3
    op = row_normalize(M)
    sums = np.asarray(op.matrix.sum(axis=1)).ravel()
    assert np.all(np.abs(sums[~op.dangling] - 1) <= 1e-12)
    assert np.all(sums[op.dangling] == 0)
    assert op.matrix.data.min() >= 0


def test_row_normalize_rejects_negative():
    with pytest.raises(ValueError):
        row_normalize(sp.csr_matrix(np.array([[1.0, -1.0]])))


# --------------------------------------------------------------- filtering


def _thresholds(t):
    return FilterThresholds(*t)


def test_filter_fixed_point_unchanged():
    R = np.full((3, 3), 4.0)
    F = np.ones((3, 2))
    ratings, membership = make_graph(R, F)
    res = filter_core(ratings, membership, FilterThresholds(3, 2, 3, 3))
    assert res.rounds == 0
    assert summary(res.ratings, res.membership) == summary(ratings, membership)


def test_filter_everything_peels():
    ratings, membership = make_graph(np.array([[4.0]]), np.array([[1.0, 1.0]]))
    res = filter_core(ratings, membership)
    assert res.empty and res.ratings is None


@pytest.mark.parametrize("seed", range(10))
def test_filter_matches_naive_peeler(seed):
    rng = np.random.default_rng(seed)
    u, m, f = 200, 100, 30
    dense = np.where(rng.random((u, m)) < rng.uniform(0.05, 0.2), 3.0, 0.0)
    F = (rng.random((m, f)) < 0.08).astype(float)
    ratings, membership = make_graph(dense, F)
    t = (int(rng.integers(3, 15)), 2, int(rng.integers(3, 15)), 2)
    res = filter_core(ratings, membership, _thresholds(t))
    users, movies, feats = peel_naive(dense, F, t)
    if not (users and movies and feats):
        assert res.empty
        return
    assert list(res.ratings.user_ids) == [ratings.user_ids[i] for i in sorted(users)]
    assert list(res.ratings.movie_ids) == [ratings.movie_ids[j] for j in sorted(movies)]
    assert list(res.membership.feature_ids) == [membership.feature_ids[k] for k in sorted(feats)]


def test_filter_idempotent():
    rng = np.random.default_rng(5)
    dense = np.where(rng.random((80, 40)) < 0.3, 4.0, 0.0)
    F = (rng.random((40, 20)) < 0.2).astype(float)
    ratings, membership = make_graph(dense, F)
    t = FilterThresholds(5, 2, 5, 2)
    once = filter_core(ratings, membership, t)
    twice = filter_core(once.ratings, once.membership, t)
    assert twice.rounds == 0
    assert dataset_hash(once.ratings, once.membership) == dataset_hash(twice.ratings, twice.membership)


def test_dataset_hash_sensitive_to_values():
    ratings, membership = make_graph(np.array([[4.0, 2.0]]), np.eye(2))
    h1 = dataset_hash(ratings, membership)
    ratings.matrix.data[0] = 3.0
    assert dataset_hash(ratings, membership) != h1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_filter_output_satisfies_thresholds(seed):
    rng = np.random.default_rng(seed)
    dense = np.where(rng.random((25, 20)) < 0.4, 2.0, 0.0)
    F = (rng.random((20, 10)) < 0.3).astype(float)
    ratings, membership = make_graph(dense, F)
    t = FilterThresholds(3, 2, 3, 2)
    res = filter_core(ratings, membership, t)
    if res.empty:
        return
    R = res.ratings.matrix != 0
    Fm = res.membership.matrix
    assert np.asarray(R.sum(1)).min() >= 3 and np.asarray(R.sum(0)).min() >= 3
    assert np.asarray(Fm.sum(1)).min() >= 2 and np.asarray(Fm.sum(0)).min() >= 2
