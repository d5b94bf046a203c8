from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_itemsets
from pnpdesign.graph import FeatureCatalog, ingest_membership
from pnpdesign.itemsets import (
    TransactionDb,
    independence_test,
    level_sizes,
    mine,
    read_itemsets,
    type_combination_report,
    write_itemsets,
)


def as_dict(frequent):
    return {f.items: f.count for f in frequent}


def test_uniform_db():
    db = TransactionDb.from_iterable([(1, 2)] * 10)
    out = mine(db, min_support=0.5)
    assert as_dict(out) == {(1,): 10, (2,): 10, (1, 2): 10}
    assert level_sizes(out) == {1: 2, 2: 1}


def test_full_support_filter():
    db = TransactionDb.from_iterable([(1, 2), (1,), (1, 3)])
    assert as_dict(mine(db, min_support=1.0)) == {(1,): 3}


def test_bad_thresholds():
    db = TransactionDb.from_iterable([(1,)])
    for kw in ({"min_support": 0}, {"min_support": 1.5}, {"min_count": 0}, {}):
        with pytest.raises(ValueError):
            mine(db, **kw)
    with pytest.raises(ValueError):
        mine(TransactionDb(()), min_count=1)


def test_support_float_guard():
    # 0.3 * 10 is 3.0000000000000004 in floating point
    db = TransactionDb.from_iterable([(1,)] * 3 + [(2,)] * 7)
    assert (1,) in as_dict(mine(db, min_support=0.3))


@pytest.mark.parametrize("seed", range(10))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n_items = 10
    tx = [tuple(np.flatnonzero(rng.random(n_items) < 0.35)) for _ in range(50)]
    db = TransactionDb.from_iterable(tx)
    thresh = int(rng.integers(2, 10))
    assert as_dict(mine(db, min_count=thresh)) == brute_force_itemsets(db.transactions, thresh)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sets(st.integers(0, 8), max_size=6), min_size=1, max_size=30), st.integers(1, 5))
def test_downward_closure_and_order_independence(tx, thresh):
    db = TransactionDb.from_iterable(tx)
    out = mine(db, min_count=thresh)
    found = as_dict(out)
    for items, c in found.items():
        for sub in combinations(items, len(items) - 1):
            if sub:
                assert found[sub] >= c
    assert out == sorted(out, key=lambda f: (f.size, f.items))
    assert mine(TransactionDb.from_iterable(tx[::-1]), min_count=thresh) == out


def test_max_size():
    db = TransactionDb.from_iterable([(1, 2, 3)] * 4)
    assert max(f.size for f in mine(db, min_count=1, max_size=2)) == 2


def test_forced_co_occurrence():
    tx = [(1, 2)] * 2 + [(3,)] * 8
    v = independence_test(TransactionDb.from_iterable(tx), (1, 2))
    assert (v.p_a, v.p_b, v.p_ab) == (0.2, 0.2, 0.2)
    assert v.lift == pytest.approx(5.0) and v.dependent


def test_disjoint_and_undefined():
    db = TransactionDb.from_iterable([(1,), (2,), (1,), (2,)])
    v = independence_test(db, (1, 2))
    assert v.lift == 0 and v.dependent
    u = independence_test(db, (1, 99))
    assert u.undefined and u.dependent is None and u.count_a == 2


def test_coin_flip_independence():
    rng = np.random.default_rng(0)
    a = rng.random(10_000) < 0.3
    b = rng.random(10_000) < 0.4
    tx = [tuple(i for i, on in ((1, x), (2, y)) if on) for x, y in zip(a, b)]
    v = independence_test(TransactionDb.from_iterable(tx), (1, 2))
    assert 0.9 <= v.lift <= 1.1 and not v.dependent


def test_type_report():
    cat = FeatureCatalog(np.array([1, 2, 3]), np.array(["actor", "genre", "actor"], dtype=object))
    db = TransactionDb.from_iterable([(1, 2), (1, 2), (2, 3), (2, 3), (1, 3)])
    rep = type_combination_report(mine(db, min_count=2), cat)
    assert rep == [(("actor", "genre"), 2)]
    assert type_combination_report([], cat) == []


def test_type_report_matches_grouping_oracle():
    rng = np.random.default_rng(1)
    types = np.array(["actor", "genre", "director"] * 4, dtype=object)
    cat = FeatureCatalog(np.arange(12), types)
    db = TransactionDb.from_iterable(tuple(np.flatnonzero(rng.random(12) < 0.4)) for _ in range(60))
    frequent = mine(db, min_count=5)
    oracle = {}
    for f in frequent:
        if f.size >= 2:
            key = tuple(sorted(types[i] for i in f.items))
            oracle[key] = oracle.get(key, 0) + 1
    assert dict(type_combination_report(frequent, cat)) == oracle


def test_from_membership_and_tsv_round_trip(tmp_path):
    m = ingest_membership([(1, 10, "actor"), (1, 20, "genre"), (2, 10, "actor"), (2, 20, "genre"), (3, 30, "genre")])
    db = TransactionDb.from_membership(m)
    assert db.transactions == ((10, 20), (10, 20), (30,))
    out = mine(db, min_count=2)
    write_itemsets(tmp_path / "f.tsv", out)
    assert read_itemsets(tmp_path / "f.tsv") == out
