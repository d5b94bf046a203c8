import numpy as np
import pytest

from oracles import best_subset_budget, best_subset_cardinality, monte_carlo_conversions
from pnpdesign.design import (
    Design,
    KnapsackTooLarge,
    aggregate_scores,
    design_budget,
    design_cardinality,
    expected_conversions,
)
from pnpdesign.graph import FeatureCatalog
from pnpdesign.walks import TargetSet


def catalog(types):
    return FeatureCatalog(np.arange(len(types), dtype=np.int64) + 1, np.array(types, dtype=object))


# --------------------------------------------------------------- aggregate


def test_aggregate_examples():
    W = np.array([[0.2, -0.4], [-0.2, 0.4], [0.1, 0.1]])
    assert aggregate_scores(W, TargetSet.from_indices([2], 3)).values.tolist() == [0.1, 0.1]
    assert aggregate_scores(W, TargetSet.from_indices([0, 1], 3)).values.tolist() == [0.0, 0.0]


def test_aggregate_matches_double_loop():
    rng = np.random.default_rng(0)
    W = rng.uniform(-1, 1, (30, 12))
    t = TargetSet.from_indices(rng.choice(30, 11, replace=False), 30)
    got = aggregate_scores(W, t).values
    for k in range(12):
        acc = 0.0
        for i in t.indices:
            acc += W[i, k]
        assert abs(got[k] - acc) <= 1e-12
    assert np.all(np.abs(got) <= len(t))


# ------------------------------------------------------------- cardinality


def test_cardinality_example():
    d = design_cardinality([0.5, 0.1, -0.2], catalog(["genre"] * 3), {"genre": 2})
    assert d.selected == {"genre": [0, 1]} and d.objective == pytest.approx(0.6)


def test_zero_caps_empty():
    d = design_cardinality([0.5, 0.1], catalog(["a", "b"]), {"a": 0, "b": 0})
    assert d.selected == {} and d.objective == 0


def test_ties_by_ascending_id():
    d = design_cardinality([0.3, 0.5, 0.5, 0.5], catalog(["a"] * 4), {"a": 2})
    assert d.selected["a"] == [1, 2]


def test_negative_never_forced_unless_strict():
    cat = catalog(["a", "a", "b"])
    assert design_cardinality([0.4, -0.1, -0.3], cat, {"a": 2, "b": 1}).selected == {"a": [0]}
    strict = design_cardinality([0.4, -0.1, -0.3], cat, {"a": 2, "b": 1}, strict=True)
    assert strict.selected == {"a": [0, 1], "b": [2]}


@pytest.mark.parametrize("seed", range(20))
def test_cardinality_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 13))
    types = [["a", "b", "c"][t] for t in rng.integers(0, 3, n)]
    w = rng.normal(size=n)
    caps = {t: int(rng.integers(0, 4)) for t in "abc"}
    d = design_cardinality(w, catalog(types), caps)
    assert d.objective == best_subset_cardinality(w, types, caps)


def test_scaling_preserves_selection():
    rng = np.random.default_rng(1)
    w = rng.normal(size=10)
    cat = catalog(["a", "b"] * 5)
    caps = {"a": 2, "b": 3}
    assert design_cardinality(w, cat, caps).selected == design_cardinality(w * 7.5, cat, caps).selected


# ------------------------------------------------------------------ budget


def test_knapsack_example():
    cat = catalog(["a"] * 3)
    w, c = [6.0, 5.0, 4.0], [5.0, 5.0, 4.0]
    exact = design_budget(w, cat, c, {"a": 10}, "exact")
    greedy = design_budget(w, cat, c, {"a": 10}, "greedy")
    assert exact.selected == {"a": [0, 1]} and exact.objective == 11
    assert greedy.selected == {"a": [0, 2]} and greedy.objective == 10


def test_budget_zero_empty():
    d = design_budget([1.0, 2.0], catalog(["a", "a"]), [1.0, 1.0], {"a": 0})
    assert d.selected == {}


def test_zero_cost_positive_items_always_taken():
    d = design_budget([1.0, 2.0, -1.0], catalog(["a"] * 3), [0.0, 5.0, 0.0], {"a": 1}, "exact")
    assert d.selected == {"a": [0]}


def test_missing_and_dict_costs():
    cat = catalog(["a", "a"])
    with pytest.raises(ValueError, match="missing cost"):
        design_budget([1.0, 1.0], cat, [1.0, np.nan], {"a": 5})
    d = design_budget([1.0, 2.0], cat, {1: 1.0, 2: 2.0}, {"a": 2.5})
    assert d.selected == {"a": [1]}
    # negative-score items need no cost
    design_budget([1.0, -1.0], cat, {1: 1.0}, {"a": 2})


def test_table_overflow_suggests_greedy():
    with pytest.raises(KnapsackTooLarge, match="greedy"):
        design_budget([1.0] * 10, catalog(["a"] * 10), [1.0] * 10, {"a": 1e6}, "exact", cell_limit=1000)


def _dyadic(rng, n):
    # multiples of 1/64 make every subset sum exact in floating point
    return rng.integers(-64, 256, n) / 64.0


@pytest.mark.parametrize("seed", range(20))
def test_knapsack_brute_force_and_dominance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 16))
    types = [["a", "b"][t] for t in rng.integers(0, 2, n)]
    w = _dyadic(rng, n)
    c = rng.integers(1, 10, n).astype(float)
    budgets = {"a": float(rng.integers(0, 25)), "b": float(rng.integers(0, 25))}
    cat = catalog(types)
    exact = design_budget(w, cat, c, budgets, "exact")
    greedy = design_budget(w, cat, c, budgets, "greedy")
    assert exact.objective == best_subset_budget(w, types, c, budgets)
    assert greedy.objective <= exact.objective
    for d in (exact, greedy):
        for t, idx in d.selected.items():
            assert c[idx].sum() <= budgets[t]


def test_separability_joint_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = 10
        types = [["a", "b"][t] for t in rng.integers(0, 2, n)]
        w = _dyadic(rng, n)
        caps = {"a": 2, "b": 3}
        joint = best_subset_cardinality(w, types, caps)
        per_type = sum(
            best_subset_cardinality(w[[k for k in range(n) if types[k] == t]], [t] * types.count(t), caps)
            for t in "ab"
        )
        assert joint == per_type == design_cardinality(w, catalog(types), caps).objective


# ------------------------------------------------------------- conversions


def test_conversions_examples():
    W = np.array([[0.5, 0.5], [0.2, -0.6], [0.0, 0.0]])
    t = TargetSet.everyone(3)
    assert expected_conversions(W, t, Design({}, 0.0)) == 1.5
    one = TargetSet.from_indices([0], 3)
    assert expected_conversions(W, one, Design({"a": [0, 1]}, 1.0)) == 1.0
    # a feature nobody cares about changes nothing
    base = expected_conversions(W, TargetSet.from_indices([1, 2], 3), Design({"a": [0]}, 0))
    zero_col = np.column_stack([W, np.zeros(3)])
    more = expected_conversions(zero_col, TargetSet.from_indices([1, 2], 3), Design({"a": [0, 2]}, 0))
    assert base == more


def test_conversions_clamped():
    W = np.array([[0.9, 0.9], [-0.9, -0.9]])
    assert expected_conversions(W, TargetSet.everyone(2), np.array([0, 1])) == 1.0


def test_conversions_monte_carlo():
    rng = np.random.default_rng(3)
    W = rng.uniform(-0.6, 0.6, (8, 6))
    sel = [0, 2, 5]
    t = TargetSet.everyone(8)
    est, se = monte_carlo_conversions(W, sel, 200_000, rng)
    assert abs(expected_conversions(W, t, np.array(sel)) - est) <= 3 * se
