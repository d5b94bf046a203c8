"""Feature-bundle selection under per-type capacity or budget constraints.

Under the uniform threshold model (each user converts when her summed
feature scores exceed a threshold drawn from U[-1, 1]) the expected number
of converted target users is ``|U'|/2 + sum_{k in S} w_k / 2`` whenever the
per-user sums stay in [-1, 1], so the optimizer maximizes the aggregated
score ``sum_{k in S} w_k``. Constraints are separable by feature type and
every type is solved on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import FeatureCatalog
from .walks import FastAggregate, PreferenceMatrix, TargetSet, UnknownUserError

DEFAULT_CAPACITIES = {"actor": 6, "director": 2, "genre": 2, "producer": 1, "studio": 1}
DEFAULT_RESOLUTION = 2
DEFAULT_CELL_LIMIT = 50_000_000


class KnapsackTooLarge(MemoryError):
    pass


@dataclass(frozen=True)
class AggregatedScores:
    values: np.ndarray
    target_size: int

    def __len__(self):
        return len(self.values)


@dataclass
class Design:
    """A selected feature bundle.

    ``selected`` maps type label to internal feature indices in selection
    order; ``objective`` is the aggregated score of the bundle.
    """

    selected: dict
    objective: float
    method: str = "cardinality"
    constraints: dict = field(default_factory=dict)
    expected_conversions: float | None = None

    @property
    def indices(self) -> np.ndarray:
        out = [i for idx in self.selected.values() for i in idx]
        return np.array(sorted(out), dtype=np.int64)

    def vector(self, n_features: int) -> np.ndarray:
        x = np.zeros(n_features)
        x[self.indices] = 1.0
        return x

    def report(self, catalog: FeatureCatalog, scores=None, costs=None) -> dict:
        per_type = {}
        for label, idx in sorted(self.selected.items()):
            rows = []
            for i in idx:
                row = {"feature_id": int(catalog.feature_ids[i])}
                if scores is not None:
                    row["score"] = float(scores[i])
                if costs is not None:
                    row["cost"] = float(costs[i])
                rows.append(row)
            per_type[label] = rows
        return {
            "method": self.method,
            "selection": per_type,
            "objective": float(self.objective),
            "expected_conversions": self.expected_conversions,
            "constraints": dict(self.constraints),
        }


def aggregate_scores(source, target: TargetSet | None = None) -> AggregatedScores:
    """Per-feature sums of preference rows over the target users.

    ``source`` is a :class:`PreferenceMatrix` (or a dense array) with a
    ``target``, or a :class:`FastAggregate` whose sums are passed through.
    """
    if isinstance(source, FastAggregate):
        return AggregatedScores(np.asarray(source.combined, dtype=float), len(source.target))
    W = source.values if isinstance(source, PreferenceMatrix) else np.asarray(source, dtype=float)
    if target is None:
        raise ValueError("a target set is required to aggregate a preference matrix")
    if target.n_users != W.shape[0]:
        raise UnknownUserError([f"target built for {target.n_users} users, matrix has {W.shape[0]}"])
    return AggregatedScores(W[target.indices].sum(axis=0), len(target))


def _as_scores(scores) -> np.ndarray:
    if isinstance(scores, AggregatedScores):
        return scores.values
    return np.asarray(scores, dtype=float)


def _objective(w: np.ndarray, idx) -> float:
    return math.fsum(w[i] for i in idx)


def top_per_type(w: np.ndarray, candidates: np.ndarray, k: int, strict: bool = False) -> list:
    """The ``k`` best of ``candidates`` by score, ties broken by ascending index.

    Negative scores are skipped unless ``strict`` asks for exactly ``k``.
    """
    if k <= 0 or len(candidates) == 0:
        return []
    cand = np.asarray(candidates)
    order = np.lexsort((cand, -w[cand]))
    picked = cand[order]
    if not strict:
        picked = picked[w[picked] >= 0]
    return [int(i) for i in picked[:k]]


def design_cardinality(scores, catalog: FeatureCatalog, caps: dict, strict: bool = False) -> Design:
    """Pick up to ``caps[type]`` highest-scoring features of each type."""
    w = _as_scores(scores)
    if len(w) != len(catalog):
        raise ValueError("scores and catalog differ in length")
    selected = {}
    for label in catalog.type_labels():
        k = int(caps.get(label, 0))
        if k < 0:
            raise ValueError(f"negative capacity for {label!r}")
        picked = top_per_type(w, catalog.indices_of(label), k, strict)
        if picked:
            selected[label] = picked
    obj = _objective(w, [i for v in selected.values() for i in v])
    return Design(selected, obj, "cardinality-strict" if strict else "cardinality", dict(caps))


# ------------------------------------------------------------------ budget


def _knapsack_exact(values: np.ndarray, costs: np.ndarray, capacity: int, cell_limit: int) -> list:
    """0/1 knapsack over integer costs; returns chosen positions.

    Items are processed in the given order and an item is taken only on a
    strict improvement, which makes the choice deterministic.
    """
    n = len(values)
    if n == 0 or capacity < 0:
        return []
    if n * (capacity + 1) > cell_limit:
        raise KnapsackTooLarge(
            f"knapsack table {n}x{capacity + 1} exceeds {cell_limit} cells; use greedy mode "
            "or lower the cost resolution"
        )
    best = np.zeros(capacity + 1)
    take = np.zeros((n, capacity + 1), dtype=bool)
    for i in range(n):
        c = int(costs[i])
        if c > capacity:
            continue
        cand = best[: capacity + 1 - c] + values[i]
        better = cand > best[c:]
        take[i, c:] = better
        best[c:] = np.where(better, cand, best[c:])
    chosen = []
    cap = capacity
    for i in range(n - 1, -1, -1):
        if take[i, cap]:
            chosen.append(i)
            cap -= int(costs[i])
    return chosen[::-1]


def _knapsack_greedy(values: np.ndarray, costs: np.ndarray, budget: float) -> list:
    with np.errstate(divide="ignore"):
        ratio = np.where(costs > 0, values / np.where(costs > 0, costs, 1.0), np.inf)
    # equal ratios: cheaper item first, then ascending index
    order = np.lexsort((np.arange(len(values)), costs, -ratio))
    chosen, spent = [], 0.0
    for i in order:
        if spent + costs[i] <= budget + 1e-12:
            chosen.append(int(i))
            spent += costs[i]
    return chosen


def design_budget(
    scores,
    catalog: FeatureCatalog,
    costs,
    budgets: dict,
    mode: str = "exact",
    resolution: int = DEFAULT_RESOLUTION,
    cell_limit: int = DEFAULT_CELL_LIMIT,
) -> Design:
    """Per-type 0/1 knapsack maximizing the aggregated score.

    ``costs`` is an array aligned with the catalog (NaN = missing) or a
    mapping from external feature id to cost. In exact mode costs and budgets
    are scaled by ``10**resolution`` and rounded to integers for the dynamic
    program. Only positive-score features are ever considered.
    """
    if mode not in ("exact", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    w = _as_scores(scores)
    if isinstance(costs, dict):
        c = np.full(len(catalog), np.nan)
        for fid, val in costs.items():
            i = int(catalog.index([fid])[0])
            if i >= 0:
                c[i] = float(val)
    else:
        c = np.asarray(costs, dtype=float)
    if len(c) != len(w):
        raise ValueError("costs and scores differ in length")
    scale = 10**resolution
    selected = {}
    for label in catalog.type_labels():
        idx = catalog.indices_of(label)
        budget = float(budgets.get(label, 0.0))
        if budget < 0:
            raise ValueError(f"negative budget for {label!r}")
        cand = idx[w[idx] > 0]
        missing = cand[np.isnan(c[cand])]
        if len(missing):
            ids = catalog.feature_ids[missing].tolist()
            raise ValueError(f"missing cost for features {ids[:20]}")
        if len(cand) == 0:
            continue
        if np.any(c[cand] < 0):
            raise ValueError("negative feature cost")
        if mode == "exact":
            ic = np.rint(c[cand] * scale).astype(np.int64)
            cap = int(math.floor(budget * scale + 1e-9))
            pos = _knapsack_exact(w[cand], ic, cap, cell_limit)
        else:
            pos = _knapsack_greedy(w[cand], c[cand], budget)
        if pos:
            selected[label] = sorted(int(cand[p]) for p in pos)
    obj = _objective(w, [i for v in selected.values() for i in v])
    return Design(selected, obj, f"budget-{mode}", dict(budgets))


# ------------------------------------------------------------- conversions


def expected_conversions(W, target: TargetSet, design) -> float:
    """Expected converted target users under thresholds drawn from U[-1, 1].

    Each user's probability ``(sum_{k in S} w_ik + 1) / 2`` is clamped to
    [0, 1], since a summed score can leave [-1, 1].
    """
    W = W.values if isinstance(W, PreferenceMatrix) else np.asarray(W, dtype=float)
    idx = design.indices if isinstance(design, Design) else np.asarray(design, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= W.shape[1]):
        raise IndexError("design references features outside the preference matrix")
    s = W[np.ix_(target.indices, idx)].sum(axis=1) if idx.size else np.zeros(len(target))
    return float(np.clip(0.5 * (s + 1.0), 0.0, 1.0).sum())
