"""Apriori frequent-itemset mining and pairwise independence checks.

Transactions are movies and items are the features each movie carries.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from .graph import FeatureCatalog, MembershipMatrix


@dataclass(frozen=True)
class TransactionDb:
    transactions: tuple  # tuple of sorted tuples of int items

    @classmethod
    def from_iterable(cls, transactions) -> "TransactionDb":
        return cls(tuple(tuple(sorted(set(int(i) for i in t))) for t in transactions))

    @classmethod
    def from_membership(cls, membership: MembershipMatrix) -> "TransactionDb":
        F = membership.matrix
        fids = membership.feature_ids
        return cls(
            tuple(
                tuple(sorted(int(k) for k in fids[F.indices[F.indptr[j] : F.indptr[j + 1]]]))
                for j in range(F.shape[0])
            )
        )

    def __len__(self):
        return len(self.transactions)

    @property
    def items(self) -> list:
        return sorted({i for t in self.transactions for i in t})

    def count(self, itemset) -> int:
        s = set(itemset)
        return sum(1 for t in self.transactions if s.issubset(t))


@dataclass(frozen=True, order=True)
class FrequentItemset:
    size: int
    items: tuple
    count: int
    support: float


def _min_count(n: int, min_support=None, min_count=None) -> int:
    if (min_support is None) == (min_count is None):
        raise ValueError("give exactly one of min_support or min_count")
    if min_count is not None:
        if int(min_count) < 1:
            raise ValueError("min_count must be at least 1")
        return int(min_count)
    s = float(min_support)
    if not 0 < s <= 1:
        raise ValueError("min_support must be in (0, 1]")
    # guard against 0.5 * 10 -> 5.000000000000001
    return max(1, math.ceil(s * n - 1e-9))


def _candidates(prev: list) -> list:
    """Join (k-1)-itemsets sharing a (k-2)-prefix, then prune by downward closure."""
    prev_set = set(prev)
    out = []
    for i, a in enumerate(prev):
        for b in prev[i + 1 :]:
            if a[:-1] != b[:-1]:
                break  # prev is sorted, so no later b shares a's prefix
            cand = a + (b[-1],)
            if all(sub in prev_set for sub in combinations(cand, len(cand) - 1)):
                out.append(cand)
    return out


def mine(db: TransactionDb, min_support=None, min_count=None, max_size=None) -> list:
    """All itemsets with support at or above the threshold, level by level.

    Output is ordered by (size, items).
    """
    n = len(db)
    if n == 0:
        raise ValueError("empty transaction database")
    thresh = _min_count(n, min_support, min_count)
    tsets = [frozenset(t) for t in db.transactions]

    counts = Counter(i for t in db.transactions for i in t)
    level = sorted((i,) for i, c in counts.items() if c >= thresh)
    result = [FrequentItemset(1, c, counts[c[0]], counts[c[0]] / n) for c in level]
    k = 1
    while level and (max_size is None or k < max_size):
        k += 1
        cands = _candidates(level)
        if not cands:
            break
        cc = Counter()
        for t in tsets:
            if len(t) < k:
                continue
            for c in cands:
                if t.issuperset(c):
                    cc[c] += 1
        level = [c for c in cands if cc[c] >= thresh]
        result.extend(FrequentItemset(k, c, cc[c], cc[c] / n) for c in level)
    return result


def level_sizes(frequent: list) -> dict:
    return dict(sorted(Counter(f.size for f in frequent).items()))


@dataclass(frozen=True)
class DependencyVerdict:
    pair: tuple
    count_a: int
    count_b: int
    count_ab: int
    n: int
    p_a: float
    p_b: float
    p_ab: float
    lift: float | None
    dependent: bool | None

    @property
    def undefined(self) -> bool:
        return self.lift is None


def independence_test(db: TransactionDb, pair, tolerance: float = 0.05) -> DependencyVerdict:
    """Compare P(AB) to P(A)P(B) through their ratio (lift).

    The pair is called dependent when ``|lift - 1| > tolerance``. If either
    item never occurs the lift is undefined and ``dependent`` is None.
    """
    a, b = (int(x) for x in pair)
    n = len(db)
    if n == 0:
        raise ValueError("empty transaction database")
    ca = cb = cab = 0
    for t in db.transactions:
        ha, hb = a in t, b in t
        ca += ha
        cb += hb
        cab += ha and hb
    pa, pb, pab = ca / n, cb / n, cab / n
    if pa * pb == 0:
        return DependencyVerdict((a, b), ca, cb, cab, n, pa, pb, pab, None, None)
    lift = pab / (pa * pb)
    return DependencyVerdict((a, b), ca, cb, cab, n, pa, pb, pab, lift, abs(lift - 1) > tolerance)


def type_combination_report(frequent: list, catalog: FeatureCatalog) -> list:
    """Tally of sorted type tuples over frequent itemsets of size >= 2.

    Returns ``[(type_tuple, count), ...]`` by descending count, then tuple.
    """
    tally = Counter(
        tuple(sorted(catalog.type_of(i) for i in f.items)) for f in frequent if f.size >= 2
    )
    return sorted(tally.items(), key=lambda kv: (-kv[1], kv[0]))


def write_itemsets(path, frequent: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("items\tcount\tsupport\n")
        for f in frequent:
            fh.write(f"{','.join(map(str, f.items))}\t{f.count}\t{f.support!r}\n")


def read_itemsets(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            items, count, support = line.rstrip("\n").split("\t")
            its = tuple(int(x) for x in items.split(","))
            out.append(FrequentItemset(len(its), its, int(count), float(support)))
    return out
