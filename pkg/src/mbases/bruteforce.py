"""Exhaustive oracles for small instances.

Nothing here calls the packing or equivalence code, and the exactlin
routines are not used either: ranks come from Laplace expansion of minors,
done with plain Fraction / modular integer arithmetic.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Sequence

import networkx as nx

from .systems import Configuration, Decomposition, System, iter_subsystems


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_slots: int = 12
    max_support: int = 10
    max_subsets: int = 200_000
    time_budget: float = 60.0

    def check(self, T: System, count: int) -> float:
        if len(T) > self.max_slots:
            raise BudgetExceeded(f"{len(T)} slots > {self.max_slots}")
        if len(T.support) > self.max_support:
            raise BudgetExceeded(f"support {len(T.support)} > {self.max_support}")
        if count > self.max_subsets:
            raise BudgetExceeded(f"{count} assignments > {self.max_subsets}")
        return time.monotonic() + self.time_budget

    def tick(self, deadline: float) -> None:
        if time.monotonic() > deadline:
            raise BudgetExceeded("time budget exhausted")


DEFAULT_BUDGET = OracleBudget()


def _det(mat: Sequence[Sequence], p: int | None):
    n = len(mat)
    if n == 0:
        return 1
    if n == 1:
        return mat[0][0] if p is None else mat[0][0] % p
    total = 0
    for c in range(n):
        if mat[0][c] == 0:
            continue
        minor = [row[:c] + row[c + 1:] for row in mat[1:]]
        term = mat[0][c] * _det(minor, p)
        total = total + term if c % 2 == 0 else total - term
    return total if p is None else total % p


def minor_rank(vectors: Sequence[Sequence], p: int | None = None) -> int:
    """Largest r with a nonzero r x r minor."""
    rows = [[Fraction(x) if p is None else int(x) % p for x in v] for v in vectors]
    if not rows:
        return 0
    ncols = len(rows[0])
    for r in range(min(len(rows), ncols), 0, -1):
        for ri in itertools.combinations(range(len(rows)), r):
            for ci in itertools.combinations(range(ncols), r):
                if _det([[rows[i][j] for j in ci] for i in ri], p) != 0:
                    return r
    return 0


def _is_basis(config: Configuration, slot_indices: Sequence[int]) -> bool:
    if len(set(slot_indices)) != len(slot_indices):
        return False
    return minor_rank([config.v(i) for i in slot_indices], config.field.p) == config.k


def _assignment_count(total: int, k: int, m: int) -> int:
    return factorial(total) // (factorial(k) ** m * factorial(total - m * k))


def all_splits(config: Configuration, T: System, l: int | None = None,
               budget: OracleBudget = DEFAULT_BUDGET) -> list[Decomposition]:
    """Every slot-labelled assignment into m labelled bases plus an l-tail."""
    k, m = config.k, config.m
    if l is None:
        l = len(T) - m * k
    if len(T) != m * k + l or l < 0:
        raise ValueError(f"|T| = {len(T)} is not mk + l")
    slots = T.slots()
    deadline = budget.check(T, _assignment_count(len(slots), k, m))
    out: list[Decomposition] = []
    basis_cache: dict[tuple, bool] = {}

    def ok(part):
        key = tuple(sorted(s[0] for s in part))
        if key not in basis_cache:
            basis_cache[key] = _is_basis(config, key)
        return basis_cache[key]

    def rec(remaining, parts):
        budget.tick(deadline)
        if len(parts) == m:
            out.append(Decomposition(tuple(System.from_slots(p) for p in parts),
                                     System.from_slots(remaining)))
            return
        for part in itertools.combinations(remaining, k):
            if ok(part):
                rest = [s for s in remaining if s not in part]
                rec(rest, parts + [part])

    rec(slots, [])
    return out


def is_strong_bruteforce(config: Configuration, T: System, l: int | None = None,
                         budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    return bool(all_splits(config, T, l, budget))


@dataclass(frozen=True)
class GoodPair:
    T1: System
    T2: System
    witness: Decomposition


def all_good_decompositions(config: Configuration, T: System,
                            budget: OracleBudget = DEFAULT_BUDGET) -> list[GoodPair]:
    """Every (T1, T2) with T2 <= T a strong (mk+1)-system."""
    size = config.m * config.k + 1
    if len(T) < size:
        return []
    out = []
    for T2 in iter_subsystems(T, size):
        splits = all_splits(config, T2, 1, budget)
        if splits:
            out.append(GoodPair(T - T2, T2, splits[0]))
    return out


def _shared_part_keys(config: Configuration, T2: System, budget: OracleBudget) -> dict:
    """Map: multiset of basis parts -> tail, over all strong splits of T2."""
    keys = {}
    for d in all_splits(config, T2, 1, budget):
        keys.setdefault(tuple(sorted(d.parts)), d.tail)
    return keys


def local_relation_graph(config: Configuration, T: System,
                         budget: OracleBudget = DEFAULT_BUDGET) -> tuple[nx.Graph, bool]:
    """Good decompositions as nodes, witnessed local relations as edges."""
    nodes = all_good_decompositions(config, T, budget)
    keys = [_shared_part_keys(config, g.T2, budget) for g in nodes]
    G = nx.Graph()
    for g in nodes:
        G.add_node((g.T1, g.T2))
    for (a, ka), (b, kb) in itertools.combinations(zip(nodes, keys), 2):
        shared = set(ka) & set(kb)
        if shared:
            G.add_edge((a.T1, a.T2), (b.T1, b.T2), parts=min(shared))
    connected = G.number_of_nodes() <= 1 or nx.is_connected(G)
    return G, connected


def qualified_bruteforce(config: Configuration, T: System, l: int) -> bool:
    """Eq. check over spans of support subsets, using minor ranks only."""
    supp = T.support
    vecs = {i: config.v(i) for i in supp}
    p = config.field.p
    for size in range(len(supp) + 1):
        for combo in itertools.combinations(supp, size):
            d = minor_rank([vecs[i] for i in combo], p) if combo else 0
            inside = 0
            for i, c in T.items:
                if minor_rank([vecs[j] for j in combo] + [vecs[i]], p) == d:
                    inside += c
            if inside > l + config.m * d:
                return False
    return True


# --------------------------------------------------------------------------
# random corpus


def random_configuration(rng: random.Random, field, k: int, n: int, m: int,
                         zero_prob: float = 0.05, entries: Sequence[int] = (-1, 0, 1, 2)) -> Configuration:
    """Random vectors with small entries (collisions are wanted) spanning F^k."""
    from .systems import ConfigurationError

    pool = list(range(field.p)) if field.p is not None else list(entries)
    while True:
        vecs = []
        for _ in range(n):
            if rng.random() < zero_prob:
                vecs.append((0,) * k)
            else:
                vecs.append(tuple(rng.choice(pool) for _ in range(k)))
        try:
            return Configuration.build(vecs, m, field, k)
        except ConfigurationError:
            continue


def random_system(rng: random.Random, n: int, size: int, max_support: int | None = None) -> System:
    support = list(range(1, n + 1))
    if max_support is not None and max_support < n:
        support = rng.sample(support, max_support)
    return System.of([rng.choice(support) for _ in range(size)])


def multiset_count(n: int, size: int) -> int:
    return comb(n + size - 1, size)
