"""Independent reference implementations used as test oracles.

Everything here is deliberately written from scratch against the problem
statements, not against the package internals: naive exhaustive searches,
textbook bisection, and a slow recursive tree sampler. Tests compare the
fast implementations to these.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np

from shotgun_assembly.rooted import RootedGraph, RootedTree

# Rooted tree classes on 1..9 vertices (a frozen combinatorial constant).
ROOTED_TREE_COUNTS = [1, 1, 2, 4, 9, 20, 48, 115, 286]

# Connected graph classes on 1..7 vertices (a frozen combinatorial constant).
CONNECTED_GRAPH_COUNTS = [1, 1, 2, 6, 21, 112, 853]


# ---------------------------------------------------------------------------
# Exhaustive isomorphism checks


def exhaustive_tree_iso(t1: RootedTree, t2: RootedTree) -> bool:
    """Root-preserving isomorphism of rooted trees by exhaustive matching.

    Children of matched vertices are matched in every order (pruned by
    subtree size and color), so the search is exact.
    """
    if t1.n != t2.n:
        return False
    c1 = t1.colors or [0] * t1.n
    c2 = t2.colors or [0] * t2.n
    s1, s2 = t1.subtree_sizes(), t2.subtree_sizes()

    def match(a: int, b: int) -> bool:
        if c1[a] != c2[b] or s1[a] != s2[b]:
            return False
        k1, k2 = t1.children[a], t2.children[b]
        if len(k1) != len(k2):
            return False
        for perm in permutations(k2):
            if all(match(x, y) for x, y in zip(k1, perm)):
                return True
        return False

    return match(0, 0)


def exhaustive_rooted_graph_iso(g1: RootedGraph, g2: RootedGraph) -> bool:
    """Root-preserving isomorphism by brute force over vertex bijections."""
    if g1.n != g2.n or len(g1.edges) != len(g2.edges):
        return False
    n = g1.n
    c1 = g1.colors or (0,) * n
    c2 = g2.colors or (0,) * n
    e2 = set(g2.edges)
    others1 = [v for v in range(n) if v != g1.root]
    others2 = [v for v in range(n) if v != g2.root]
    if c1[g1.root] != c2[g2.root]:
        return False
    for perm in permutations(others2):
        mapping = dict(zip(others1, perm))
        mapping[g1.root] = g2.root
        if any(c1[v] != c2[mapping[v]] for v in others1):
            continue
        if all(
            (min(mapping[u], mapping[v]), max(mapping[u], mapping[v])) in e2
            for u, v in g1.edges
        ):
            return True
    return False


def exhaustive_graph_iso(n1: int, edges1, n2: int, edges2) -> bool:
    """Unrooted isomorphism by brute force over vertex bijections."""
    if n1 != n2 or len(edges1) != len(edges2):
        return False
    e2 = {(min(u, v), max(u, v)) for u, v in edges2}
    for perm in permutations(range(n2)):
        if all((min(perm[u], perm[v]), max(perm[u], perm[v])) in e2 for u, v in edges1):
            return True
    return False


# ---------------------------------------------------------------------------
# Independent canonical form for rooted trees (tuple-based AHU)


def ahu_tuple(t: RootedTree, v: int = 0):
    """Nested-tuple canonical form; independent of the byte encoder."""
    color = t.colors[v] if t.colors is not None else 0
    return (color, tuple(sorted(ahu_tuple(t, c) for c in t.children[v])))


def all_rooted_trees(n: int) -> list[RootedTree]:
    """One representative per rooted tree class with exactly n vertices.

    Enumerates every parent vector with parent[v] < v (each class has at
    least one such labeling) and dedups by the tuple AHU form.
    """
    seen = {}

    def rec(parent: list[int]) -> None:
        if len(parent) == n:
            t = RootedTree(parent)
            seen.setdefault(ahu_tuple(t), t)
            return
        for p in range(len(parent)):
            parent.append(p)
            rec(parent)
            parent.pop()

    rec([-1])
    return list(seen.values())


def atlas_rooted_graphs(max_n: int = 7):
    """Every connected rooted graph with at most max_n vertices.

    Yields (n, edges, root) with rootings of the same base graph deduped by
    exhaustive root-preserving isomorphism. Requires networkx.
    """
    import networkx as nx

    for g in nx.graph_atlas_g():
        n = g.number_of_nodes()
        if not 1 <= n <= max_n or not nx.is_connected(g):
            continue
        relabel = {v: i for i, v in enumerate(sorted(g.nodes()))}
        edges = sorted(
            (min(relabel[u], relabel[v]), max(relabel[u], relabel[v]))
            for u, v in g.edges()
        )
        kept: list[RootedGraph] = []
        for root in range(n):
            cand = RootedGraph.build(n, edges, root=root)
            if not any(exhaustive_rooted_graph_iso(cand, k) for k in kept):
                kept.append(cand)
        for cand in kept:
            yield cand


# ---------------------------------------------------------------------------
# Numeric oracles


def bisection_fixed_point(lam: float, tol: float = 1e-13) -> float:
    """Smallest root of x = exp(lam*(x - 1)) in [0, 1] by plain bisection."""
    f = lambda x: math.exp(lam * (x - 1.0)) - x
    if lam <= 1:
        return 1.0
    lo, hi = 0.0, 1.0 - 1e-9
    while f(hi) > 0:
        hi = (hi + 1.0) / 2
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def poisson_pmf_ref(lam: float, k: int) -> float:
    return math.exp(-lam) * lam**k / math.factorial(k)


def within(value: float, target: float, tol: float) -> bool:
    return abs(value - target) <= tol


# ---------------------------------------------------------------------------
# Slow reference sampler: recursive trees and recursive isomorphism


def slow_gw_tree(rng: np.random.Generator, lam: float, max_size: int = 4000):
    """Poisson branching process as a nested tuple ((), ...), children
    unsorted; None when the tree outgrows max_size."""
    budget = [max_size]

    def grow():
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        kids = []
        for _ in range(int(rng.poisson(lam))):
            k = grow()
            if k is None:
                return None
            kids.append(k)
        return tuple(kids)

    return grow()


def slow_tree_iso(a, b) -> bool:
    """Recursive isomorphism of nested-tuple trees."""

    def norm(t):
        return tuple(sorted(norm(c) for c in t))

    return norm(a) == norm(b)


def slow_tree_size(t) -> int:
    return 1 + sum(slow_tree_size(c) for c in t)


def slow_tree_height(t) -> int:
    return 1 + max((slow_tree_height(c) for c in t), default=-1)


def slow_truncate(t, r: int):
    if r == 0:
        return ()
    return tuple(slow_truncate(c, r - 1) for c in t)
