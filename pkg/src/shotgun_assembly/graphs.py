"""Simple graphs, sparse random graph generation, and local structure.

Graphs are plain vertex-count + sorted edge tuples with cached adjacency.
Generation of G(n, lambda/n) is bit-reproducible for a fixed (n, lambda,
seed): small instances evaluate every pair, large ones skip through the
pair sequence geometrically, which touches only the expected lambda*n/2
positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import SearchBudgetExceeded
from .rooted import DEFAULT_COMPLEXITY_BOUND, DEFAULT_NODE_BUDGET, RootedGraph, profile

__all__ = [
    "Graph",
    "SubgraphPiece",
    "generate_er",
    "neighborhood",
    "component",
    "components",
    "graph_profile",
    "complexity",
    "bridges",
    "bridging_trees_and_blocks",
    "has_two_arms",
    "is_degenerate",
    "write_edge_list",
    "read_edge_list",
    "graph_to_json",
    "graph_from_json",
]

# below this size, per-pair Bernoulli sampling is cheap enough
_PAIRWISE_LIMIT = 10_000


@dataclass(frozen=True)
class Graph:
    """An undirected simple graph on vertices 0..n-1."""

    n: int
    edges: tuple[tuple[int, int], ...]
    p_clamped: bool = False

    def __post_init__(self):
        prev = None
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge ({u}, {v})")
            if prev is not None and (u, v) <= prev:
                raise ValueError("edges must be strictly sorted")
            prev = (u, v)

    @classmethod
    def build(cls, n: int, edges: Iterable[tuple[int, int]], p_clamped: bool = False) -> "Graph":
        norm = sorted({(min(u, v), max(u, v)) for u, v in edges})
        return cls(n, tuple(norm), p_clamped)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        a, b = (u, v) if u < v else (v, u)
        return (a, b) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


def _unrank_pairs(idx: np.ndarray, n: int) -> list[tuple[int, int]]:
    """Map linear indices over lexicographic pairs (u < v) back to pairs."""
    if len(idx) == 0:
        return []
    k = idx.astype(np.float64)
    # first index with leading vertex u is S(u) = u*(2n - u - 1)/2
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * k)) / 2).astype(np.int64)
    u = np.clip(u, 0, n - 2)
    s = u * (2 * n - u - 1) // 2
    # float sqrt can land one row off; fix up both directions
    too_high = s > idx
    u[too_high] -= 1
    s = u * (2 * n - u - 1) // 2
    nxt = (u + 1) * (2 * n - u - 2) // 2
    too_low = idx >= nxt
    u[too_low] += 1
    s = u * (2 * n - u - 1) // 2
    v = u + 1 + (idx - s)
    return list(zip(u.tolist(), v.tolist()))


def generate_er(n: int, lam: float, seed: int) -> Graph:
    """Sample G(n, lambda/n), clamping the edge probability at one.

    Output is a deterministic function of (n, lam, seed). For n below
    10^4 every pair is tested; beyond that the sampler draws geometric
    gaps through the C(n, 2) pair slots.
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    clamped = lam >= n
    p = 1.0 if clamped else lam / n
    total = n * (n - 1) // 2
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if total == 0 or p == 0.0:
        return Graph(n, (), clamped)
    if n < _PAIRWISE_LIMIT:
        hits = np.flatnonzero(rng.random(total) < p)
    else:
        log_q = math.log1p(-p)
        positions = []
        pos = -1
        batch = max(1024, int(total * p * 1.25) + 64)
        while pos < total:
            gaps = np.floor(np.log1p(-rng.random(batch)) / log_q).astype(np.int64) + 1
            steps = np.cumsum(gaps)
            positions.append(pos + steps)
            pos += int(steps[-1])
        hits = np.concatenate(positions)
        hits = hits[hits < total]
    return Graph(n, tuple(_unrank_pairs(hits, n)), clamped)


def _bfs(adj, v: int, r: int | None) -> tuple[list[int], dict[int, int]]:
    """Breadth-first order and depths out to radius r (None = unbounded)."""
    order = [v]
    depth = {v: 0}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        du = depth[u]
        if r is not None and du >= r:
            continue
        for w in adj[u]:
            if w not in depth:
                depth[w] = du + 1
                order.append(w)
    return order, depth


def neighborhood(g: Graph, v: int, r: int) -> RootedGraph:
    """The ball of radius r around v, rooted at v, with depth tags.

    Local ids follow breadth-first discovery order, so the root is 0 and
    depth tags are nondecreasing along the id sequence.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    adj = g.adjacency
    order, depth = _bfs(adj, v, r)
    local = {u: i for i, u in enumerate(order)}
    edges = []
    for u in order:
        iu = local[u]
        for w in adj[u]:
            iw = local.get(w)
            if iw is not None and iu < iw:
                edges.append((iu, iw))
    return RootedGraph.build(
        len(order), edges, root=0, depth=[depth[u] for u in order]
    )


def component(g: Graph, v: int) -> RootedGraph:
    """The connected component of v, as an unbounded neighborhood."""
    return neighborhood(g, v, g.n)


def components(g: Graph) -> list[tuple[int, ...]]:
    """Vertex sets of all connected components, each sorted, in min-vertex order."""
    seen = [False] * g.n
    adj = g.adjacency
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        order, _ = _bfs(adj, s, None)
        for u in order:
            seen[u] = True
        out.append(tuple(sorted(order)))
    return out


def graph_profile(
    g: Graph,
    r: int,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
):
    """Multiset of canonical codes of all radius-r neighborhoods of g."""
    return profile(
        (neighborhood(g, v, r) for v in range(g.n)),
        s_max=s_max,
        node_budget=node_budget,
    )


def complexity(h: Graph | RootedGraph) -> int:
    """Independent cycle count |E| - |V| + 1 of a connected graph."""
    adj = h.adjacency
    n = h.n if isinstance(h, Graph) else h.n
    root = 0 if isinstance(h, Graph) else h.root
    order, _ = _bfs(adj, root, None)
    if len(order) != n:
        raise ValueError("complexity requires a connected graph")
    m = len(h.edges)
    return m - n + 1


def bridges(g: Graph) -> list[tuple[int, int]]:
    """All cut edges, sorted. Iterative lowpoint computation."""
    adj = g.adjacency
    n = g.n
    disc = [-1] * n
    low = [0] * n
    out: list[tuple[int, int]] = []
    timer = 0
    for s in range(n):
        if disc[s] != -1:
            continue
        disc[s] = low[s] = timer
        timer += 1
        stack: list[tuple[int, int, Iterable[int]]] = [(s, -1, iter(adj[s]))]
        while stack:
            v, parent, it = stack[-1]
            descended = False
            for w in it:
                if w == parent:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, iter(adj[w])))
                    descended = True
                    break
                if disc[w] < low[v]:
                    low[v] = disc[w]
            if not descended:
                stack.pop()
                if parent != -1:
                    if low[v] < low[parent]:
                        low[parent] = low[v]
                    if low[v] > disc[parent]:
                        out.append((min(parent, v), max(parent, v)))
    return sorted(out)


class SubgraphPiece(NamedTuple):
    """An edge-induced connected piece, rooted at its least original vertex."""

    rooted: RootedGraph
    vertices: tuple[int, ...]  # original ids; position = local id


def _edge_induced_pieces(n: int, edge_list: list[tuple[int, int]]) -> list[SubgraphPiece]:
    adj: dict[int, list[int]] = {}
    for u, v in edge_list:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    seen: set[int] = set()
    pieces = []
    for s in sorted(adj):
        if s in seen:
            continue
        stack = [s]
        comp = {s}
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        verts = tuple(sorted(comp))
        local = {u: i for i, u in enumerate(verts)}
        edges = [
            (local[u], local[v])
            for u, v in edge_list
            if u in comp and v in comp
        ]
        pieces.append(
            SubgraphPiece(RootedGraph.build(len(verts), edges, root=0), verts)
        )
    return pieces


def bridging_trees_and_blocks(
    g: Graph,
) -> tuple[list[SubgraphPiece], list[SubgraphPiece], dict[int, bool]]:
    """Split edges into bridge-induced trees and cycle-bearing blocks.

    Returns (trees, blocks, boundary) where boundary flags, for every vertex
    of a bridge-induced tree, whether it has a neighbor outside that tree.
    Vertices incident to no edge of a class do not appear in that class.
    """
    br = set(bridges(g))
    bridge_edges = [e for e in g.edges if e in br]
    cycle_edges = [e for e in g.edges if e not in br]
    trees = _edge_induced_pieces(g.n, bridge_edges)
    blocks = _edge_induced_pieces(g.n, cycle_edges)
    adj = g.adjacency
    boundary: dict[int, bool] = {}
    for piece in trees:
        members = set(piece.vertices)
        for u in piece.vertices:
            boundary[u] = any(w not in members for w in adj[u])
    return trees, blocks, boundary


def has_two_arms(g: Graph, v: int, r: int, node_budget: int = 100_000) -> bool:
    """Whether two simple paths of length r leave v sharing only v.

    Acyclic balls are answered by subtree heights; otherwise a budgeted
    backtracking search runs over the radius-r ball.
    """
    if r < 1:
        raise ValueError("arm length must be >= 1")
    adj = g.adjacency
    order, depth = _bfs(adj, v, r)
    members = set(order)
    ball_adj = {u: [w for w in adj[u] if w in members] for u in order}
    m2 = sum(len(a) for a in ball_adj.values())
    if m2 == 2 * (len(order) - 1):
        # ball is a tree: arms are root chains; count deep child subtrees
        deep_children = set()
        parent = {v: None}
        for u in order:
            for w in ball_adj[u]:
                if w not in parent:
                    parent[w] = u
        for u in order:
            if depth[u] == r:
                w = u
                while parent[w] != v:
                    w = parent[w]
                deep_children.add(w)
                if len(deep_children) >= 2:
                    return True
        return False

    budget = [node_budget]

    def spend():
        budget[0] -= 1
        if budget[0] < 0:
            raise SearchBudgetExceeded(node_budget, "two-arm search")

    used: set[int] = {v}

    def second(u: int, remaining: int, used2: set[int]) -> bool:
        if remaining == 0:
            return True
        spend()
        for w in ball_adj[u]:
            if w not in used and w not in used2:
                used2.add(w)
                if second(w, remaining - 1, used2):
                    return True
                used2.discard(w)
        return False

    def first(u: int, remaining: int) -> bool:
        if remaining == 0:
            return second(v, r, set())
        spend()
        for w in ball_adj[u]:
            if w not in used:
                used.add(w)
                if first(w, remaining - 1):
                    return True
                used.discard(w)
        return False

    return first(v, r)


def is_degenerate(g: Graph, v: int, r: int) -> bool:
    """True when the radius-r ball of v stopped growing a step earlier."""
    if r < 1:
        raise ValueError("radius must be >= 1")
    _, depth = _bfs(g.adjacency, v, r)
    return all(d < r for d in depth.values())


def write_edge_list(g: Graph, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{g.n} {g.edge_count}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def read_edge_list(path: str) -> Graph:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError("expected 'n m' header")
        n, m = int(header[0]), int(header[1])
        edges = []
        for _ in range(m):
            u, v = fh.readline().split()
            edges.append((int(u), int(v)))
    return Graph.build(n, edges)


def graph_to_json(g: Graph) -> dict:
    return {
        "n": g.n,
        "edges": [[u, v] for u, v in g.edges],
        "p_clamped": g.p_clamped,
    }


def graph_from_json(d: dict) -> Graph:
    return Graph.build(
        int(d["n"]),
        [(int(u), int(v)) for u, v in d["edges"]],
        bool(d.get("p_clamped", False)),
    )
