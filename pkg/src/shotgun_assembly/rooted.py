"""Rooted trees, rooted graphs, and canonical codes.

Rooted trees are encoded bottom-up: every vertex receives the byte string
``(`` + color + sorted child codes + ``)``, so two trees produce the same
code exactly when some root-preserving isomorphism maps one to the other.
Rooted graphs with a bounded number of independent cycles are handled by
iterated color refinement seeded with (root flag, color, depth), followed
by backtracking over the first refinement-stable cell that is not yet a
singleton. The search carries an explicit node budget and refuses graphs
whose cycle complexity exceeds a configurable bound.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import ComplexityExceeded, SearchBudgetExceeded

__all__ = [
    "RootedTree",
    "RootedGraph",
    "canon_tree",
    "canon_rooted_graph",
    "canon_unrooted",
    "restrict",
    "height",
    "level_count",
    "isomorphic_to_depth",
    "iso_depth",
    "spine_event",
    "profile",
    "profile_to_json",
    "profile_from_json",
    "tree_to_rooted_graph",
    "rooted_graph_to_tree",
]

DEFAULT_COMPLEXITY_BOUND = 12
DEFAULT_NODE_BUDGET = 10**6


class RootedTree:
    """A rooted tree stored as a parent array with derived children lists.

    Node 0 is always the root. ``colors`` is an optional per-node integer
    label that participates in canonical codes.
    """

    __slots__ = ("parent", "children", "depth", "colors")

    def __init__(self, parent: Sequence[int], colors: Sequence[int] | None = None):
        n = len(parent)
        if n == 0 or parent[0] != -1:
            raise ValueError("node 0 must be the root (parent -1)")
        children: list[list[int]] = [[] for _ in range(n)]
        for v in range(1, n):
            p = parent[v]
            if not 0 <= p < n or p == v:
                raise ValueError(f"bad parent {p} for node {v}")
            children[p].append(v)
        depth = [0] * n
        # parents may appear in any order; resolve depths by chasing
        for v in range(1, n):
            d, u, chain = 0, v, []
            while depth[u] == 0 and u != 0:
                chain.append(u)
                if len(chain) > n:
                    raise ValueError("parent array contains a cycle")
                u = parent[u]
            d = depth[u]
            for w in reversed(chain):
                d += 1
                depth[w] = d
        self.parent = list(parent)
        self.children = children
        self.depth = depth
        self.colors = list(colors) if colors is not None else None

    @classmethod
    def from_offspring_levels(cls, levels: Sequence[Sequence[int]]) -> "RootedTree":
        """Build a tree from per-level offspring counts in breadth-first order.

        ``levels[l]`` lists the child counts of the level-``l`` nodes, in the
        order those nodes were created. ``levels[0]`` has one entry (the root).
        """
        parent = [-1]
        frontier = [0]
        for counts in levels:
            if len(counts) != len(frontier):
                raise ValueError("offspring counts misaligned with level size")
            nxt = []
            for node, c in zip(frontier, counts):
                for _ in range(int(c)):
                    parent.append(node)
                    nxt.append(len(parent) - 1)
            frontier = nxt
            if not frontier:
                break
        return cls(parent)

    @property
    def n(self) -> int:
        return len(self.parent)

    def height(self) -> int:
        return max(self.depth)

    def level_count(self, level: int) -> int:
        return sum(1 for d in self.depth if d == level)

    def level_counts(self) -> list[int]:
        out = [0] * (self.height() + 1)
        for d in self.depth:
            out[d] += 1
        return out

    def subtree_sizes(self) -> list[int]:
        sizes = [1] * self.n
        for v in sorted(range(self.n), key=lambda u: -self.depth[u]):
            for c in self.children[v]:
                sizes[v] += sizes[c]
        return sizes

    def subtree_heights(self) -> list[int]:
        hs = [0] * self.n
        for v in sorted(range(self.n), key=lambda u: -self.depth[u]):
            if self.children[v]:
                hs[v] = 1 + max(hs[c] for c in self.children[v])
        return hs

    def restrict(self, r: int) -> "RootedTree":
        """The subtree of all nodes at depth <= r, with node order preserved."""
        if r < 0:
            raise ValueError("depth must be nonnegative")
        keep = [v for v in range(self.n) if self.depth[v] <= r]
        remap = {v: i for i, v in enumerate(keep)}
        parent = [-1 if v == 0 else remap[self.parent[v]] for v in keep]
        colors = [self.colors[v] for v in keep] if self.colors is not None else None
        return RootedTree(parent, colors)

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, height={self.height()})"


@dataclass(frozen=True)
class RootedGraph:
    """A connected graph with a distinguished root and optional decorations.

    ``edges`` are normalized pairs (u < v) in lexicographic order. ``depth``
    optionally records distance-from-root tags (as produced by neighborhood
    extraction); ``colors`` are integer labels that canonical codes respect.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    root: int = 0
    colors: tuple[int, ...] | None = None
    depth: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0 <= self.root < self.n:
            raise ValueError("root out of range")
        seen = set()
        prev = None
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge ({u}, {v})")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            if prev is not None and (u, v) < prev:
                raise ValueError("edges must be sorted")
            seen.add((u, v))
            prev = (u, v)
        for tag in (self.colors, self.depth):
            if tag is not None and len(tag) != self.n:
                raise ValueError("decoration length must match vertex count")

    @classmethod
    def build(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        root: int = 0,
        colors: Sequence[int] | None = None,
        depth: Sequence[int] | None = None,
    ) -> "RootedGraph":
        norm = sorted({(min(u, v), max(u, v)) for u, v in edges})
        return cls(
            n,
            tuple(norm),
            root,
            tuple(colors) if colors is not None else None,
            tuple(depth) if depth is not None else None,
        )

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


def _bfs_depths(adj: Sequence[Sequence[int]], root: int) -> list[int]:
    depth = [-1] * len(adj)
    depth[root] = 0
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            du = depth[u] + 1
            for w in adj[u]:
                if depth[w] < 0:
                    depth[w] = du
                    nxt.append(w)
        frontier = nxt
    return depth


def canon_tree(t: RootedTree) -> bytes:
    """Canonical code of a rooted (optionally colored) tree.

    Child codes are sorted bytewise, so the code is invariant under any
    reordering of siblings. With no colors a single vertex is ``b"()"``.
    """
    order = sorted(range(t.n), key=lambda v: -t.depth[v])
    colors = t.colors
    code: list[bytes] = [b""] * t.n
    for v in order:
        kids = b"".join(sorted(code[c] for c in t.children[v]))
        if colors is None:
            code[v] = b"(" + kids + b")"
        else:
            code[v] = b"(%d:" % colors[v] + kids + b")"
    return code[0]


def rooted_graph_to_tree(g: RootedGraph) -> RootedTree:
    """Interpret an acyclic rooted graph as a RootedTree (breadth-first ids)."""
    if len(g.edges) != g.n - 1:
        raise ValueError("rooted graph is not a tree")
    adj = g.adjacency
    depth = _bfs_depths(adj, g.root)
    if min(depth) < 0:
        raise ValueError("rooted graph is not connected")
    order = [g.root]
    parent_of = {g.root: -1}
    for u in order:
        for w in adj[u]:
            if w not in parent_of:
                parent_of[w] = u
                order.append(w)
    remap = {v: i for i, v in enumerate(order)}
    parent = [-1] * g.n
    for v, i in remap.items():
        parent[i] = remap[parent_of[v]] if parent_of[v] >= 0 else -1
    colors = None
    if g.colors is not None:
        colors = [g.colors[v] for v in order]
    return RootedTree(parent, colors)


def tree_to_rooted_graph(t: RootedTree) -> RootedGraph:
    edges = [(t.parent[v], v) for v in range(1, t.n)]
    return RootedGraph.build(
        t.n, edges, root=0, colors=t.colors, depth=tuple(t.depth)
    )


def _renumber(keys: Sequence) -> list[int]:
    table = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [table[k] for k in keys]


def _refine(adj: Sequence[Sequence[int]], colors: list[int]) -> list[int]:
    n = len(colors)
    ncell = len(set(colors))
    while ncell < n:
        keys = [
            (colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(n)
        ]
        new = _renumber(keys)
        nnew = len(set(new))
        if nnew == ncell:
            return new
        colors, ncell = new, nnew
    return colors


def canon_rooted_graph(
    g: RootedGraph,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> bytes:
    """Canonical code of a connected rooted graph with bounded cycle count.

    Trees are delegated to the tree encoder (prefix ``T``); everything else
    goes through a colored-core search (prefix ``G``). Raises
    ComplexityExceeded when edges - vertices + 1 > s_max, and
    SearchBudgetExceeded if the branch-and-bound walk grows past the budget.
    """
    adj = g.adjacency
    depth = _bfs_depths(adj, g.root)
    if min(depth) < 0:
        raise ValueError("rooted graph must be connected")
    cycles = len(g.edges) - g.n + 1
    if cycles > s_max:
        raise ComplexityExceeded(cycles, s_max)
    if cycles == 0:
        return b"T" + canon_tree(rooted_graph_to_tree(g))
    return b"G" + _canon_cyclic(g, adj, node_budget)


def _canon_cyclic(g: RootedGraph, adj: Sequence[Sequence[int]], node_budget: int) -> bytes:
    """Colored-core canonicalization of a connected graph with cycles.

    Sparse near-trees carry almost all of their symmetry in hanging trees
    (twin leaves alone would make naive individualization exponential), so
    degree-1 vertices are stripped down to the 2-core, every core vertex is
    colored by the canonical code of its hanging tree (which also encodes
    vertex colors and the root position), and the individualization-
    refinement search runs on the core alone.
    """
    n = len(adj)
    deg = [len(a) for a in adj]
    removed = [False] * n
    hang_parent: dict[int, int] = {}
    stack = [v for v in range(n) if deg[v] == 1]
    while stack:
        v = stack.pop()
        if removed[v]:
            continue
        removed[v] = True
        for u in adj[v]:
            if not removed[u]:
                hang_parent[v] = u
                deg[u] -= 1
                if deg[u] == 1:
                    stack.append(u)
                break
    core = [v for v in range(n) if not removed[v]]
    hang_children: dict[int, list[int]] = {}
    for v, p in hang_parent.items():
        hang_children.setdefault(p, []).append(v)
    colors, root = g.colors, g.root

    def pendant_code(c: int) -> bytes:
        order = [c]
        par = [-1]
        pos = {c: 0}
        for x in order:
            for y in sorted(hang_children.get(x, ())):
                pos[y] = len(order)
                par.append(pos[x])
                order.append(y)
        marks = [
            2 * (0 if colors is None else colors[v]) + (1 if v == root else 0)
            for v in order
        ]
        return canon_tree(RootedTree(par, marks))

    cpos = {c: i for i, c in enumerate(core)}
    core_adj = [
        tuple(cpos[u] for u in adj[c] if not removed[u]) for c in core
    ]
    core_edges = [
        (cpos[c], cpos[u])
        for c in core
        for u in adj[c]
        if not removed[u] and cpos[c] < cpos[u]
    ]
    pbytes = [pendant_code(c) for c in core]
    k = len(core)
    best: bytes | None = None
    used = 0

    def emit(stable: list[int]) -> bytes:
        order = sorted(range(k), key=stable.__getitem__)
        pos = [0] * k
        for i, v in enumerate(order):
            pos[v] = i
        edges = sorted(
            (min(pos[a], pos[b]), max(pos[a], pos[b])) for a, b in core_edges
        )
        parts = [b"%d;" % k, b";".join(b"%d,%d" % e for e in edges)]
        parts.append(b"#" + b"#".join(pbytes[v] for v in order))
        return b"".join(parts)

    def explore(cand: list[int]) -> None:
        nonlocal best, used
        used += 1
        if used > node_budget:
            raise SearchBudgetExceeded(node_budget, "canonical labelling")
        cand = _refine(core_adj, cand)
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(cand):
            cells.setdefault(c, []).append(v)
        target: list[int] | None = None
        for c in sorted(cells):
            members = cells[c]
            if len(members) > 1 and (target is None or len(members) < len(target)):
                target = members
        if target is None:
            code = emit(cand)
            if best is None or code < best:
                best = code
            return
        for v in target:
            branched = [(c, 1) for c in cand]
            branched[v] = (cand[v], 0)
            explore(_renumber(branched))

    explore(_renumber(pbytes))
    assert best is not None
    return best


def _tree_centers(adj: Sequence[Sequence[int]]) -> list[int]:
    n = len(adj)
    if n == 1:
        return [0]
    deg = [len(a) for a in adj]
    layer = [v for v in range(n) if deg[v] == 1]
    removed = len(layer)
    while removed < n:
        nxt = []
        for v in layer:
            for u in adj[v]:
                deg[u] -= 1
                if deg[u] == 1:
                    nxt.append(u)
        if not nxt:
            break
        removed += len(nxt)
        layer = nxt
    return sorted(layer)


def canon_unrooted(
    n: int,
    edges: Iterable[tuple[int, int]],
    colors: Sequence[int] | None = None,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> bytes:
    """Canonical code of a connected unrooted graph.

    Trees are rooted at their (at most two) centers; other graphs are rooted
    at each vertex of a refinement-selected cell, taking the least rooted
    code. Cell selection only uses label-independent refinement colors, so
    isomorphic inputs agree.
    """
    g0 = RootedGraph.build(n, edges, root=0, colors=colors)
    adj = g0.adjacency
    if min(_bfs_depths(adj, 0)) < 0:
        raise ValueError("graph must be connected")
    m = len(g0.edges)
    if m == n - 1:
        best = None
        for c in _tree_centers(adj):
            rg = RootedGraph(g0.n, g0.edges, root=c, colors=g0.colors)
            code = b"T" + canon_tree(rooted_graph_to_tree(rg))
            if best is None or code < best:
                best = code
        assert best is not None
        return b"U" + best
    cycles = m - n + 1
    if cycles > s_max:
        raise ComplexityExceeded(cycles, s_max)
    base = [(colors[v] if colors is not None else 0,) for v in range(n)]
    stable = _refine(adj, _renumber(base))
    target_color = min(stable)
    candidates = [v for v in range(n) if stable[v] == target_color]
    best = None
    for v in candidates:
        rg = RootedGraph(g0.n, g0.edges, root=v, colors=g0.colors)
        code = canon_rooted_graph(rg, s_max=s_max, node_budget=node_budget)
        if best is None or code < best:
            best = code
    assert best is not None
    return b"U" + best


def restrict(t: RootedTree | RootedGraph, r: int):
    """Truncate to depth r. Rooted graphs must carry depth tags."""
    if isinstance(t, RootedTree):
        return t.restrict(r)
    if t.depth is None:
        raise ValueError("rooted graph restriction needs depth tags")
    keep = [v for v in range(t.n) if t.depth[v] <= r]
    keepset = set(keep)
    remap = {v: i for i, v in enumerate(keep)}
    edges = [
        (remap[u], remap[v]) for u, v in t.edges if u in keepset and v in keepset
    ]
    colors = [t.colors[v] for v in keep] if t.colors is not None else None
    depth = [t.depth[v] for v in keep]
    return RootedGraph.build(
        len(keep), edges, root=remap[t.root], colors=colors, depth=depth
    )


def height(t: RootedTree | RootedGraph) -> int:
    if isinstance(t, RootedTree):
        return t.height()
    if t.depth is not None:
        return max(t.depth)
    return max(_bfs_depths(t.adjacency, t.root))


def level_count(t: RootedTree | RootedGraph, level: int) -> int:
    if isinstance(t, RootedTree):
        return t.level_count(level)
    depths = t.depth if t.depth is not None else _bfs_depths(t.adjacency, t.root)
    return sum(1 for d in depths if d == level)


def isomorphic_to_depth(t1: RootedTree, t2: RootedTree, r: int) -> bool:
    """Whether both trees reach depth r and their depth-r truncations match."""
    if r < 0:
        raise ValueError("depth must be nonnegative")
    if r == 0:
        return True
    if t1.height() < r or t2.height() < r:
        return False
    return iso_depth(t1, t2, r) >= r


def iso_depth(t1: RootedTree, t2: RootedTree, max_r: int) -> int:
    """Largest r <= max_r with isomorphic depth-r truncations.

    Truncation isomorphism is monotone in r. Level counts are compared
    first; codes are only computed for depths where counts agree.
    """
    if max_r <= 0:
        return 0
    lc1, lc2 = t1.level_counts(), t2.level_counts()
    bound = max_r
    ended = False
    for r in range(1, max_r + 1):
        c1 = lc1[r] if r < len(lc1) else 0
        c2 = lc2[r] if r < len(lc2) else 0
        if c1 != c2:
            bound = r - 1
            break
        if c1 == 0:
            ended = True
            break
    if ended:
        # both trees stop at the same level; a truncation at or beyond their
        # common height is the whole tree
        if canon_tree(t1) == canon_tree(t2):
            return max_r
        bound = t1.height() - 1
    return _scan_iso_depth(t1, t2, bound)


def _scan_iso_depth(t1: RootedTree, t2: RootedTree, max_r: int) -> int:
    best = 0
    for r in range(1, max_r + 1):
        if r == 1:
            ok = t1.level_count(1) == t2.level_count(1)
        else:
            ok = canon_tree(t1.restrict(r)) == canon_tree(t2.restrict(r))
        if not ok:
            return best
        best = r
    return best


def spine_event(t1: RootedTree, t2: RootedTree, r: int, side_budget: int) -> bool:
    """Structured deep-agreement event for a pair of rooted trees.

    Requires, with L = side_budget: depth-r truncations isomorphic with both
    heights >= r; both heights <= r + L and unequal; every vertex at level
    >= r has zero or exactly two children (in both trees); and a descending
    root path v_0..v_{r-L} in t1 along which each step strands at most L
    vertices (|subtree(v_{i-1})| - |subtree(v_i)| <= L).
    """
    L = side_budget
    if not (r > L >= 1):
        raise ValueError("need r > side_budget >= 1")
    h1, h2 = t1.height(), t2.height()
    if min(h1, h2) < r or h1 == h2 or max(h1, h2) > r + L:
        return False
    for t in (t1, t2):
        for v in range(t.n):
            if t.depth[v] >= r and len(t.children[v]) not in (0, 2):
                return False
    if not isomorphic_to_depth(t1, t2, r):
        return False
    sizes = t1.subtree_sizes()
    heights = t1.subtree_heights()
    target = r - L

    def descend(u: int, i: int) -> bool:
        if i == target:
            return True
        for c in t1.children[u]:
            if sizes[u] - sizes[c] <= L and heights[c] >= target - i - 1:
                if descend(c, i + 1):
                    return True
        return False

    return descend(0, 0)


def profile(
    entries: Iterable[RootedGraph],
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Counter:
    """Multiset of canonical codes of rooted graphs."""
    out: Counter = Counter()
    for g in entries:
        out[canon_rooted_graph(g, s_max=s_max, node_budget=node_budget)] += 1
    return out


def profile_to_json(p: Counter) -> dict[str, int]:
    return {code.hex(): int(cnt) for code, cnt in sorted(p.items())}


def profile_from_json(d: dict[str, int]) -> Counter:
    return Counter({bytes.fromhex(k): int(v) for k, v in d.items()})
