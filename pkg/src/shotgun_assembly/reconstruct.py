"""Reconstruction of a graph from its multiset of rooted r-neighborhoods.

The pipeline peels off small components whose entries are fully determined
(degenerate preprocessing), classifies vertices as good or bad by whether
their depth-``ceil(rho*r)`` neighborhood code is unique, extracts bad
components together with their labeled good boundaries from the entries of
nearby good vertices, deduplicates those records, and reassembles a graph
from good-good adjacency plus fresh copies of the bad interiors.

Entries carry no vertex identities. The optional audit table maps entries
back to source vertices for post-hoc evaluation only; no reconstruction
decision may read it.
"""

from __future__ import annotations

import gzip
import json
import math
from collections import Counter
from dataclasses import dataclass

from .errors import InconsistentAdjacency, MatchFailure
from .graphs import Graph, components, neighborhood
from .rooted import (
    DEFAULT_COMPLEXITY_BOUND,
    DEFAULT_NODE_BUDGET,
    RootedGraph,
    canon_rooted_graph,
    canon_unrooted,
)

VERIFY_COMPLEXITY_BOUND = 64


def label_depth(rho: float, r: int) -> int:
    """ceil(rho * r), protected against binary float fuzz (0.6 * 5 > 3)."""
    prod = rho * r
    near = round(prod)
    if abs(prod - near) < 1e-9:
        return int(near)
    return int(math.ceil(prod))


def _check_params(r: int, rho: float) -> int:
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    m = label_depth(rho, r)
    if not 1 <= m <= r - 2:
        raise ValueError(
            f"need 1 <= ceil(rho*r) <= r - 2, got ceil({rho}*{r}) = {m}"
        )
    return m


@dataclass(frozen=True)
class NeighborhoodProfile:
    """One rooted, depth-tagged r-neighborhood per vertex, in list order.

    ``audit`` is a sealed side table of source vertex ids used only to
    score reconstructions after the fact; nothing in this module reads it.
    """

    entries: tuple[RootedGraph, ...]
    r: int
    rho: float
    audit: tuple[int, ...] | None = None

    def __post_init__(self):
        _check_params(self.r, self.rho)
        if self.audit is not None and len(self.audit) != len(self.entries):
            raise ValueError("audit table length must match entries")

    @property
    def code_depth(self) -> int:
        return label_depth(self.rho, self.r)


@dataclass(frozen=True)
class BadComponentRecord:
    """A bad component plus its labeled good boundary, ready to copy.

    ``D_code`` is the canonical code of the component-with-boundary graph
    where boundary vertices are colored by their label codes and interior
    vertices are uncolored; records with equal codes are interchangeable.
    ``source`` names the producing good vertex (by label code) and the
    component's index within that entry. The interior/boundary edge lists
    use local interior ids 0..interior_size-1.
    """

    D_code: bytes
    boundary_codes: frozenset
    source: tuple
    interior_size: int
    interior_edges: tuple
    boundary_edges: tuple


@dataclass(frozen=True)
class ReconstructionResult:
    graph_prime: Graph
    degenerate_components: tuple
    stats: dict
    success: bool | None = None


def build_profile(g: Graph, r: int, rho: float) -> NeighborhoodProfile:
    """The observable input to reconstruction: every vertex's r-neighborhood."""
    _check_params(r, rho)
    entries = tuple(neighborhood(g, v, r) for v in range(g.n))
    return NeighborhoodProfile(entries, r, rho, audit=tuple(range(g.n)))


def _entry_graph(entry: RootedGraph) -> Graph:
    return Graph(entry.n, entry.edges)


def preprocess_degenerate(
    p: NeighborhoodProfile,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[NeighborhoodProfile, list[RootedGraph]]:
    """Peel entries explained by small components.

    An entry with no depth-r vertex is its root's whole component, and the
    r-neighborhoods of that component's vertices are all computable from
    it. Each round records the lowest such entry and removes a matching
    multiset of entries (lowest indices first, always including the picked
    entry itself). Raises MatchFailure when the multiset cannot be matched,
    which signals an inconsistent profile.
    """
    entries = p.entries
    alive = sorted(range(len(entries)))
    code_cache: dict[int, bytes] = {}

    def full_code(i: int) -> bytes:
        if i not in code_cache:
            code_cache[i] = canon_rooted_graph(
                entries[i], s_max=s_max, node_budget=node_budget
            )
        return code_cache[i]

    removed_components: list[RootedGraph] = []
    while True:
        pick = next(
            (i for i in alive if max(entries[i].depth) <= p.r - 1), None
        )
        if pick is None:
            break
        comp = entries[pick]
        removed_components.append(comp)
        comp_graph = _entry_graph(comp)
        needed = Counter(
            canon_rooted_graph(
                neighborhood(comp_graph, u, p.r),
                s_max=s_max,
                node_budget=node_budget,
            )
            for u in range(comp.n)
        )
        alive.remove(pick)
        needed[full_code(pick)] -= 1
        for i in list(alive):
            if sum(needed.values()) == 0:
                break
            c = full_code(i)
            if needed.get(c, 0) > 0:
                needed[c] -= 1
                alive.remove(i)
        if any(k > 0 for k in needed.values()):
            raise MatchFailure(
                "profile lacks entries matching a degenerate component"
            )
    kept = NeighborhoodProfile(
        tuple(entries[i] for i in alive),
        p.r,
        p.rho,
        audit=tuple(p.audit[i] for i in alive) if p.audit is not None else None,
    )
    return kept, removed_components


def _entry_ball(adj, src: int, m: int) -> dict[int, int]:
    """Distances within the entry graph from src, out to distance m."""
    dist = {src: 0}
    frontier = [src]
    d = 0
    while frontier and d < m:
        d += 1
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in dist:
                    dist[y] = d
                    nxt.append(y)
        frontier = nxt
    return dist


def _label_code(
    entry: RootedGraph, u: int, m: int, r: int, s_max: int, node_budget: int
) -> bytes | None:
    """Canonical code of u's depth-m neighborhood, read inside one entry.

    Any path in the host graph that leaves the entry must pass through a
    depth-r vertex, so the in-entry ball equals the true ball exactly when
    it contains no depth-r vertex; otherwise the true ball is not visible
    (and not contained in the root's (r-1)-neighborhood) and None is
    returned.
    """
    adj = entry.adjacency
    dist = _entry_ball(adj, u, m)
    if any(entry.depth[w] >= r for w in dist):
        return None
    order = sorted(dist)
    local = {w: i for i, w in enumerate(order)}
    edges = [
        (local[a], local[b])
        for a in order
        for b in adj[a]
        if b in dist and a < b
    ]
    ball = RootedGraph.build(
        len(order),
        edges,
        root=local[u],
        depth=[dist[w] for w in order],
    )
    return canon_rooted_graph(ball, s_max=s_max, node_budget=node_budget)


def classify_good(
    p: NeighborhoodProfile,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[frozenset, tuple]:
    """Label codes of every entry root, and the set of unique ones.

    Returns (good_codes, entry_codes); entry i's root is good exactly when
    entry_codes[i] is in good_codes.
    """
    m = p.code_depth
    codes = tuple(
        _label_code(e, e.root, m, p.r, s_max, node_budget) for e in p.entries
    )
    census = Counter(codes)
    good = frozenset(c for c, k in census.items() if k == 1)
    return good, codes


def extract_bad_components(
    p: NeighborhoodProfile,
    goodness: tuple[frozenset, tuple],
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> list[BadComponentRecord]:
    """Bad components with labeled boundaries, deduplicated across entries.

    Each good entry contributes the bad components it can fully see: those
    whose vertices have visible label neighborhoods and whose external
    boundary consists of visible good vertices including the root. A record
    survives deduplication only if no boundary vertex with a smaller label
    code also produced a matching record (good vertices are ordered by
    their codes).
    """
    good_codes, entry_codes = goodness
    m = p.code_depth
    rank = {c: i for i, c in enumerate(sorted(good_codes))}

    good_entries = sorted(
        (i for i, c in enumerate(entry_codes) if c in good_codes),
        key=lambda i: entry_codes[i],
    )
    per_vertex: dict[bytes, list[BadComponentRecord]] = {}
    for i in good_entries:
        entry = p.entries[i]
        x_code = entry_codes[i]
        adj = entry.adjacency
        label = {
            u: _label_code(entry, u, m, p.r, s_max, node_budget)
            for u in range(entry.n)
        }
        visible = {u for u, c in label.items() if c is not None}
        bad_vs = {u for u in visible if label[u] not in good_codes}

        recs: list[BadComponentRecord] = []
        seen: set[int] = set()
        for s in sorted(bad_vs):
            if s in seen:
                continue
            comp = {s}
            frontier = [s]
            while frontier:
                nxt = []
                for a in frontier:
                    for b in adj[a]:
                        if b in bad_vs and b not in comp:
                            comp.add(b)
                            nxt.append(b)
                frontier = nxt
            seen |= comp
            boundary = {
                b for a in comp for b in adj[a] if b not in comp
            }
            if entry.root not in boundary:
                continue
            if not all(b in visible and label[b] in good_codes for b in boundary):
                continue
            interior = sorted(comp)
            iid = {u: k for k, u in enumerate(interior)}
            interior_edges = tuple(
                (iid[a], iid[b])
                for a in interior
                for b in adj[a]
                if b in comp and a < b
            )
            boundary_edges = tuple(
                sorted(
                    (iid[a], label[b])
                    for a in interior
                    for b in adj[a]
                    if b in boundary
                )
            )
            bnd = sorted(boundary)
            n_d = len(interior) + len(bnd)
            bid = {u: len(interior) + k for k, u in enumerate(bnd)}
            d_edges = [e for e in interior_edges]
            for a in interior:
                for b in adj[a]:
                    if b in boundary:
                        d_edges.append((iid[a], bid[b]))
            colors = [0] * len(interior) + [1 + rank[label[b]] for b in bnd]
            d_code = canon_unrooted(
                n_d, d_edges, colors, s_max=s_max, node_budget=node_budget
            )
            recs.append(
                BadComponentRecord(
                    D_code=d_code,
                    boundary_codes=frozenset(label[b] for b in bnd),
                    source=(x_code, len(recs)),
                    interior_size=len(interior),
                    interior_edges=interior_edges,
                    boundary_edges=boundary_edges,
                )
            )
        per_vertex[x_code] = recs

    surviving: list[BadComponentRecord] = []
    for x_code in sorted(per_vertex):
        for rec in per_vertex[x_code]:
            duplicated = any(
                c < x_code
                and any(r2.D_code == rec.D_code for r2 in per_vertex.get(c, ()))
                for c in rec.boundary_codes
            )
            if not duplicated:
                surviving.append(rec)
    return surviving


def assemble(
    p: NeighborhoodProfile,
    goodness: tuple[frozenset, tuple],
    records: list[BadComponentRecord],
    components_U1: list[RootedGraph],
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ReconstructionResult:
    """Wire good vertices, copy bad records, append peeled components.

    Good-good adjacency is read between each entry's root and its depth-1
    vertices, whose label neighborhoods are always fully visible given the
    parameter precondition; the two endpoint entries must agree or
    InconsistentAdjacency is raised.
    """
    good_codes, entry_codes = goodness
    m = p.code_depth
    ordered = sorted(good_codes)
    gid = {c: i for i, c in enumerate(ordered)}

    claims: set[tuple[bytes, bytes]] = set()
    for i, x_code in enumerate(entry_codes):
        if x_code not in good_codes:
            continue
        entry = p.entries[i]
        for u in entry.adjacency[entry.root]:
            c = _label_code(entry, u, m, p.r, s_max, node_budget)
            if c is not None and c in good_codes:
                claims.add((x_code, c))
    for a, b in claims:
        if (b, a) not in claims:
            raise InconsistentAdjacency(
                "entries disagree on an edge between good vertices"
            )
    edges = {(gid[a], gid[b]) for a, b in claims if gid[a] < gid[b]}

    total = len(ordered)
    for rec in records:
        base = total
        total += rec.interior_size
        edges.update((base + a, base + b) for a, b in rec.interior_edges)
        edges.update((gid[c], base + a) for a, c in rec.boundary_edges)
    for comp in components_U1:
        base = total
        total += comp.n
        edges.update((base + a, base + b) for a, b in comp.edges)

    stats = {
        "good": sum(1 for c in entry_codes if c in good_codes),
        "bad": sum(1 for c in entry_codes if c not in good_codes),
        "bad_components": len(records),
        "record_classes": len({rec.D_code for rec in records}),
        "degenerate_components": len(components_U1),
    }
    return ReconstructionResult(
        graph_prime=Graph.build(total, edges),
        degenerate_components=tuple(components_U1),
        stats=stats,
    )


def reconstruct(
    p: NeighborhoodProfile,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ReconstructionResult:
    """Full pipeline: preprocess, classify, extract, assemble."""
    kept, removed = preprocess_degenerate(p, s_max, node_budget)
    goodness = classify_good(kept, s_max, node_budget)
    records = extract_bad_components(kept, goodness, s_max, node_budget)
    return assemble(kept, goodness, records, removed, s_max, node_budget)


def _component_codes(g: Graph, s_max: int, node_budget: int) -> Counter:
    out: Counter = Counter()
    for comp in components(g):
        local = {v: i for i, v in enumerate(comp)}
        inside = set(comp)
        edges = [
            (local[u], local[v]) for u, v in g.edges if u in inside and v in inside
        ]
        out[canon_unrooted(len(comp), edges, s_max=s_max, node_budget=node_budget)] += 1
    return out


def verify_reconstruction(
    g: Graph,
    result: ReconstructionResult,
    s_max: int = VERIFY_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> bool:
    """Exact equality of per-component canonical code multisets."""
    return _component_codes(g, s_max, node_budget) == _component_codes(
        result.graph_prime, s_max, node_budget
    )


def result_to_json(res: ReconstructionResult) -> dict:
    return {
        "n": res.graph_prime.n,
        "edges": [list(e) for e in res.graph_prime.edges],
        "stats": dict(res.stats),
        "success": res.success,
    }


def _entry_to_obj(e: RootedGraph) -> dict:
    return {
        "n": e.n,
        "edges": [list(x) for x in e.edges],
        "root": e.root,
        "depth": list(e.depth) if e.depth is not None else None,
    }


def _entry_from_obj(d: dict) -> RootedGraph:
    return RootedGraph.build(
        int(d["n"]),
        [tuple(e) for e in d["edges"]],
        root=int(d["root"]),
        depth=d["depth"],
    )


def profile_to_bytes(p: NeighborhoodProfile) -> bytes:
    """Compressed container for dumping and reloading profiles."""
    obj = {
        "r": p.r,
        "rho": p.rho,
        "entries": [_entry_to_obj(e) for e in p.entries],
        "audit": list(p.audit) if p.audit is not None else None,
    }
    return gzip.compress(json.dumps(obj, separators=(",", ":")).encode())


def profile_from_bytes(blob: bytes) -> NeighborhoodProfile:
    obj = json.loads(gzip.decompress(blob))
    return NeighborhoodProfile(
        tuple(_entry_from_obj(d) for d in obj["entries"]),
        int(obj["r"]),
        float(obj["rho"]),
        audit=tuple(obj["audit"]) if obj["audit"] is not None else None,
    )
