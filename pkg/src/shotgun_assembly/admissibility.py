"""Per-instance certificates that reconstruction is trustworthy.

Three layers are provided. ``reduced_bfs`` runs the two-source search that
explores a pair of neighborhoods while cutting off every vertex reachable
from both sides in the same step, together with the interaction statistics
(xi, lambda) of the exploration and the grafted trees that restore the cut
branches. ``check_admissibility`` compares the true multiset of labeled bad
components against the records recoverable from the neighborhood profile.
``check_strong_admissibility`` tests the stronger structural condition
(unique short cycle per bad vertex, short hanging trees, few short-cycle
vertices) that implies admissibility on non-degenerate components.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .errors import SearchBudgetExceeded
from .graphs import (
    Graph,
    _bfs,
    bridges,
    bridging_trees_and_blocks,
    components,
    has_two_arms,
    is_degenerate,
    neighborhood,
)
from .pgw import GWParams, sample_tree
from .reconstruct import (
    _check_params,
    build_profile,
    classify_good,
    extract_bad_components,
    preprocess_degenerate,
)
from .rooted import (
    DEFAULT_COMPLEXITY_BOUND,
    DEFAULT_NODE_BUDGET,
    RootedTree,
    canon_rooted_graph,
    canon_unrooted,
)

__all__ = [
    "LabeledTree",
    "AuxTree",
    "ReducedBfsTrace",
    "XiLambdaStats",
    "StrongAdmissibilityReport",
    "reduced_bfs",
    "xi_lambda_stats",
    "build_aux_tree",
    "prune_grafts",
    "check_admissibility",
    "check_strong_admissibility",
    "strongly_admissible",
    "strong_report_to_json",
    "xi_survey",
]

DEFAULT_CYCLE_BUDGET = 50_000


@dataclass(frozen=True)
class LabeledTree:
    """A rooted tree whose nodes carry graph vertex ids (-1 = fresh copy)."""

    tree: RootedTree
    labels: tuple

    def __post_init__(self):
        if len(self.labels) != self.tree.n:
            raise ValueError("one label per tree node")


@dataclass(frozen=True)
class AuxTree(LabeledTree):
    """A cut tree enlarged with sampled branches at every cut-off incidence.

    ``graft_roots`` lists the local ids of the grafted copies; each copy is
    labeled with the removed vertex it stands in for and its descendants
    are labeled -1. Deleting the grafted subtrees recovers the cut tree.
    """

    graft_roots: tuple = ()
    truncated: bool = False


@dataclass(frozen=True)
class ReducedBfsTrace:
    """Levels of the two-source search with cut-off bookkeeping.

    ``levels_u[t]`` / ``levels_v[t]`` are the step-t active sets of the two
    sides and ``removed[t]`` the vertices cut at step t for being reachable
    from both sides at once; the three are pairwise disjoint at every step.
    ``cut_u`` lists the (active parent, removed child) incidences on the u
    side in (step, parent, child) order, ready for grafting.
    """

    u: int
    v: int
    r: int
    levels_u: tuple
    levels_v: tuple
    removed: tuple
    tree_u: LabeledTree
    tree_v: LabeledTree
    cut_u: tuple
    cut_v: tuple

    def __post_init__(self):
        if not len(self.levels_u) == len(self.levels_v) == len(self.removed):
            raise ValueError("level sequences must align")
        for au, av, rt in zip(self.levels_u, self.levels_v, self.removed):
            if (au & av) or (au & rt) or (av & rt):
                raise ValueError("active and removed sets must be disjoint")

    @property
    def steps(self) -> int:
        return len(self.removed) - 1


def _min_parent_tree(levels, adj, prev_sets) -> LabeledTree:
    """Assemble one side's tree: each vertex hangs off its smallest-ordered
    neighbor in the previous active set."""
    labels = []
    parent = []
    local = {}
    for t, level in enumerate(levels):
        for w in sorted(level):
            local[w] = len(labels)
            labels.append(w)
            if t == 0:
                parent.append(-1)
            else:
                p = min(x for x in adj[w] if x in prev_sets[t - 1])
                parent.append(local[p])
    return LabeledTree(RootedTree(parent), tuple(labels))


def reduced_bfs(g: Graph, u: int, v: int, r: int) -> ReducedBfsTrace:
    """Explore from u and v at once, cutting vertices both sides reach.

    At each step the vertices adjacent to both active sets are removed
    (never explored further), and each side keeps the rest of its frontier.
    Runs for r steps or until both frontiers die out.
    """
    if u == v:
        raise ValueError("sources must be distinct")
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise ValueError("sources must be vertices of g")
    if r < 0:
        raise ValueError("depth must be nonnegative")
    adj = g.adjacency
    au, av = {u}, {v}
    explored = {u, v}
    levels_u = [frozenset(au)]
    levels_v = [frozenset(av)]
    removed = [frozenset()]
    cut_u: list[tuple] = []
    cut_v: list[tuple] = []
    t = 0
    while t < r and (au or av):
        nu = {w for x in au for w in adj[x] if w not in explored}
        nv = {w for y in av for w in adj[y] if w not in explored}
        rt = nu & nv
        cut_u.extend((y, w) for y in sorted(au) for w in sorted(rt) if g.has_edge(y, w))
        cut_v.extend((y, w) for y in sorted(av) for w in sorted(rt) if g.has_edge(y, w))
        au, av = nu - rt, nv - rt
        explored |= nu | nv
        levels_u.append(frozenset(au))
        levels_v.append(frozenset(av))
        removed.append(frozenset(rt))
        t += 1
    tree_u = _min_parent_tree(levels_u, adj, levels_u)
    tree_v = _min_parent_tree(levels_v, adj, levels_v)
    return ReducedBfsTrace(
        u,
        v,
        r,
        tuple(levels_u),
        tuple(levels_v),
        tuple(removed),
        tree_u,
        tree_v,
        tuple(cut_u),
        tuple(cut_v),
    )


@dataclass(frozen=True)
class XiLambdaStats:
    """Interaction counts of one reduced exploration.

    xi1 counts same-step edges between the two active sides, xi2 the
    (u-side neighbor) x (v-side neighbor) incidences of unexplored
    vertices, so r_removed (the number of cut vertices) never exceeds xi2.
    lambda1 is the cycle complexity of each side's explored subgraph,
    lambda2 counts edges tying cut vertices back into a side plus edges
    from a side into the region only reachable through cut vertices, and
    lambda3 indicates two cut vertices connected outside the explored sets.
    """

    xi1: int
    xi2: int
    lambda1_u: int
    lambda1_v: int
    lambda2_u: int
    lambda2_v: int
    lambda3: int
    r_removed: int

    @property
    def xi(self) -> int:
        return self.xi1 + self.xi2

    @property
    def lam(self) -> int:
        return (
            self.lambda1_u
            + self.lambda1_v
            + self.lambda2_u
            + self.lambda2_v
            + self.lambda3
        )


def _side_lambda2(adj, levels, rem, a_all, a_other, ball_src, r) -> int:
    level_of = {x: t for t, level in enumerate(levels) for x in level}
    term1 = 0
    for t, rt in enumerate(rem):
        for w in rt:
            term1 += sum(1 for x in adj[w] if level_of.get(x, -1) >= t)
    r_all = set().union(*rem) if rem else set()
    blocked = a_all | a_other | r_all
    ball_u = set(_bfs(adj, ball_src, r)[0])
    term2 = 0
    for w in sorted(r_all):
        ball_w = set(_bfs(adj, w, r)[0])
        reachable = (ball_w & ball_u) - blocked
        term2 += sum(1 for y in reachable for x in adj[y] if x in a_all)
    return term1 + term2


def xi_lambda_stats(g: Graph, trace: ReducedBfsTrace, r: int | None = None) -> XiLambdaStats:
    """All interaction statistics of a trace, by direct summation over g."""
    if r is None:
        r = trace.r
    if r > trace.r:
        raise ValueError("trace was not run deep enough")
    adj = g.adjacency
    lu = trace.levels_u[: r + 1]
    lv = trace.levels_v[: r + 1]
    rem = trace.removed[: r + 1]

    xi1 = sum(
        1 for au, av in zip(lu, lv) for x in au for y in adj[x] if y in av
    )

    xi2 = 0
    explored = set(lu[0]) | set(lv[0])
    for t in range(min(len(lu), r)):
        if t > 0:
            explored |= lu[t] | lv[t] | rem[t]
        au, av = lu[t], lv[t]
        candidates = {w for x in au for w in adj[x] if w not in explored}
        for w in candidates:
            cu = sum(1 for z in adj[w] if z in au)
            cv = sum(1 for z in adj[w] if z in av)
            xi2 += cu * cv

    a_u = set().union(*lu)
    a_v = set().union(*lv)

    def complexity_of(block: set) -> int:
        m2 = sum(1 for x in block for y in adj[x] if y in block)
        return m2 // 2 - len(block) + 1

    lam1_u = complexity_of(a_u)
    lam1_v = complexity_of(a_v)

    lam2_u = _side_lambda2(adj, lu, rem, a_u, a_v, trace.u, r)
    lam2_v = _side_lambda2(adj, lv, rem, a_v, a_u, trace.v, r)

    r_all = set().union(*rem)
    ball_u = set(_bfs(adj, trace.u, r)[0])
    ball_v = set(_bfs(adj, trace.v, r)[0])
    outside = (ball_u | ball_v) - a_u - a_v
    lam3 = 0
    unseen = set(r_all)
    while unseen and not lam3:
        comp = {unseen.pop()}
        stack = list(comp)
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b in outside and b not in comp:
                    comp.add(b)
                    stack.append(b)
        if len(comp & r_all) >= 2:
            lam3 = 1
        unseen -= comp

    return XiLambdaStats(
        xi1=xi1,
        xi2=xi2,
        lambda1_u=lam1_u,
        lambda1_v=lam1_v,
        lambda2_u=lam2_u,
        lambda2_v=lam2_v,
        lambda3=lam3,
        r_removed=sum(len(x) for x in rem),
    )


def _graft_side(base: LabeledTree, cuts, params: GWParams, rng) -> AuxTree:
    parent = list(base.tree.parent)
    labels = list(base.labels)
    local = {lab: i for i, lab in enumerate(base.labels)}
    graft_roots = []
    truncated = False
    for y, w in cuts:
        sample = sample_tree(params, rng)
        truncated = truncated or sample.truncated
        offset = len(parent)
        graft_roots.append(offset)
        for k, p in enumerate(sample.tree.parent):
            parent.append(local[y] if k == 0 else offset + p)
            labels.append(w if k == 0 else -1)
    return AuxTree(
        RootedTree(parent), tuple(labels), tuple(graft_roots), truncated
    )


def build_aux_tree(
    trace: ReducedBfsTrace, params: GWParams, rng
) -> tuple[AuxTree, AuxTree]:
    """Regrow a sampled branch at every cut-off incidence of both sides.

    Each (parent y, removed w) incidence receives an independent sampled
    tree whose root is a copy labeled w attached as a child of y; the u
    side is grafted first, then the v side, so results are reproducible
    given the generator state.
    """
    aux_u = _graft_side(trace.tree_u, trace.cut_u, params, rng)
    aux_v = _graft_side(trace.tree_v, trace.cut_v, params, rng)
    return aux_u, aux_v


def prune_grafts(aux: AuxTree) -> LabeledTree:
    """Delete the grafted subtrees, recovering the original cut tree."""
    n = aux.tree.n
    drop = [False] * n
    for root in aux.graft_roots:
        drop[root] = True
    for k in range(n):
        p = aux.tree.parent[k]
        if p >= 0 and drop[p]:
            drop[k] = True
    keep = [k for k in range(n) if not drop[k]]
    remap = {k: i for i, k in enumerate(keep)}
    parent = [
        -1 if aux.tree.parent[k] < 0 else remap[aux.tree.parent[k]]
        for k in keep
    ]
    return LabeledTree(RootedTree(parent), tuple(aux.labels[k] for k in keep))


def check_admissibility(
    g: Graph,
    r: int,
    rho: float,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> bool:
    """Whether the profile determines every labeled bad component of g.

    The ground-truth side lists the bad components of the graph that
    survives degenerate removal, each coded together with its colored good
    boundary; the profile side runs the actual record-extraction pipeline.
    The graph is admissible exactly when the two multisets agree.
    """
    p = build_profile(g, r, rho)
    kept, _ = preprocess_degenerate(p, s_max=s_max, node_budget=node_budget)
    goodness = classify_good(kept, s_max=s_max, node_budget=node_budget)
    records = extract_bad_components(
        kept, goodness, s_max=s_max, node_budget=node_budget
    )
    profile_counts = Counter(rec.D_code for rec in records)

    m = p.code_depth
    surviving = [
        comp
        for comp in components(g)
        if not any(is_degenerate(g, x, r) for x in comp)
    ]
    code_of = {}
    for comp in surviving:
        for x in comp:
            code_of[x] = canon_rooted_graph(
                neighborhood(g, x, m), s_max=s_max, node_budget=node_budget
            )
    census = Counter(code_of.values())
    good_codes = {c for c, k in census.items() if k == 1}
    rank = {c: i for i, c in enumerate(sorted(good_codes))}

    adj = g.adjacency
    truth_counts: Counter = Counter()
    bad = {x for x, c in code_of.items() if c not in good_codes}
    seen: set[int] = set()
    for s in sorted(bad):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b in bad and b not in comp:
                    comp.add(b)
                    stack.append(b)
        seen |= comp
        boundary = sorted(
            {b for a in comp for b in adj[a] if b not in comp}
        )
        interior = sorted(comp)
        iid = {x: k for k, x in enumerate(interior)}
        bid = {x: len(interior) + k for k, x in enumerate(boundary)}
        d_edges = [
            (iid[a], iid[b])
            for a in interior
            for b in adj[a]
            if b in comp and a < b
        ]
        for a in interior:
            for b in adj[a]:
                if b not in comp:
                    d_edges.append((iid[a], bid[b]))
        colors = [0] * len(interior) + [
            1 + rank[code_of[b]] for b in boundary
        ]
        d_code = canon_unrooted(
            len(interior) + len(boundary),
            d_edges,
            colors,
            s_max=s_max,
            node_budget=node_budget,
        )
        truth_counts[d_code] += 1
    return truth_counts == profile_counts


@dataclass(frozen=True)
class StrongAdmissibilityReport:
    """Structural check outcome with one witness row per violation.

    Witnesses are (vertex, clause, detail) triples; ``indeterminate``
    marks a search-budget breach, which counts as failure.
    """

    condition1_ok: bool
    condition2_ok: bool
    witnesses: tuple
    indeterminate: bool
    r: int
    rho: float
    L: int

    @property
    def passed(self) -> bool:
        return self.condition1_ok and self.condition2_ok


class _CycleBudget(Exception):
    pass


class _TwoCycles(Exception):
    pass


def _cycles_through(adj, ball: set, v: int, budget: int):
    """Distinct simple cycles through v inside the ball, as edge sets.

    Stops after two distinct cycles (uniqueness is already settled) and
    returns None when the path search exceeds its budget.
    """
    found: set[frozenset] = set()
    path = [v]
    onpath = {v}
    steps = [0]

    def dfs(cur):
        steps[0] += 1
        if steps[0] > budget:
            raise _CycleBudget
        for w in adj[cur]:
            if w not in ball:
                continue
            if w == v:
                if len(path) >= 3:
                    cyc = frozenset(
                        _edge_key(path[i], path[i + 1])
                        for i in range(len(path) - 1)
                    ) | {_edge_key(path[-1], v)}
                    found.add(cyc)
                    if len(found) >= 2:
                        raise _TwoCycles
            elif w not in onpath:
                path.append(w)
                onpath.add(w)
                dfs(w)
                path.pop()
                onpath.discard(w)

    try:
        dfs(v)
    except _CycleBudget:
        return None
    except _TwoCycles:
        pass
    return sorted(found, key=sorted)


def _short_cycle_vertices(g: Graph, L: int) -> set:
    """Vertices lying on a simple cycle of length strictly below L."""
    out: set[int] = set()
    if L <= 3:
        return out
    _, blocks, _ = bridging_trees_and_blocks(g)
    for piece in blocks:
        adj = piece.rooted.adjacency
        for a in range(piece.rooted.n):
            if piece.vertices[a] in out:
                continue
            for b in adj[a]:
                # shortest a-b path avoiding the edge itself closes the
                # shortest cycle through (a, b); only depth <= L - 2 matters
                dist = {a: 0}
                frontier = [a]
                d = 0
                hit = False
                while frontier and d < L - 2 and not hit:
                    d += 1
                    nxt = []
                    for x in frontier:
                        for y in adj[x]:
                            if y in dist or (x == a and y == b):
                                continue
                            dist[y] = d
                            if y == b:
                                hit = True
                            nxt.append(y)
                    frontier = nxt
                if hit:
                    out.add(piece.vertices[a])
                    break
    return out


def check_strong_admissibility(
    g: Graph,
    r: int,
    rho: float,
    L: int,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
    cycle_budget: int = DEFAULT_CYCLE_BUDGET,
) -> StrongAdmissibilityReport:
    """Evaluate the structural conditions on every component of g as given.

    Goodness is judged by the census over all of g, mirroring the census
    the recovery pipeline runs on; a vertex whose code recurs anywhere in
    g is bad even when it is unique within its own component. Every bad
    vertex that has two depth-``ceil(rho*r)`` arms or lies on a cycle
    inside its ball must lie on exactly one short simple cycle whose
    removal strands it in a short hanging tree touching the rest of the
    graph only at the vertex itself; additionally each component may carry
    at most log(r) vertices on cycles shorter than L. Degeneracy is not
    inspected here; callers that want the whole-graph verdict should use
    ``strongly_admissible``.
    """
    m = _check_params(r, rho)
    if L < 1:
        raise ValueError("L must be >= 1")
    adj = g.adjacency
    bridge_set = set(bridges(g))
    witnesses: list[tuple] = []
    cond1 = True
    cond2 = True
    indeterminate = False
    short_all = _short_cycle_vertices(g, L)
    cap = int(math.floor(math.log(r))) if r > 1 else 0

    codes = {
        x: canon_rooted_graph(
            neighborhood(g, x, m), s_max=s_max, node_budget=node_budget
        )
        for x in range(g.n)
    }
    census = Counter(codes.values())

    for comp in components(g):
        bad_vs = sorted(x for x in comp if census[codes[x]] > 1)

        for x in bad_vs:
            ball = set(_bfs(adj, x, m)[0])
            try:
                two_arms = has_two_arms(g, x, m, node_budget=node_budget)
            except SearchBudgetExceeded:
                cond1 = False
                indeterminate = True
                witnesses.append((x, "arm-search-budget", ""))
                continue
            cycles = _cycles_through(adj, ball, x, cycle_budget)
            if cycles is None:
                cond1 = False
                indeterminate = True
                witnesses.append((x, "cycle-search-budget", ""))
                continue
            if not two_arms and not cycles:
                continue
            if len(cycles) != 1:
                cond1 = False
                clause = "no-cycle" if not cycles else "multiple-cycles"
                witnesses.append((x, clause, f"{len(cycles)} cycles"))
                continue
            ring = cycles[0]
            if len(ring) > L:
                cond1 = False
                witnesses.append((x, "cycle-too-long", f"length {len(ring)}"))
                continue
            hang = {x: 0}
            frontier = [x]
            height = 0
            while frontier:
                nxt = []
                for a in frontier:
                    for b in adj[a]:
                        if _edge_key(a, b) in ring or b in hang:
                            continue
                        hang[b] = hang[a] + 1
                        height = max(height, hang[b])
                        nxt.append(b)
                frontier = nxt
            internal = [
                (a, b)
                for a in hang
                for b in adj[a]
                if b in hang and a < b and ((a, b) not in ring)
            ]
            if any(e not in bridge_set for e in internal):
                cond1 = False
                witnesses.append((x, "hanging-part-not-bridging", ""))
                continue
            if height > L:
                cond1 = False
                witnesses.append((x, "hanging-tree-too-tall", f"height {height}"))
                continue
            boundary = {a for a in hang if any(b not in hang for b in adj[a])}
            if boundary != {x}:
                cond1 = False
                witnesses.append(
                    (x, "hanging-boundary-not-singleton", f"{sorted(boundary)}")
                )

        short_here = sorted(set(comp) & short_all)
        if len(short_here) > cap:
            cond2 = False
            witnesses.extend(
                (x, "short-cycle-count", f"{len(short_here)} > {cap}")
                for x in short_here
            )

    return StrongAdmissibilityReport(
        condition1_ok=cond1,
        condition2_ok=cond2,
        witnesses=tuple(witnesses),
        indeterminate=indeterminate,
        r=r,
        rho=rho,
        L=L,
    )


def _edge_key(a, b):
    return (a, b) if a < b else (b, a)


def strongly_admissible(
    g: Graph,
    r: int,
    rho: float,
    L: int,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
    cycle_budget: int = DEFAULT_CYCLE_BUDGET,
) -> tuple[bool, StrongAdmissibilityReport]:
    """Whole-graph verdict: every non-degenerate component must pass.

    Components that fit inside one of their own (r-1)-balls are exactly
    the ones degenerate preprocessing reconstructs verbatim, so they pass
    vacuously; a graph with no other components passes outright.
    """
    keep = [
        x
        for comp in components(g)
        if not any(is_degenerate(g, y, r) for y in comp)
        for x in comp
    ]
    keep.sort()
    if not keep:
        report = StrongAdmissibilityReport(
            condition1_ok=True,
            condition2_ok=True,
            witnesses=(),
            indeterminate=False,
            r=r,
            rho=rho,
            L=L,
        )
        return True, report
    local = {x: i for i, x in enumerate(keep)}
    member = set(keep)
    edges = [
        (local[a], local[b]) for a, b in g.edges if a in member and b in member
    ]
    sub = Graph.build(len(keep), edges)
    report = check_strong_admissibility(
        sub,
        r,
        rho,
        L,
        s_max=s_max,
        node_budget=node_budget,
        cycle_budget=cycle_budget,
    )
    witnesses = tuple(
        (keep[x], clause, detail) for x, clause, detail in report.witnesses
    )
    report = StrongAdmissibilityReport(
        condition1_ok=report.condition1_ok,
        condition2_ok=report.condition2_ok,
        witnesses=witnesses,
        indeterminate=report.indeterminate,
        r=r,
        rho=rho,
        L=L,
    )
    return report.passed, report


def strong_report_to_json(report: StrongAdmissibilityReport) -> dict:
    return {
        "condition1_ok": report.condition1_ok,
        "condition2_ok": report.condition2_ok,
        "passed": report.passed,
        "indeterminate": report.indeterminate,
        "r": report.r,
        "rho": report.rho,
        "L": report.L,
        "witnesses": [
            {"vertex": x, "clause": clause, "detail": detail}
            for x, clause, detail in report.witnesses
        ],
    }


def xi_survey(
    g: Graph,
    r: int,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_pairs: int = 2000,
) -> dict:
    """Interaction statistics over pairs with matching (r+1)-neighborhoods.

    Only vertices in non-degenerate components participate (the others are
    handled exactly by preprocessing). Reports how often the total xi count
    exceeds 2 and how often any lambda count is nonzero; these frequencies
    are diagnostics, not pass/fail conditions.
    """
    keep = [
        x
        for comp in components(g)
        if not any(is_degenerate(g, y, r) for y in comp)
        for x in comp
    ]
    codes: dict[bytes, list] = {}
    for x in sorted(keep):
        c = canon_rooted_graph(
            neighborhood(g, x, r + 1), s_max=s_max, node_budget=node_budget
        )
        codes.setdefault(c, []).append(x)
    pairs = [
        (a, b)
        for group in codes.values()
        if len(group) >= 2
        for i, a in enumerate(group)
        for b in group[i + 1 :]
    ]
    pairs.sort()
    checked = pairs[:max_pairs]
    xi_gt2 = 0
    lam_nonzero = 0
    max_xi = 0
    for a, b in checked:
        trace = reduced_bfs(g, a, b, r)
        stats = xi_lambda_stats(g, trace)
        max_xi = max(max_xi, stats.xi)
        if stats.xi > 2:
            xi_gt2 += 1
        if stats.lam > 0:
            lam_nonzero += 1
    n_checked = len(checked)
    return {
        "r": r,
        "surviving_vertices": len(keep),
        "pairs_total": len(pairs),
        "pairs_checked": n_checked,
        "xi_gt2": xi_gt2,
        "xi_gt2_fraction": xi_gt2 / n_checked if n_checked else 0.0,
        "lambda_nonzero": lam_nonzero,
        "lambda_nonzero_fraction": lam_nonzero / n_checked if n_checked else 0.0,
        "max_xi": max_xi,
    }
