"""Profile-preserving surgery on sparse graphs.

A pendant line hanging off a vertex ``v`` of one tree component can
sometimes be cut and re-attached to a root ``u`` of another tree component
without changing the multiset of radius-``r`` neighborhoods, while provably
changing the multiset at a larger radius. The deep-agreement predicate
:func:`~shotgun_assembly.rooted.spine_event` certifies when the move is
safe; this module searches a graph for such a certificate, performs the
surgery, and verifies both profile claims exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import CertificateMismatch
from .graphs import Graph, components, graph_profile
from .rooted import DEFAULT_COMPLEXITY_BOUND, RootedTree, spine_event


@dataclass(frozen=True)
class BlockingCertificate:
    """A verified cut-and-attach move.

    ``line`` lists the L + 1 vertices of the pendant path from ``w`` (the
    vertex adjacent to ``v``) out to the leaf ``w_prime``; the surgery moves
    the attachment edge from (w, v) to (w, u).
    """

    v: int
    u: int
    w: int
    w_prime: int
    line: tuple[int, ...]
    r: int
    L: int

    def __post_init__(self):
        if len(self.line) != self.L + 1:
            raise ValueError("line must have L + 1 vertices")
        if self.line[0] != self.w or self.line[-1] != self.w_prime:
            raise ValueError("line must run from w to w_prime")


@dataclass(frozen=True)
class CertificateReport:
    r_profile_equal: bool
    deep_profile_differs: bool
    differing_codes: tuple[bytes, ...]


def _pendant_lines(g: Graph, comp: tuple[int, ...], L: int) -> list[tuple[int, tuple[int, ...]]]:
    """Candidate (v, line) pairs in one tree component.

    A candidate line is a path of L edges ending at a leaf, whose inner
    vertices all have degree 2, attached to the rest of the component at a
    single vertex v. Walking up from each leaf enumerates every candidate
    exactly once.
    """
    adj = g.adjacency
    out = []
    for leaf in comp:
        if len(adj[leaf]) != 1:
            continue
        path = [leaf]
        cur, prev = leaf, -1
        ok = True
        for _ in range(L):
            nbrs = adj[cur]
            if len(nbrs) != (1 if prev == -1 else 2):
                ok = False
                break
            nxt = nbrs[0] if nbrs[0] != prev else nbrs[1]
            path.append(nxt)
            prev, cur = cur, nxt
        # cur is now the candidate w; it needs exactly one neighbor besides
        # the line, and that neighbor is v
        if not ok or len(adj[cur]) != 2:
            continue
        v = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        out.append((v, tuple(reversed(path))))
    return out


def _component_tree(g: Graph, root: int, banned: frozenset = frozenset()) -> RootedTree:
    """BFS tree of root's component, skipping banned vertices.

    Exact for tree components, where the BFS tree is the component itself.
    """
    adj = g.adjacency
    order = [root]
    pos = {root: 0}
    parent = [-1]
    head = 0
    while head < len(order):
        x = order[head]
        head += 1
        for y in adj[x]:
            if y in pos or y in banned:
                continue
            pos[y] = len(order)
            parent.append(pos[x])
            order.append(y)
    return RootedTree(parent)


def _tree_eccentricities(g: Graph, comp: tuple[int, ...]) -> dict[int, int]:
    """Per-vertex eccentricity within one tree component.

    In a tree, every vertex's eccentricity is realized at one of the two
    endpoints of a diameter, found by the usual double sweep.
    """
    adj = g.adjacency

    def dists(s: int) -> dict[int, int]:
        d = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in d:
                        d[y] = d[x] + 1
                        nxt.append(y)
            frontier = nxt
        return d

    d0 = dists(comp[0])
    a = max(d0, key=lambda x: (d0[x], x))
    da = dists(a)
    b = max(da, key=lambda x: (da[x], x))
    db = dists(b)
    return {x: max(da[x], db[x]) for x in comp}


def find_blocking(g: Graph, r: int, L: int) -> BlockingCertificate | None:
    """Search for a certified cut-and-attach move, or return None.

    Only tree components are scanned. Candidates are tried in vertex order
    (v, then w, then u), so the result is deterministic for a given graph.
    """
    if not r > L >= 1:
        raise ValueError("need r > L >= 1")
    comps = components(g)
    comp_id = [-1] * g.n
    for i, comp in enumerate(comps):
        for x in comp:
            comp_id[x] = i
    deg = [len(a) for a in g.adjacency]
    is_tree = [sum(deg[x] for x in comp) == 2 * (len(comp) - 1) for comp in comps]

    candidates: list[tuple[int, tuple[int, ...]]] = []
    root_pool: list[int] = []
    ecc_cache: dict[int, dict[int, int]] = {}
    for i, comp in enumerate(comps):
        if not is_tree[i]:
            continue
        candidates.extend(_pendant_lines(g, comp, L))
        ecc_cache[i] = _tree_eccentricities(g, comp)
    candidates.sort(key=lambda c: (c[0], c[1][0]))
    for i, comp in enumerate(comps):
        if not is_tree[i]:
            continue
        ecc = ecc_cache[i]
        root_pool.extend(x for x in comp if 2 * r <= ecc[x] <= 2 * r + L)
    root_pool.sort()

    for v, line in candidates:
        banned = frozenset(line)
        t_v = _component_tree(g, v, banned)
        if not 2 * r <= t_v.height() <= 2 * r + L:
            continue
        cv = comp_id[v]
        for u in root_pool:
            if comp_id[u] == cv:
                continue
            t_u = _component_tree(g, u)
            if spine_event(t_v, t_u, 2 * r, L):
                return BlockingCertificate(
                    v=v, u=u, w=line[0], w_prime=line[-1], line=line, r=r, L=L
                )
    return None


def cut_attach(g: Graph, cert: BlockingCertificate) -> Graph:
    """Move the line's attachment edge from (w, v) to (w, u)."""
    if cert.u == cert.v:
        raise CertificateMismatch("certificate has u == v")
    if not g.has_edge(cert.w, cert.v):
        raise CertificateMismatch(f"edge ({cert.w}, {cert.v}) not in graph")
    if g.has_edge(cert.w, cert.u):
        raise CertificateMismatch(f"edge ({cert.w}, {cert.u}) already present")
    cut = (min(cert.w, cert.v), max(cert.w, cert.v))
    edges = [e for e in g.edges if e != cut]
    edges.append((min(cert.w, cert.u), max(cert.w, cert.u)))
    return Graph.build(g.n, edges, p_clamped=g.p_clamped)


def verify_certificate(
    g: Graph,
    cert: BlockingCertificate,
    r: int | None = None,
    L: int | None = None,
    s_max: int = DEFAULT_COMPLEXITY_BOUND,
) -> CertificateReport:
    """Check both profile claims of a certificate exactly.

    The radius-r neighborhood profile must be unchanged by the surgery and
    the radius-2(r+L) profile must differ. Codes whose deep multiplicities
    disagree are reported.
    """
    r = cert.r if r is None else r
    L = cert.L if L is None else L
    g2 = cut_attach(g, cert)
    return _verify(g, g2, r, L, s_max)


def _verify(g: Graph, g2: Graph, r: int, L: int, s_max: int) -> CertificateReport:
    prof_r = graph_profile(g, r, s_max=s_max)
    prof_r2 = graph_profile(g2, r, s_max=s_max)
    deep = graph_profile(g, 2 * (r + L), s_max=s_max)
    deep2 = graph_profile(g2, 2 * (r + L), s_max=s_max)
    differing = tuple(
        sorted(c for c in set(deep) | set(deep2) if deep[c] != deep2[c])
    )
    return CertificateReport(
        r_profile_equal=prof_r == prof_r2,
        deep_profile_differs=bool(differing),
        differing_codes=differing,
    )


def certificate_to_json(cert: BlockingCertificate) -> dict:
    return {
        "v": cert.v,
        "u": cert.u,
        "w": cert.w,
        "w_prime": cert.w_prime,
        "line": list(cert.line),
        "r": cert.r,
        "L": cert.L,
    }


def certificate_from_json(d: dict) -> BlockingCertificate:
    return BlockingCertificate(
        v=int(d["v"]),
        u=int(d["u"]),
        w=int(d["w"]),
        w_prime=int(d["w_prime"]),
        line=tuple(int(x) for x in d["line"]),
        r=int(d["r"]),
        L=int(d["L"]),
    )


def report_to_json(rep: CertificateReport) -> dict:
    return {
        "r_profile_equal": rep.r_profile_equal,
        "deep_profile_differs": rep.deep_profile_differs,
        "differing_codes": [c.hex() for c in rep.differing_codes],
    }
