"""Tests for reconstruction from neighborhood profiles."""

import numpy as np
import pytest

from shotgun_assembly.errors import InconsistentAdjacency, MatchFailure
from shotgun_assembly.graphs import Graph, generate_er
from shotgun_assembly.reconstruct import (
    NeighborhoodProfile,
    ReconstructionResult,
    assemble,
    build_profile,
    classify_good,
    extract_bad_components,
    label_depth,
    preprocess_degenerate,
    profile_from_bytes,
    profile_to_bytes,
    reconstruct,
    result_to_json,
    verify_reconstruction,
)
from shotgun_assembly.rooted import RootedGraph, canon_rooted_graph


def caterpillar_edges(base: int = 0) -> tuple[list, int]:
    """Spine 0..7 with star decorations of sizes 1, 2, 3, 5.

    The unequal stars break the mirror symmetry of the bare path, so spine
    neighborhoods are mostly distinguishable while the star leaves remain
    indistinguishable twins.
    """
    edges = [(base + i, base + i + 1) for i in range(7)]
    nxt = base + 8
    for pos, k in [(1, 1), (3, 2), (5, 3), (6, 5)]:
        for _ in range(k):
            edges.append((base + pos, nxt))
            nxt += 1
    return edges, nxt - base


def caterpillar() -> Graph:
    edges, n = caterpillar_edges()
    return Graph.build(n, edges)


def composite() -> Graph:
    """Caterpillar plus two disjoint triangles (the degenerate part)."""
    edges, n = caterpillar_edges()
    tri = [
        (n, n + 1), (n + 1, n + 2), (n, n + 2),
        (n + 3, n + 4), (n + 4, n + 5), (n + 3, n + 5),
    ]
    return Graph.build(n + 6, edges + tri)


class TestLabelDepth:
    def test_float_fuzz_guard(self):
        # 0.6 * 5 rounds up past 3.0 in binary; the guard keeps it at 3
        assert label_depth(0.6, 5) == 3

    def test_plain_ceiling(self):
        assert label_depth(0.5, 5) == 3
        assert label_depth(0.3, 10) == 3
        assert label_depth(0.34, 10) == 4

    def test_parameter_window(self):
        g = caterpillar()
        with pytest.raises(ValueError):
            build_profile(g, 4, 0.0)
        with pytest.raises(ValueError):
            build_profile(g, 4, 1.0)
        # ceil(rho*r) must leave two spare levels below r
        with pytest.raises(ValueError):
            build_profile(g, 2, 0.5)
        with pytest.raises(ValueError):
            build_profile(g, 4, 0.9)


class TestProfile:
    def test_build_profile_shape(self):
        g = caterpillar()
        p = build_profile(g, 4, 0.5)
        assert len(p.entries) == g.n
        assert p.code_depth == 2
        assert p.audit == tuple(range(g.n))
        assert all(e.root == 0 for e in p.entries)
        assert all(e.depth is not None and max(e.depth) <= 4 for e in p.entries)

    def test_audit_length_checked(self):
        g = caterpillar()
        p = build_profile(g, 4, 0.5)
        with pytest.raises(ValueError):
            NeighborhoodProfile(p.entries, p.r, p.rho, audit=(0, 1))

    def test_bytes_round_trip(self):
        p = build_profile(caterpillar(), 4, 0.5)
        back = profile_from_bytes(profile_to_bytes(p))
        assert back.r == p.r and back.rho == p.rho and back.audit == p.audit
        assert len(back.entries) == len(p.entries)
        for a, b in zip(p.entries, back.entries):
            assert a.n == b.n and a.edges == b.edges and a.root == b.root
            assert canon_rooted_graph(a) == canon_rooted_graph(b)

    def test_bytes_round_trip_no_audit(self):
        p0 = build_profile(caterpillar(), 4, 0.5)
        p = NeighborhoodProfile(p0.entries, p0.r, p0.rho, audit=None)
        back = profile_from_bytes(profile_to_bytes(p))
        assert back.audit is None


class TestPreprocessDegenerate:
    def test_peels_small_components(self):
        g = composite()
        kept, removed = preprocess_degenerate(build_profile(g, 4, 0.5))
        assert [c.n for c in removed] == [3, 3]
        # exactly the caterpillar entries survive, in order
        assert kept.audit == tuple(range(19))
        assert len(kept.entries) == 19

    def test_nothing_to_peel(self):
        g = caterpillar()
        kept, removed = preprocess_degenerate(build_profile(g, 4, 0.5))
        assert removed == []
        assert len(kept.entries) == g.n

    def test_missing_entry_detected(self):
        g = composite()
        p = build_profile(g, 4, 0.5)
        # drop one triangle vertex's entry: the peel multiset cannot match
        ents = p.entries[:19] + p.entries[20:]
        aud = p.audit[:19] + p.audit[20:]
        broken = NeighborhoodProfile(ents, p.r, p.rho, audit=aud)
        with pytest.raises(MatchFailure):
            preprocess_degenerate(broken)


class TestClassifyAndExtract:
    def star_profile(self):
        g = Graph.build(4, [(0, 1), (0, 2), (0, 3)])
        return g, build_profile(g, 3, 0.33)

    def test_star_classification(self):
        g, p = self.star_profile()
        good, codes = classify_good(p)
        assert codes[0] in good
        assert all(c not in good for c in codes[1:])
        assert codes[1] == codes[2] == codes[3]

    def test_star_records(self):
        g, p = self.star_profile()
        goodness = classify_good(p)
        recs = extract_bad_components(p, goodness)
        assert len(recs) == 3
        assert len({r.D_code for r in recs}) == 1
        assert all(r.interior_size == 1 for r in recs)
        assert all(r.interior_edges == () for r in recs)
        assert all(len(r.boundary_edges) == 1 for r in recs)
        # sources carry the producing entry's code and a running index
        assert sorted(r.source[1] for r in recs) == [0, 1, 2]

    def test_star_assembled(self):
        g, p = self.star_profile()
        goodness = classify_good(p)
        recs = extract_bad_components(p, goodness)
        res = assemble(p, goodness, recs, [])
        assert res.graph_prime.n == 4
        assert verify_reconstruction(g, res)

    def test_inconsistent_adjacency_detected(self):
        # entry one claims its root sits next to a path center; the path
        # center's own entry claims only path neighbors
        e0 = RootedGraph.build(4, [(0, 1), (1, 2), (2, 3)], root=0, depth=[0, 1, 2, 3])
        e1 = RootedGraph.build(
            5, [(0, 1), (1, 2), (2, 3), (3, 4)], root=2, depth=[2, 1, 0, 1, 2]
        )
        p = NeighborhoodProfile((e0, e1), 3, 0.33)
        goodness = classify_good(p)
        good, codes = goodness
        assert codes[0] in good and codes[1] in good
        with pytest.raises(InconsistentAdjacency):
            assemble(p, goodness, [], [])


class TestReconstructPipeline:
    def test_caterpillar_round_trip(self):
        g = caterpillar()
        res = reconstruct(build_profile(g, 4, 0.5))
        assert verify_reconstruction(g, res)
        assert res.stats["good"] == 6
        assert res.stats["bad"] == 13
        assert res.stats["bad_components"] == 13
        assert res.stats["degenerate_components"] == 0
        assert res.success is None

    def test_composite_round_trip(self):
        g = composite()
        res = reconstruct(build_profile(g, 4, 0.5))
        assert verify_reconstruction(g, res)
        assert res.stats["degenerate_components"] == 2
        assert len(res.degenerate_components) == 2

    def test_entry_order_irrelevant(self):
        # entries carry no identities, so any ordering reconstructs the
        # same components
        g = composite()
        p = build_profile(g, 4, 0.5)
        perm = np.random.default_rng(5).permutation(g.n)
        shuf = NeighborhoodProfile(
            tuple(p.entries[i] for i in perm),
            p.r,
            p.rho,
            audit=tuple(int(p.audit[i]) for i in perm),
        )
        base = reconstruct(p)
        res = reconstruct(shuf)
        assert res.stats == base.stats
        assert verify_reconstruction(g, res)

    def test_bare_path_fails_honestly(self):
        # a bare path is mirror symmetric: every label ball has a twin, no
        # vertex is good, and nothing can be reconstructed
        g = Graph.build(12, [(i, i + 1) for i in range(11)])
        res = reconstruct(build_profile(g, 4, 0.5))
        assert res.stats["good"] == 0
        assert res.graph_prime.n == 0
        assert not verify_reconstruction(g, res)

    def test_sparse_random_graph_round_trip(self):
        # known-recoverable sample: unique label balls outside small twin
        # clusters, all bad components visible from their boundaries
        g = generate_er(200, 1.2, 1)
        res = reconstruct(build_profile(g, 5, 0.6))
        assert verify_reconstruction(g, res)
        assert res.stats["bad_components"] == 9

    def test_result_json(self):
        g = caterpillar()
        res = reconstruct(build_profile(g, 4, 0.5))
        d = result_to_json(res)
        assert d["n"] == res.graph_prime.n
        assert d["success"] is None
        assert all(len(e) == 2 for e in d["edges"])
        assert d["stats"]["bad"] == 13


class TestVerifyReconstruction:
    def wrap(self, g: Graph) -> ReconstructionResult:
        return ReconstructionResult(graph_prime=g, degenerate_components=(), stats={})

    def test_relabeled_copy_passes(self):
        g = Graph.build(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 6)])
        relabeled = Graph.build(7, [(4, 5), (5, 6), (6, 4), (0, 1), (1, 2), (2, 3)])
        assert verify_reconstruction(g, self.wrap(relabeled))

    def test_wrong_component_fails(self):
        g = Graph.build(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 6)])
        wrong = Graph.build(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (4, 6)])
        assert not verify_reconstruction(g, self.wrap(wrong))

    def test_extra_component_fails(self):
        g = Graph.build(3, [(0, 1), (1, 2)])
        bigger = Graph.build(4, [(0, 1), (1, 2)])
        assert not verify_reconstruction(g, self.wrap(bigger))
