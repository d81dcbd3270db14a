"""Graph container, sparse sampling, neighborhoods, and structure probes."""

import math

import numpy as np
import pytest

from shotgun_assembly.errors import SearchBudgetExceeded
from shotgun_assembly.graphs import (
    Graph,
    bridges,
    bridging_trees_and_blocks,
    complexity,
    component,
    components,
    generate_er,
    graph_from_json,
    graph_profile,
    graph_to_json,
    has_two_arms,
    is_degenerate,
    neighborhood,
    read_edge_list,
    write_edge_list,
)


class TestGraph:
    def test_build_normalizes(self):
        g = Graph.build(4, [(2, 1), (1, 2), (3, 0)])
        assert g.edges == ((0, 3), (1, 2))
        assert g.edge_count == 2
        assert g.has_edge(2, 1) and not g.has_edge(0, 1)

    def test_rejects_self_loop_and_range(self):
        with pytest.raises(ValueError):
            Graph(3, ((1, 1),))
        with pytest.raises(ValueError):
            Graph.build(2, [(0, 5)])

    def test_adjacency_sorted(self):
        g = Graph.build(4, [(0, 3), (0, 1), (0, 2)])
        assert g.adjacency[0] == (1, 2, 3)
        assert g.adjacency[3] == (0,)


class TestGenerateEr:
    def test_deterministic(self):
        a = generate_er(300, 1.2, 9)
        b = generate_er(300, 1.2, 9)
        assert a.edges == b.edges
        c = generate_er(300, 1.2, 10)
        assert a.edges != c.edges

    def test_edge_count_near_mean(self):
        # m ~ Binomial(C(n,2), lam/n); mean lam*(n-1)/2
        n, lam = 4000, 1.5
        g = generate_er(n, lam, 123)
        mean = lam * (n - 1) / 2
        sd = math.sqrt(mean * (1 - lam / n))
        assert abs(g.edge_count - mean) < 5 * sd

    def test_large_n_sparse_path(self):
        # crosses the geometric-gap sampler threshold
        n = 20_000
        g = generate_er(n, 1.0, 77)
        mean = (n - 1) / 2
        sd = math.sqrt(mean)
        assert abs(g.edge_count - mean) < 5 * sd
        assert all(0 <= u < v < n for u, v in g.edges)

    def test_lambda_clamp(self):
        g = generate_er(4, 10.0, 0)
        assert g.p_clamped
        assert g.edge_count == 6

    def test_lambda_zero(self):
        assert generate_er(50, 0.0, 0).edge_count == 0

    def test_validation(self):
        with pytest.raises(ValueError):
            generate_er(0, 1.0, 0)
        with pytest.raises(ValueError):
            generate_er(10, -1.0, 0)

    def test_pair_frequencies_uniform(self):
        # every vertex pair should be hit at the same rate across seeds
        n, lam, runs = 30, 3.0, 400
        counts = np.zeros((n, n))
        for seed in range(runs):
            for u, v in generate_er(n, lam, seed).edges:
                counts[u, v] += 1
        p = lam / n
        got = counts[np.triu_indices(n, 1)]
        se = math.sqrt(p * (1 - p) * runs)
        assert np.all(np.abs(got - p * runs) < 5 * se)


class TestNeighborhood:
    def fixture(self):
        # two triangles joined by a path, plus an isolated edge
        return Graph.build(
            9,
            [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 6), (7, 8)],
        )

    def test_root_and_depth(self):
        g = self.fixture()
        ball = neighborhood(g, 0, 1)
        assert ball.root == 0
        assert ball.n == 3
        assert sorted(ball.depth) == [0, 1, 1]
        # triangle edge between the two depth-1 vertices is included
        assert ball.edge_count == 3

    def test_radius_growth(self):
        g = self.fixture()
        sizes = [neighborhood(g, 0, r).n for r in range(6)]
        assert sizes == [1, 3, 4, 5, 7, 7]

    def test_isolated_component(self):
        g = self.fixture()
        ball = neighborhood(g, 7, 3)
        assert ball.n == 2

    def test_deep_edge_included(self):
        # both endpoints at depth r: the edge still belongs to the ball
        g = Graph.build(3, [(0, 1), (0, 2), (1, 2)])
        ball = neighborhood(g, 0, 1)
        assert ball.edge_count == 3


class TestComponents:
    def test_partition(self):
        g = Graph.build(6, [(0, 1), (2, 3), (3, 4)])
        comps = components(g)
        assert sorted(map(sorted, comps)) == [[0, 1], [2, 3, 4], [5]]

    def test_component_rooted(self):
        g = Graph.build(4, [(0, 1), (2, 3)])
        c = component(g, 2)
        assert c.n == 2 and c.root == 0


class TestStructureProbes:
    def test_bridges_match_reference(self):
        import networkx as nx

        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(4, 30))
            m = int(rng.integers(n - 1, 2 * n))
            edges = set()
            while len(edges) < m:
                u, v = rng.integers(0, n, 2)
                if u != v:
                    edges.add((min(u, v), max(u, v)))
            g = Graph.build(n, edges)
            h = nx.Graph()
            h.add_nodes_from(range(n))
            h.add_edges_from(edges)
            want = {(min(u, v), max(u, v)) for u, v in nx.bridges(h)}
            assert set(bridges(g)) == want

    def test_complexity(self):
        assert complexity(Graph.build(4, [(0, 1), (1, 2), (2, 3)])) == 0
        assert complexity(Graph.build(3, [(0, 1), (1, 2), (0, 2)])) == 1
        with pytest.raises(ValueError):
            complexity(Graph.build(4, [(0, 1), (2, 3)]))

    def test_bridging_trees_and_blocks(self):
        # triangle with a pendant path of two edges
        g = Graph.build(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)])
        trees, blocks, _ = bridging_trees_and_blocks(g)
        assert len(blocks) == 1
        assert {len(p.vertices) for p in blocks} == {3}
        assert any(3 in p.vertices and 4 in p.vertices for p in trees)

    def test_two_arms(self):
        path = Graph.build(7, [(i, i + 1) for i in range(6)])
        assert has_two_arms(path, 3, 3)
        assert not has_two_arms(path, 3, 4)
        assert not has_two_arms(path, 0, 2)
        star = Graph.build(4, [(0, 1), (0, 2), (0, 3)])
        assert has_two_arms(star, 0, 1)
        assert not has_two_arms(star, 0, 2)

    def test_two_arms_disjointness(self):
        # arms must be vertex-disjoint away from v: two paths through the
        # same first step do not count
        g = Graph.build(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
        assert not has_two_arms(g, 0, 2)
        assert has_two_arms(g, 1, 1)
        assert not has_two_arms(g, 1, 2)
        # cyclic ball: the two directions around a long cycle are two arms
        cyc = Graph.build(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])
        assert has_two_arms(cyc, 0, 2)
        assert not has_two_arms(cyc, 0, 4)

    def test_two_arms_budget(self):
        edges = [(a, b + 6) for a in range(6) for b in range(6)]
        g = Graph.build(12, edges)
        with pytest.raises(SearchBudgetExceeded):
            has_two_arms(g, 0, 6, node_budget=5)

    def test_is_degenerate(self):
        path = Graph.build(5, [(i, i + 1) for i in range(4)])
        assert is_degenerate(path, 0, 5)
        assert not is_degenerate(path, 0, 3)
        assert is_degenerate(path, 2, 3)


class TestGraphProfile:
    def test_counts_classes(self):
        # two leaves share a class; the middle vertex is its own class
        path = Graph.build(3, [(0, 1), (1, 2)])
        prof = graph_profile(path, 1)
        assert sorted(prof.values()) == [1, 2]

    def test_profile_invariance_under_relabeling(self):
        g1 = Graph.build(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        g2 = Graph.build(5, [(4, 3), (3, 2), (2, 1), (1, 0)])
        assert graph_profile(g1, 2) == graph_profile(g2, 2)


class TestSerialization:
    def test_edge_list_round_trip(self, tmp_path):
        g = generate_er(50, 1.0, 5)
        path = str(tmp_path / "g.txt")
        write_edge_list(g, path)
        assert read_edge_list(path).edges == g.edges

    def test_json_round_trip(self):
        g = generate_er(30, 1.5, 2)
        assert graph_from_json(graph_to_json(g)).edges == g.edges
