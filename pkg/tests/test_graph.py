import itertools
import json
import random

import pytest

from linktomo.errors import (
    DuplicateLink,
    GraphError,
    NoNonCutvertexMonitor,
    SelfLoop,
    UnknownEndpoint,
)
from linktomo.graph import (
    VIRTUAL_M1,
    VIRTUAL_M2,
    VIRTUAL_NODES,
    VIRTUAL_ROOT,
    build_extended_graph,
    build_graph,
    extended_gate,
    find_non_cutvertex_monitor,
    graph_from_dict,
    graph_to_dict,
    is_connected,
    vertex_connectivity_at_least,
)

from oracles import brute_vertex_connectivity_at_least


def random_connected_graph(rng, m, p):
    nodes = [f"n{i}" for i in range(m)]
    while True:
        links = [
            (u, v)
            for u, v in itertools.combinations(nodes, 2)
            if rng.random() < p
        ]
        g = build_graph(nodes, links)
        if is_connected(g):
            return g


class TestBuildGraph:
    def test_smallest(self):
        g = build_graph(["a", "b"], [("a", "b")])
        assert g.m == 2 and g.n == 1

    def test_k4_counts(self, f1_graph):
        assert f1_graph.m == 4 and f1_graph.n == 6

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            build_graph(["a"], [("a", "a")])

    def test_duplicate_link(self):
        with pytest.raises(DuplicateLink):
            build_graph(["a", "b"], [("a", "b"), ("b", "a")])

    def test_unknown_endpoint(self):
        with pytest.raises(UnknownEndpoint):
            build_graph(["a", "b"], [("a", "c")])

    def test_adjacency_symmetric(self, f1_graph):
        for u in f1_graph.nodes:
            for v in f1_graph.adj[u]:
                assert u in f1_graph.adj[v]


class TestVertexConnectivity:
    def test_k4_is_3_connected(self, f1_graph):
        assert vertex_connectivity_at_least(f1_graph, 3)

    def test_path_has_cutvertex(self):
        g = build_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
        assert not vertex_connectivity_at_least(g, 2)

    def test_f1_extended_3_connected(self, f1_extended):
        assert vertex_connectivity_at_least(f1_extended.full, 3)
        assert brute_vertex_connectivity_at_least(f1_extended.full, 3)

    def test_matches_brute_force_small(self):
        rng = random.Random(11)
        for _ in range(120):
            m = rng.randint(3, 10)
            g = random_connected_graph(rng, m, rng.choice([0.3, 0.5, 0.7]))
            k = rng.randint(2, 4)
            assert vertex_connectivity_at_least(g, k) == brute_vertex_connectivity_at_least(g, k)

    def test_flow_path_matches_brute_force(self):
        # above the exhaustive-enumeration size limit
        rng = random.Random(13)
        for _ in range(25):
            g = random_connected_graph(rng, rng.randint(13, 17), rng.choice([0.25, 0.4]))
            assert vertex_connectivity_at_least(g, 3) == brute_vertex_connectivity_at_least(g, 3)


class TestNonCutvertexMonitor:
    def test_f1(self, f1_graph):
        assert find_non_cutvertex_monitor(f1_graph, ["a", "b", "c"]) == "a"

    def test_unique_cutvertex_monitor(self):
        g = build_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
        with pytest.raises(NoNonCutvertexMonitor):
            find_non_cutvertex_monitor(g, ["b"])

    def test_star_leaf(self):
        g = build_graph(["s", "x", "y", "z"], [("s", "x"), ("s", "y"), ("s", "z")])
        assert find_non_cutvertex_monitor(g, ["s", "x"]) == "x"


class TestExtendedGraph:
    def test_f1_shape(self, f1_extended):
        assert f1_extended.full.m == 7
        assert f1_extended.full.n == 15
        assert f1_extended.mu1 == "a"
        assert f1_extended.mu2 == "b"
        assert len(f1_extended.virtual_links) == 9

    def test_count_identities(self, f1_extended):
        base = f1_extended.base
        assert f1_extended.full.m == base.m + 3
        assert f1_extended.full.n == base.n + 2 * len(f1_extended.monitors) + 3

    def test_root_degree_three(self, f1_extended):
        assert f1_extended.full.degree(VIRTUAL_ROOT) == 3

    def test_virtual_removal_recovers_base(self, f1_extended):
        full = f1_extended.full
        kept_nodes = tuple(x for x in full.nodes if x not in VIRTUAL_NODES)
        kept_links = tuple(
            l for l in full.links if not f1_extended.is_virtual_link(l)
        )
        assert kept_nodes == f1_extended.base.nodes
        assert kept_links == f1_extended.base.links

    def test_two_monitor_k4_gate_fails(self, f1_graph):
        gex = build_extended_graph(f1_graph, ["a", "b"])
        assert not gex.is_identifiable()
        assert not vertex_connectivity_at_least(gex.full, 3)

    def test_all_monitor_triangle(self):
        g = build_graph(["a", "b", "c"], [("a", "b"), ("a", "c"), ("b", "c")])
        gex = build_extended_graph(g, ["a", "b", "c"])
        assert gex.full.m == 6
        assert gex.full.n == 3 + 9
        assert gex.is_identifiable()

    def test_reserved_names_rejected(self):
        g = build_graph([VIRTUAL_ROOT, "b"], [(VIRTUAL_ROOT, "b")])
        with pytest.raises(GraphError):
            build_extended_graph(g, [VIRTUAL_ROOT, "b"])

    def test_mu2_override(self, f1_graph):
        gex = build_extended_graph(f1_graph, ["a", "b", "c"], mu2="c")
        assert gex.mu2 == "c"
        with pytest.raises(GraphError):
            build_extended_graph(f1_graph, ["a", "b", "c"], mu2="a")

    def test_gate_matches_flow_on_random_instances(self):
        rng = random.Random(29)
        checked = 0
        for _ in range(80):
            m = rng.randint(4, 12)
            g = random_connected_graph(rng, m, rng.choice([0.3, 0.5]))
            kappa = rng.randint(2, m)
            monitors = sorted(rng.sample(list(g.nodes), kappa))
            try:
                gex = build_extended_graph(g, monitors)
            except NoNonCutvertexMonitor:
                continue
            checked += 1
            assert gex.is_identifiable() == vertex_connectivity_at_least(gex.full, 3)
            assert extended_gate(g, frozenset(monitors)) == gex.is_identifiable()
        assert checked >= 40


class TestGraphJson:
    def test_round_trip(self, f1_graph, f1_truth):
        doc = graph_to_dict(f1_graph, ["a", "b", "c"], f1_truth)
        g, monitors, metrics = graph_from_dict(doc)
        assert g.nodes == f1_graph.nodes
        assert g.links == f1_graph.links
        assert monitors == ["a", "b", "c"]
        assert metrics == f1_truth
        assert json.dumps(doc)  # JSON-serializable

    def test_metric_key_format(self, f1_graph, f1_truth):
        doc = graph_to_dict(f1_graph, ["a"], f1_truth)
        assert doc["metrics"]["a|b"] == 1.0

    def test_unknown_metric_link(self, f1_graph):
        doc = graph_to_dict(f1_graph, ["a"])
        doc["metrics"] = {"a|z": 1.0}
        with pytest.raises(GraphError):
            graph_from_dict(doc)
