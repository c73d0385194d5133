import random

import pytest

from linktomo.errors import NotIdentifiable
from linktomo.evaluation import GeneratorSpec, generate, place_monitors
from linktomo.graph import build_extended_graph, build_graph, canonical_link
from linktomo.paths import (
    build_pipeline,
    construct_all,
    make_path,
    node_segments,
    non_tree_link_path,
    segment,
    tree_link_paths,
)
from linktomo.trees import BLUE, GREEN, RED

from oracles import path_incidence, rank_fraction

F1_EXPECTED_PATHS = {
    (("a", "b"),),
    (("a", "c"),),
    (("b", "c"),),
    (("a", "d"), ("b", "d")),
    (("a", "d"), ("c", "d")),
    (("b", "d"), ("c", "d")),
}


def sweep_instances(count=10, seed=31, lo=12, hi=45):
    rng = random.Random(seed)
    made = 0
    while made < count:
        family = rng.choice(["er", "ba", "rg"])
        m = rng.randint(lo, hi)
        param = {"er": 0.2, "ba": 2.0, "rg": 0.38}[family]
        g = generate(GeneratorSpec(family, m, param, rng.getrandbits(32)))
        monitors, gate = place_monitors(g)
        if not gate:
            continue
        made += 1
        yield build_extended_graph(g, monitors)


class TestSegments:
    def test_f1_examples(self, f1_pipeline):
        t = f1_pipeline.trees
        blue_c = segment(t, "c", BLUE)
        assert blue_c.valid and blue_c.nodes == ("c", "d", "b")
        green_a = segment(t, "a", GREEN)
        assert not green_a.valid
        red_d = segment(t, "d", RED)
        assert red_d.valid and red_d.nodes == ("d", "c")

    def test_non_monitors_always_valid(self, f1_extended, f1_pipeline):
        for v in f1_extended.base.nodes:
            if v in f1_extended.monitor_set:
                continue
            for seg in node_segments(f1_pipeline.trees, v).values():
                assert seg.valid

    def test_segment_disjointness(self, f1_pipeline):
        segs = node_segments(f1_pipeline.trees, "d")
        for i in (BLUE, GREEN, RED):
            for j in (BLUE, GREEN, RED):
                if i < j:
                    shared = set(segs[i].nodes) & set(segs[j].nodes)
                    assert shared == {"d"}

    def test_mu1_contributes_one_segment(self, f1_extended, f1_pipeline):
        segs = node_segments(f1_pipeline.trees, f1_extended.mu1)
        assert sum(1 for s in segs.values() if s.valid) == 1

    def test_mu2_contributes_two_segments(self, f1_extended, f1_pipeline):
        segs = node_segments(f1_pipeline.trees, f1_extended.mu2)
        assert sum(1 for s in segs.values() if s.valid) == 2


class TestTreePaths:
    def test_f1_path_set(self, f1_pipeline):
        keys = {p.key for p in f1_pipeline.paths}
        assert keys == F1_EXPECTED_PATHS
        assert len(f1_pipeline.paths) == 6

    def test_count_equals_real_tree_links(self):
        for gex in sweep_instances(count=6, seed=37):
            pipe = build_pipeline(gex, check_rank=False)
            tree_paths = [p for p in pipe.paths if p.kind == "tree"]
            assert len(tree_paths) == len(pipe.trees.real_gm_links)

    def test_canonical_direction(self):
        p = make_path(("z", "m", "a"), "tree")
        assert p.nodes == ("a", "m", "z")
        q = make_path(("a", "m", "z"), "tree")
        assert q.key == p.key

    def test_path_endpoints_are_monitors(self):
        for gex in sweep_instances(count=5, seed=41):
            ps = tree_link_paths(build_pipeline(gex, check_rank=False).trees)
            for p in ps:
                assert p.nodes[0] in gex.monitor_set
                assert p.nodes[-1] in gex.monitor_set
                assert len(set(p.nodes)) == len(p.nodes)
                assert not any(gex.is_virtual_node(x) for x in p.nodes)

    def test_per_node_contributions(self):
        # non-special monitors <= 3 paths, mu1 exactly 1, specials lose one
        # per incident virtual parent
        for gex in sweep_instances(count=5, seed=43):
            t = build_pipeline(gex, check_rank=False).trees
            for v in gex.monitors:
                segs = node_segments(t, v)
                valid = sum(1 for s in segs.values() if s.valid)
                virtual_parents = sum(
                    1
                    for tree in (BLUE, GREEN, RED)
                    if gex.is_virtual_node(t.parent[tree][v])
                )
                assert valid == 3 - virtual_parents
                if v == gex.mu1:
                    assert valid == 1


@pytest.fixture(scope="module")
def chorded_instance():
    # known instance with at least one non-tree link
    for gex in sweep_instances(count=30, seed=47, lo=15, hi=40):
        pipe = build_pipeline(gex, check_rank=False)
        if pipe.nontree_links:
            return gex, pipe
    raise AssertionError("no instance with non-tree links found")


class TestNonTreePaths:

    def test_f1_has_no_non_tree_links(self, f1_pipeline):
        assert f1_pipeline.nontree_links == []

    def test_non_tree_paths_have_single_unknown(self, chorded_instance):
        gex, pipe = chorded_instance
        nontree = set(pipe.nontree_links)
        assert nontree
        for p in pipe.paths:
            if p.kind != "nontree":
                continue
            assert p.nontree_link in p.links
            assert p.links & nontree == {p.nontree_link}
            assert p.nodes[0] in gex.monitor_set
            assert p.nodes[-1] in gex.monitor_set

    def test_flow_fallback_produces_valid_path(self, chorded_instance):
        from linktomo.paths import _disjoint_arms_by_flow

        gex, pipe = chorded_instance
        link = pipe.nontree_links[0]
        arms = _disjoint_arms_by_flow(pipe.trees, link)
        assert arms is not None
        arm_u, arm_v = arms
        assert arm_u[0] == link[0] and arm_v[0] == link[1]
        assert set(arm_u).isdisjoint(arm_v)
        assert arm_u[-1] in gex.monitor_set and arm_v[-1] in gex.monitor_set
        gm_links = set(pipe.trees.real_gm_links)
        for arm in (arm_u, arm_v):
            for a, b in zip(arm, arm[1:]):
                assert canonical_link(a, b) in gm_links

    def test_c5_with_chord(self):
        # five-cycle plus one chord, everything monitored: the pipeline must
        # embed whichever links fall outside the tree union
        g = build_graph(
            ["a", "b", "c", "d", "e"],
            [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("a", "e"), ("b", "d")],
        )
        gex = build_extended_graph(g, ["a", "b", "c", "d", "e"])
        assert gex.is_identifiable()
        pipe = build_pipeline(gex)
        assert len(pipe.paths) == g.n
        nontree = set(pipe.nontree_links)
        for p in pipe.paths:
            if p.kind == "nontree":
                assert p.links & nontree == {p.nontree_link}


class TestConstructAll:
    def test_f1_six_paths_full_rank(self, f1_extended):
        ps = construct_all(f1_extended)
        assert len(ps) == 6
        matrix, _ = ps.incidence_matrix(sorted(f1_extended.base.links))
        assert rank_fraction(matrix) == 6

    def test_theorem_on_sweep(self):
        for gex in sweep_instances(count=8, seed=53):
            ps = construct_all(gex)
            assert len(ps) == gex.base.n

    def test_gate_failure_raises(self, f1_graph):
        gex = build_extended_graph(f1_graph, ["a", "b"])
        with pytest.raises(NotIdentifiable):
            construct_all(gex)

    def test_deterministic_output_order(self, f1_extended):
        a = [p.key for p in construct_all(f1_extended)]
        b = [p.key for p in construct_all(f1_extended)]
        assert a == b == sorted(a)
