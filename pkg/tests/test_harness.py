import dataclasses
import random

import pytest

from linktomo.errors import IdentityViolation
from linktomo.evaluation import GeneratorSpec, generate, place_monitors
from linktomo.graph import VIRTUAL_M1, VIRTUAL_M2, VIRTUAL_ROOT, build_extended_graph
from linktomo.harness import (
    build_cycles,
    closed_cycle_violations,
    counting_report,
    independent_filter,
    predict_trivial_residues,
    reduce_to_Y,
    run_harness,
    verify_lemma1,
)
from linktomo.paths import build_pipeline
from linktomo.trees import GREEN

from oracles import rank_fraction

E1_CYCLE = frozenset(
    {
        (VIRTUAL_M1, VIRTUAL_ROOT),
        (VIRTUAL_M1, "a"),
        (VIRTUAL_M2, VIRTUAL_ROOT),
        (VIRTUAL_M2, "a"),
    }
)


def sweep_pipelines(count=8, seed=67):
    rng = random.Random(seed)
    made = 0
    while made < count:
        family = rng.choice(["er", "ba", "rg"])
        m = rng.randint(12, 45)
        param = {"er": 0.2, "ba": 2.0, "rg": 0.38}[family]
        g = generate(GeneratorSpec(family, m, param, rng.getrandbits(32)))
        monitors, gate = place_monitors(g)
        if not gate:
            continue
        made += 1
        yield build_pipeline(build_extended_graph(g, monitors), check_rank=False)


class TestCycles:
    def test_f1_entry_count(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        assert len(cs.entries) == 3 * (f1_pipeline.trees.gm.m - 1) == 18

    def test_f1_distinct_count(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        assert len(cs.distinct) == f1_pipeline.trees.gm.n == 13

    def test_cycles_closed_through_root(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        assert closed_cycle_violations(cs) == []

    def test_mu1_green_red_cycle_is_e1(self, f1_extended, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        for owner, pair, links in cs.entries:
            if owner == f1_extended.mu1 and pair == (2, 3):
                assert links == E1_CYCLE
                return
        raise AssertionError("mu1 green+red entry not found")


class TestLemma1:
    def test_f1(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        rep = verify_lemma1(cs, f1_pipeline.trees)
        assert rep["count_ok"] and rep["rank_ok"]
        assert rep["rank"] == 13

    def test_rank_matches_fraction_oracle(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        links = sorted(f1_pipeline.trees.gm.links)
        index = {l: i for i, l in enumerate(links)}
        matrix = []
        for cyc in cs.distinct:
            row = [0] * len(links)
            for l in cyc:
                row[index[l]] = 1
            matrix.append(row)
        assert rank_fraction(matrix) == 13

    def test_corrupted_tree_detected(self, f1_pipeline):
        t = f1_pipeline.trees
        broken_green = dict(t.parent[GREEN])
        broken_green["d"] = "b"
        broken = dataclasses.replace(t, parent={**t.parent, GREEN: broken_green})
        cs = build_cycles(broken)
        rep = verify_lemma1(cs, broken)
        assert not (rep["count_ok"] and rep["rank_ok"])

    def test_sweep(self):
        for pipe in sweep_pipelines(count=5, seed=73):
            rep = verify_lemma1(build_cycles(pipe.trees), pipe.trees)
            assert rep["count_ok"] and rep["rank_ok"]


class TestReduceToY:
    def test_f1_single_trivial(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        y, trivial = reduce_to_Y(cs, f1_pipeline.trees)
        assert trivial == 1
        assert len(y) == 12

    def test_residues_are_monitor_paths(self, f1_extended, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        y, _ = reduce_to_Y(cs, f1_pipeline.trees)
        for p in y:
            assert p.nodes[0] in f1_extended.monitor_set
            assert p.nodes[-1] in f1_extended.monitor_set
            assert not any(f1_extended.is_virtual_link(l) for l in p.links)

    def test_blue_green_cycle_of_d_reduces_to_bda(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        target = None
        for owner, pair, links in cs.entries:
            if owner == "d" and pair == (1, 2):
                target = links
        real = frozenset(l for l in target if not f1_pipeline.gex.is_virtual_link(l))
        assert real == {("a", "d"), ("b", "d")}

    def test_f1_y_prime(self, f1_pipeline):
        cs = build_cycles(f1_pipeline.trees)
        y, _ = reduce_to_Y(cs, f1_pipeline.trees)
        y_prime = independent_filter(y, f1_pipeline.trees)
        assert len(y_prime) == 13 - 7 == 6


class TestCountingReport:
    def test_f1_values(self, f1_pipeline):
        rep = run_harness(f1_pipeline).counting
        assert rep.n_e == 4
        assert rep.gm_nodes == 7
        assert rep.gm_links == 13
        assert rep.b1 == 3 and rep.b2 == 3
        assert rep.b1 + rep.b2 == rep.gm_nodes - 1
        assert rep.gm_links == rep.b1 + rep.gm_nodes + rep.n_e - 1
        assert rep.delta == (4, 1, 1, 1)
        assert rep.q == (7, 1, 2, 3)
        assert rep.attributed == (7, 1, 2, 3)
        assert sum(rep.eps) + sum(rep.eps_prime) == rep.b2
        assert rep.distinct_cycles == 13
        assert rep.v_count == 7
        assert rep.y_prime_size == 6
        assert rep.trivial_residues == 1
        assert rep.violations == ()

    def test_eq4_eq5(self, f1_pipeline):
        rep = run_harness(f1_pipeline).counting
        assert rep.distinct_cycles == 2 * rep.gm_nodes + rep.n_e - 2 - rep.b2
        assert rep.distinct_cycles == rep.gm_links

    def test_strict_raises_on_violation(self, f1_pipeline):
        t = f1_pipeline.trees
        cs = build_cycles(t)
        with pytest.raises(IdentityViolation):
            counting_report(t, f1_pipeline.ears, cs, y_prime_size=3, trivial_residues=1, strict=True)

    def test_prediction_matches_f1(self, f1_pipeline):
        assert predict_trivial_residues(f1_pipeline.trees) == 1

    def test_sweep_identities(self):
        for pipe in sweep_pipelines(count=6, seed=79):
            report = run_harness(pipe)
            assert report.violations == []
            c = report.counting
            assert c.attributed == c.q
            assert sum(c.delta) == c.gm_nodes
            assert c.y_prime_size == c.gm_links - c.v_count


class TestZRank:
    def test_tree_paths_span_y_prime_space(self, f1_pipeline):
        report = run_harness(f1_pipeline)
        assert report.z_rank_ok
        assert report.z_rank == len(f1_pipeline.trees.real_gm_links)

    def test_sweep(self):
        for pipe in sweep_pipelines(count=4, seed=83):
            report = run_harness(pipe)
            assert report.z_rank_ok
