import random

from linktomo.ears import (
    EarDecomposition,
    StNumbering,
    ear_decompose,
    neighbor_property_violations,
    oriented_ear,
    st_number,
    validate_ears,
    validate_st,
)
from linktomo.evaluation import GeneratorSpec, generate, place_monitors
from linktomo.graph import VIRTUAL_M1, VIRTUAL_M2, VIRTUAL_ROOT, build_extended_graph


def small_instances(count=12, seed=5):
    """Deterministic gated instances for property sweeps."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        family = rng.choice(["er", "ba", "rg"])
        m = rng.randint(12, 40)
        param = {"er": 0.22, "ba": 2.0, "rg": 0.4}[family]
        g = generate(GeneratorSpec(family, m, param, rng.getrandbits(32)))
        monitors, gate = place_monitors(g)
        if not gate:
            continue
        made += 1
        yield build_extended_graph(g, monitors)


class TestF1Decomposition:
    def test_expected_ears(self, f1_pipeline):
        d = f1_pipeline.ears
        assert d.ears[0] == (VIRTUAL_ROOT, VIRTUAL_M1, "a", VIRTUAL_M2, VIRTUAL_ROOT)
        # the virtual-virtual single-internal ear is avoided for c
        assert d.ears[1] == (VIRTUAL_M1, "c", "a")
        assert d.ears[2] == ("a", "d", "c")
        assert d.ears[3] == ("a", "b", "c")
        assert d.n_e == 4

    def test_ear_levels(self, f1_pipeline):
        d = f1_pipeline.ears
        assert d.ear_level == {
            VIRTUAL_ROOT: 1,
            VIRTUAL_M1: 1,
            VIRTUAL_M2: 1,
            "a": 1,
            "c": 2,
            "d": 3,
            "b": 4,
        }

    def test_last_ear_internal_is_mu2(self, f1_extended, f1_pipeline):
        last = f1_pipeline.ears.ears[-1]
        assert len(last) == 3
        assert last[1] == f1_extended.mu2

    def test_validator_clean(self, f1_extended, f1_pipeline):
        assert validate_ears(f1_extended, f1_pipeline.ears) == []

    def test_deterministic(self, f1_extended):
        assert ear_decompose(f1_extended).ears == ear_decompose(f1_extended).ears


class TestValidatorNegatives:
    def test_reordered_e1(self, f1_extended, f1_pipeline):
        d = f1_pipeline.ears
        bad_e1 = (VIRTUAL_ROOT, VIRTUAL_M2, "a", VIRTUAL_M1, VIRTUAL_ROOT)
        bad = EarDecomposition(ears=(bad_e1,) + d.ears[1:], ear_level=dict(d.ear_level))
        assert any("E1 fixed form" in v for v in validate_ears(f1_extended, bad))

    def test_missing_node(self, f1_extended, f1_pipeline):
        d = f1_pipeline.ears
        levels = {k: v for k, v in d.ear_level.items() if k != "d"}
        bad = EarDecomposition(ears=d.ears[:2] + d.ears[3:], ear_level=levels)
        assert any("node coverage" in v for v in validate_ears(f1_extended, bad))

    def test_chorded_internal_detected(self, f1_extended, f1_pipeline):
        # b-d exists in K4, so making d internal of a longer ear through b
        # violates relaxed induced-ness
        d = f1_pipeline.ears
        bad = EarDecomposition(
            ears=(d.ears[0], d.ears[1], ("a", "d", "b", "c")),
            ear_level={**d.ear_level, "b": 3, "d": 3},
        )
        problems = validate_ears(f1_extended, bad)
        assert any("non-consecutive" in v for v in problems)


class TestStNumbering:
    def test_e1_assignment(self, f1_pipeline):
        # run the algorithm on the first ear alone
        e1_only = EarDecomposition(
            ears=f1_pipeline.ears.ears[:1],
            ear_level={v: 1 for v in f1_pipeline.ears.ears[0]},
        )
        st = st_number(e1_only)
        assert st.f[VIRTUAL_ROOT] == 1
        assert st.f[VIRTUAL_M2] == 2
        assert st.f["a"] == 3
        assert st.f[VIRTUAL_M1] == 4

    def test_f1_full_numbers(self, f1_pipeline):
        assert f1_pipeline.st.f == {
            VIRTUAL_ROOT: 1,
            VIRTUAL_M2: 2,
            "a": 3,
            "d": 4,
            "b": 5,
            "c": 6,
            VIRTUAL_M1: 7,
        }

    def test_boundary_values(self, f1_extended, f1_pipeline):
        st = f1_pipeline.st
        assert st.f[VIRTUAL_ROOT] == 1
        assert st.f[VIRTUAL_M1] == f1_extended.full.m

    def test_validator_clean(self, f1_extended, f1_pipeline):
        assert validate_st(f1_extended, f1_pipeline.st) == []

    def test_swap_detected(self, f1_extended, f1_pipeline):
        f = dict(f1_pipeline.st.f)
        f["a"], f[VIRTUAL_ROOT] = f[VIRTUAL_ROOT], f["a"]
        problems = validate_st(f1_extended, StNumbering(f=f))
        assert any(f"f({VIRTUAL_ROOT})" in v for v in problems)

    def test_constant_numbering_detected(self, f1_extended, f1_pipeline):
        f = {v: 1 for v in f1_pipeline.st.f}
        problems = validate_st(f1_extended, StNumbering(f=f))
        assert any("bijection" in v for v in problems)

    def test_oriented_ear_increases_f(self, f1_pipeline):
        d, st = f1_pipeline.ears, f1_pipeline.st
        for i in range(2, d.n_e + 1):
            seq = oriented_ear(d, st, i)
            values = [st.f[v] for v in seq]
            assert values == sorted(values)


class TestPropertySweep:
    def test_random_instances(self):
        for gex in small_instances():
            d = ear_decompose(gex)
            assert validate_ears(gex, d) == []
            st = st_number(d)
            assert validate_st(gex, st) == []
            assert neighbor_property_violations(gex, d, st) == []
            # node-count identity: delta_1 + sum(delta_i) = |V|
            assert sum(d.delta(i) for i in range(1, d.n_e + 1)) == gex.full.m
            assert d.delta(1) == 4
            assert sorted(st.f.values()) == list(range(1, gex.full.m + 1))
