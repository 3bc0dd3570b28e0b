import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wdnsta.evaluator import (
    BatchEvaluator, PenaltySchedule, deficit_factor, evaluate, failure_deficit, pc_at,
    penalty_units,
)
from wdnsta.network import Design, design_cost, parse_network
from wdnsta.benchmarks import data_path
from wdnsta.sta import make_evaluator

from toys import TREE

STA_TWO_LOOP = Design([11, 7, 10, 4, 10, 7, 7, 1])


class TestSchedule:
    def test_linear_endpoints(self):
        s = PenaltySchedule.linear(1e4, 1e5)
        assert pc_at(s, 0, 200) == 1e4
        assert pc_at(s, 200, 200) == 1e5

    def test_linear_midpoint(self):
        assert pc_at(PenaltySchedule.linear(1e4, 1e5), 100, 200) == pytest.approx(5.5e4)

    def test_hanoi_ramp_start(self):
        assert pc_at(PenaltySchedule.linear(4e4, 1e5), 0, 1000) == 4e4

    def test_clamped_past_budget(self):
        s = PenaltySchedule.linear(1e4, 1e5)
        assert pc_at(s, 500, 200) == 1e5
        assert pc_at(s, -3, 200) == 1e4

    def test_fixed_ignores_iteration(self):
        s = PenaltySchedule.fixed(2e4)
        assert {pc_at(s, i, 200) for i in (0, 57, 200, 999)} == {2e4}

    def test_budget_stored_on_schedule(self):
        assert pc_at(PenaltySchedule.linear(1e4, 1e5, budget=10), 5) == pytest.approx(5.5e4)

    def test_parse(self):
        assert PenaltySchedule.parse("2e4") == PenaltySchedule.fixed(2e4)
        lin = PenaltySchedule.parse("1e6:1e7", deficit_unit="m")
        assert (lin.mode, lin.pc, lin.pc_end, lin.deficit_unit) == ("linear", 1e6, 1e7, "m")
        assert lin.label() == "1e+06:1e+07"

    @pytest.mark.parametrize("kwargs", [
        dict(pc=0.0), dict(pc=-1.0), dict(mode="cubic"), dict(deficit_unit="yd"),
        dict(mode="linear", pc=1e5, pc_end=1e4), dict(mode="linear", pc=1e4),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PenaltySchedule(**kwargs)


class TestPenalty:
    def test_two_metre_deficit(self):
        assert 2e4 * penalty_units(np.array([0.0, 2.0, 0.0]), 1.0, 1.0) == 40_000

    def test_rho_exponent(self):
        assert penalty_units(np.array([3.0, 0.0]), 2.0, 1.0) == 9.0

    def test_single_node_shortfall_on_network(self, tree_net):
        # Raise node B's floor to exactly 2 m above its computed head
        head_b = float(evaluate(Design([2, 2]), tree_net).heads[2])
        floor = head_b + 2.0
        raised = parse_network(TREE.replace("B 0.06 0 pressure 10", f"B 0.06 0 pressure {floor!r}"))
        ev = evaluate(Design([2, 2]), raised, PenaltySchedule.fixed(2e4))
        assert ev.penalty == pytest.approx(40_000, rel=1e-9)
        assert ev.deficits[2] == pytest.approx(2.0, rel=1e-9)
        assert ev.total == ev.objective + ev.penalty

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(0, 50), min_size=1, max_size=12), st.data(),
           st.floats(1e-6, 10), st.sampled_from([1.0, 1.5, 2.0]))
    def test_monotone_in_each_deficit(self, deficits, data, bump, rho):
        d = np.array(deficits)
        k = data.draw(st.integers(0, len(d) - 1))
        bigger = d.copy()
        bigger[k] += bump
        assert penalty_units(bigger, rho, 1.0) > penalty_units(d, rho, 1.0)

    def test_raising_a_floor_raises_total(self, two_loop):
        text = data_path("two-loop").read_text()
        raised = parse_network(text.replace("2      100.0   150.00  pressure  30",
                                            "2      100.0   150.00  pressure  31"), "two-loop")
        design = Design([1] * 8)
        a = evaluate(design, two_loop, PenaltySchedule.fixed(2e4))
        b = evaluate(design, raised, PenaltySchedule.fixed(2e4))
        assert b.total == pytest.approx(a.total + 2e4, rel=1e-12)


class TestEvaluate:
    def test_published_two_loop_design(self, two_loop):
        ev = evaluate(STA_TWO_LOOP, two_loop, PenaltySchedule.fixed(2e4))
        assert ev.feasible and ev.hydraulic_ok
        assert ev.penalty == 0.0
        assert ev.total == ev.objective == pytest.approx(419_000)

    def test_deterministic(self, hanoi):
        design = Design(np.random.default_rng(3).integers(1, 7, size=34))
        a = evaluate(design, hanoi, PenaltySchedule.fixed(4e4))
        b = evaluate(design, hanoi, PenaltySchedule.fixed(4e4))
        assert a.total == b.total and a.penalty == b.penalty
        assert np.array_equal(a.heads, b.heads) and np.array_equal(a.deficits, b.deficits)

    @pytest.mark.parametrize("schedule", [PenaltySchedule.fixed(1e3), PenaltySchedule.fixed(2e4),
                                          PenaltySchedule.fixed(1e7), PenaltySchedule.linear(1e4, 1e5, 10)])
    def test_feasible_total_ignores_pc(self, two_loop, schedule):
        for it in (0, 5, 10):
            assert evaluate(STA_TWO_LOOP, two_loop, schedule, it).total == pytest.approx(419_000)

    def test_feasibility_iff_zero_penalty(self, two_loop):
        rng = np.random.default_rng(5)
        for idx in rng.integers(1, 15, size=(50, 8)):
            ev = evaluate(Design(idx), two_loop)
            assert ev.feasible == (ev.penalty == 0.0 and ev.hydraulic_ok)
            assert ev.total == ev.objective + ev.penalty

    def test_hydraulic_failure_sentinel(self, bridge):
        ev = evaluate(Design([1]), bridge, PenaltySchedule.fixed(3e3))
        assert not ev.hydraulic_ok and not ev.feasible
        # both junctions require 10 m of pressure
        assert ev.penalty == pytest.approx(3e3 * 20)
        assert "disconnected" in ev.message

    def test_sentinel_exceeds_reachable_deficits(self, bridge):
        worst = evaluate(Design([2]), bridge, PenaltySchedule.fixed(1.0)).penalty
        assert failure_deficit(bridge) > worst

    def test_deficits_always_metres(self, new_york):
        a = evaluate(Design([1] * 21), new_york, PenaltySchedule.fixed(1.0))
        b = evaluate(Design([1] * 21), new_york, PenaltySchedule.fixed(1.0, deficit_unit="m"))
        np.testing.assert_array_equal(a.deficits, b.deficits)
        assert a.penalty == pytest.approx(b.penalty / 0.3048, rel=1e-12)

    def test_deficit_unit_under_rho(self, new_york):
        a = evaluate(Design([1] * 21), new_york, PenaltySchedule.fixed(1.0, rho=2.0))
        b = evaluate(Design([1] * 21), new_york, PenaltySchedule.fixed(1.0, rho=2.0, deficit_unit="m"))
        assert a.penalty == pytest.approx(b.penalty / 0.3048 ** 2, rel=1e-12)

    def test_deficit_factor(self, new_york, two_loop):
        assert deficit_factor(PenaltySchedule(), new_york) == 0.3048
        assert deficit_factor(PenaltySchedule(deficit_unit="m"), new_york) == 1.0
        assert deficit_factor(PenaltySchedule(), two_loop) == 1.0


class TestBatch:
    @pytest.mark.parametrize("name,pc", [("two-loop", 2e4), ("hanoi", 4e4), ("new-york", 2e6)])
    @pytest.mark.parametrize("unit", ["network", "m"])
    def test_matches_scalar(self, name, pc, unit, request):
        net = request.getfixturevalue(name.replace("-", "_"))
        schedule = PenaltySchedule.fixed(pc, deficit_unit=unit)
        batch = make_evaluator(net, schedule)
        designs = np.random.default_rng(21).integers(1, len(net.catalog) + 1, size=(60, net.n_decisions))
        res = batch(designs)
        totals = res.totals(pc)
        for k, idx in enumerate(designs):
            ev = evaluate(Design(idx), net, schedule)
            assert totals[k] == pytest.approx(ev.total, rel=1e-9)
            assert res.objective[k] == pytest.approx(design_cost(idx, net), rel=1e-12)
            assert bool(res.feasible[k]) == ev.feasible

    def test_counts_designs(self, two_loop):
        batch = BatchEvaluator(two_loop)
        batch(np.ones((5, 8), dtype=int))
        batch([14] * 8)
        assert batch.count == 6

    def test_closed_tree_link_falls_back(self, bridge):
        res = BatchEvaluator(bridge)([[1], [2]])
        assert list(res.hydraulic_ok) == [False, True]
        assert res.violation[0] == pytest.approx(failure_deficit(bridge))

    def test_new_york_closed_duplicates_take_fallback_or_chord(self, new_york):
        schedule = PenaltySchedule.fixed(2e6)
        batch = make_evaluator(new_york, schedule)
        res = batch([[1] * 21])
        ev = evaluate(Design([1] * 21), new_york, schedule)
        assert res.hydraulic_ok[0] and ev.hydraulic_ok
        assert res.totals(2e6)[0] == pytest.approx(ev.total, rel=1e-9)
