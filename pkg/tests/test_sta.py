import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wdnsta.evaluator import BatchResult, PenaltySchedule, pc_at
from wdnsta.network import parse_network
from wdnsta.sta import (
    TRACE_COLUMNS, Incumbent, SearchConfig, SearchState, apply_operator, make_evaluator, make_rng,
    run_many, run_sta, summarize, trace_to_csv,
)

from toys import TREE

FAST = SearchConfig(se=8, max_iterations=40, seed=3)


class StubEvaluator:
    """Scores candidates by a fixed table of totals, ignoring their contents."""

    def __init__(self, totals):
        self.totals = np.asarray(totals, dtype=float)

    def __call__(self, cand):
        n = len(cand)
        return BatchResult(self.totals[:n].copy(), np.zeros(n), np.ones(n, dtype=bool))


def _state(cost, seed=0):
    inc = Incumbent(np.array([1, 2, 3]), cost, 0.0, True)
    return SearchState(inc, inc, np.random.default_rng(seed), pc=1.0)


class TestConfig:
    @pytest.mark.parametrize("kwargs", [dict(se=0), dict(p1=1.5), dict(p2=-0.1), dict(m_a=1),
                                        dict(m_b=0), dict(m_c=-1), dict(m_d=0), dict(max_iterations=-1)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SearchConfig(**kwargs)

    def test_expected_evaluations(self):
        assert SearchConfig(se=8, max_iterations=200).expected_evaluations() == 8 * 801

    def test_run_streams_differ(self):
        a = make_rng(5, 0).random(4)
        b = make_rng(5, 1).random(4)
        assert not np.array_equal(a, b)
        assert np.array_equal(make_rng(5, 1).random(4), b)


class TestApplyOperator:
    def test_better_candidate_always_taken(self):
        config = SearchConfig(se=4, p2=0.0)
        state = apply_operator(_state(10.0), "swap", config, StubEvaluator([12, 9, 11, 13]), 3)
        assert state.best.objective == 9.0
        assert state.last_improvement == "swap"

    @pytest.mark.parametrize("seed", range(20))
    def test_worse_rejected_without_risk(self, seed):
        config = SearchConfig(se=4, p2=0.0)
        state = apply_operator(_state(1.0, seed), "shift", config, StubEvaluator([5, 6, 7, 8]), 3)
        assert state.best.objective == 1.0

    @pytest.mark.parametrize("seed", range(20))
    def test_worse_accepted_with_certain_risk(self, seed):
        config = SearchConfig(se=4, p2=1.0)
        state = apply_operator(_state(1.0, seed), "substitute", config, StubEvaluator([7, 5, 6, 8]), 3)
        assert state.best.objective == 5.0
        assert state.last_improvement == ""

    def test_ties_pick_first_candidate(self):
        config = SearchConfig(se=3, p2=0.0)
        state = _state(10.0)
        cand_seen = []

        def evaluate_fn(cand):
            cand_seen.append(cand.copy())
            return StubEvaluator([4, 4, 4])(cand)

        apply_operator(state, "symmetry", config, evaluate_fn, 3)
        assert np.array_equal(state.best.design, cand_seen[0][0])

    def test_equal_cost_is_not_an_improvement(self):
        state = apply_operator(_state(4.0), "swap", SearchConfig(se=2, p2=0.0), StubEvaluator([4, 4]), 3)
        assert state.last_improvement == ""

    def test_archive_untouched(self):
        state = apply_operator(_state(10.0), "swap", SearchConfig(se=2), StubEvaluator([1, 2]), 3)
        assert state.archive.objective == 10.0

    def test_unknown_operator(self):
        with pytest.raises(ValueError):
            apply_operator(_state(1.0), "rotate", SearchConfig(), StubEvaluator([1] * 8), 3)

    def test_scoring_uses_current_pc(self):
        state = _state(10.0)
        state.best = Incumbent(np.array([1, 2, 3]), 5.0, 1.0, True)
        state.pc = 100.0
        assert state.best_cost == 105.0
        state.pc = 2.0
        assert state.best_cost == 7.0


class TestRun:
    @settings(max_examples=8, deadline=None)
    @given(st.integers(0, 10_000))
    def test_archive_monotone_fixed_pc(self, two_loop, seed):
        res = run_sta(two_loop, PenaltySchedule.fixed(2e4), SearchConfig(se=4, max_iterations=60, seed=seed))
        costs = [row.archive_cost for row in res.trace]
        assert all(b <= a for a, b in zip(costs, costs[1:]))

    def test_archive_monotone_once_feasible_under_ramp(self, two_loop):
        schedule = PenaltySchedule.linear(1e4, 1e5)
        for seed in range(3):
            res = run_sta(two_loop, schedule, SearchConfig(se=8, max_iterations=80, seed=seed))
            feasible = [row for row in res.trace if row.feasible]
            costs = [row.archive_cost for row in feasible]
            assert all(b <= a for a, b in zip(costs, costs[1:]))
            assert feasible

    def test_ramp_reported_in_trace(self, two_loop):
        schedule = PenaltySchedule.linear(1e4, 1e5)
        res = run_sta(two_loop, schedule, SearchConfig(se=4, max_iterations=10, seed=0))
        assert [row.pc for row in res.trace] == [pc_at(schedule, i, 10) for i in range(11)]

    def test_reproducible(self, hanoi):
        schedule = PenaltySchedule.fixed(4e4)
        a = run_sta(hanoi, schedule, FAST, run_index=2)
        b = run_sta(hanoi, schedule, FAST, run_index=2)
        assert a.trace == b.trace
        assert a.design == b.design and a.records == b.records

    def test_run_index_changes_stream(self, two_loop):
        schedule = PenaltySchedule.fixed(2e4)
        a = run_sta(two_loop, schedule, FAST, run_index=0)
        b = run_sta(two_loop, schedule, FAST, run_index=1)
        assert a.trace != b.trace

    @pytest.mark.parametrize("se,iters", [(1, 0), (3, 7), (8, 40)])
    def test_evaluation_count_exact(self, two_loop, se, iters):
        schedule = PenaltySchedule.fixed(2e4)
        evaluator = make_evaluator(two_loop, schedule)
        config = SearchConfig(se=se, max_iterations=iters)
        res = run_sta(two_loop, schedule, config, evaluator)
        assert res.evaluations == evaluator.count == se * (1 + 4 * iters)
        assert res.trace[-1].evaluations == res.evaluations

    def test_greedy_restart_limit(self, two_loop):
        config = SearchConfig(se=6, p1=1.0, p2=0.0, max_iterations=50, seed=4)
        res = run_sta(two_loop, PenaltySchedule.fixed(2e4), config)
        assert all(row.working_cost == row.archive_cost for row in res.trace)

    def test_single_option_catalog(self):
        text = TREE.replace("2 0.3 20\n", "")
        net = parse_network(text)
        res = run_sta(net, PenaltySchedule.fixed(10.0), SearchConfig(se=3, max_iterations=5))
        assert res.design.indices == (1, 1)
        assert len(res.records) == 1
        assert len({row.archive_cost for row in res.trace}) == 1

    def test_final_evaluation_matches_archive(self, two_loop):
        res = run_sta(two_loop, PenaltySchedule.fixed(2e4), FAST)
        assert res.evaluation.total == pytest.approx(res.trace[-1].archive_cost, rel=1e-9)

    def test_records_track_working_improvements(self, two_loop):
        res = run_sta(two_loop, PenaltySchedule.fixed(2e4), FAST)
        evals = [r[0] for r in res.records]
        costs = [r[1] for r in res.records]
        assert evals == sorted(evals)
        assert all(b < a for a, b in zip(costs, costs[1:]))
        assert res.evaluations_to_reach(-1.0) is None
        feasible = [r for r in res.records if r[2]]
        if feasible:
            assert res.evaluations_to_reach(feasible[0][1]) == feasible[0][0]


class TestBatchOfRuns:
    def test_run_many_matches_single_runs(self, two_loop):
        schedule = PenaltySchedule.fixed(2e4)
        config = SearchConfig(se=4, max_iterations=15, seed=9)
        many = run_many(two_loop, schedule, config, runs=3)
        for i, res in enumerate(many):
            single = run_sta(two_loop, schedule, config, run_index=i)
            assert res.trace == single.trace and res.run_index == i

    def test_parallel_equals_serial(self, two_loop):
        schedule = PenaltySchedule.fixed(2e4)
        config = SearchConfig(se=4, max_iterations=10, seed=1)
        serial = run_many(two_loop, schedule, config, runs=3, jobs=1)
        parallel = run_many(two_loop, schedule, config, runs=3, jobs=2)
        assert [r.trace for r in serial] == [r.trace for r in parallel]

    def test_summary(self, two_loop):
        results = run_many(two_loop, PenaltySchedule.fixed(2e4), SearchConfig(se=4, max_iterations=20), runs=4)
        s = summarize(results)
        totals = np.array([r.evaluation.total for r in results])
        assert s["runs"] == 4
        assert s["mean"] == pytest.approx(totals.mean())
        assert s["std"] == pytest.approx(totals.std(ddof=1))
        assert s["feasible_pct"] == 25.0 * sum(r.evaluation.feasible for r in results)
        feasible = [r.evaluation.total for r in results if r.evaluation.feasible]
        assert s["best_total"] == (min(feasible) if feasible else totals.min())
        assert s["best_feasible"] == bool(feasible)

    def test_trace_csv(self, two_loop):
        res = run_sta(two_loop, PenaltySchedule.fixed(2e4), SearchConfig(se=2, max_iterations=3))
        lines = trace_to_csv(res.trace).splitlines()
        assert lines[0].split(",") == list(TRACE_COLUMNS)
        assert len(lines) == 5
        assert lines[-1].split(",")[0] == "3"
