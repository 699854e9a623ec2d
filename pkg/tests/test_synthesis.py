"""End-to-end schedule synthesis on hand-sized workloads.

Every expected round count was worked out by hand first and is also
confirmed by the exhaustive search oracle, so these are regression pins
on behaviour, not on whatever the code happened to produce.
"""

import pytest
from support import control_mode, mk_app, small_params, wide_params, random_small_case

from roundsched.checker import brute_force_min_rounds, check
from roundsched.model import Mode
from roundsched.synthesis import SynthConfig, max_rounds, synthesize

GRID = SynthConfig(grid_us=1000)


def pipeline_mode(period_ms=40):
    app = mk_app(
        "a",
        period_ms,
        [("t1", "n1", 1), ("t2", "n2", 1)],
        [("t1", "t2", "m")],
    )
    return Mode(id="pipe", applications=(app,))


def fan_in_mode():
    app = mk_app(
        "a",
        40,
        [("t1", "n1", 1), ("t2", "n2", 1), ("t3", "n3", 1)],
        [("t1", "t3", "m1"), ("t2", "t3", "m2")],
    )
    return Mode(id="fan", applications=(app,))


def wrap_mode():
    pipe = mk_app("a", 100, [("t1", "n1", 1), ("t2", "n2", 1)], [("t1", "t2", "m")])
    blocker = mk_app("b", 100, [("t0", "n1", 85)], [])
    return Mode(id="wrap", applications=(pipe, blocker))


class TestKnownCases:
    def test_two_task_pipeline_fits_one_round(self):
        out = synthesize(pipeline_mode(), small_params(), GRID)
        assert out.status == "feasible"
        assert out.rounds_used == 1
        assert out.objective_us == 18_000
        assert out.schedule.rounds[0].alloc == ("m",)

    def test_control_loop_two_hops(self):
        mode = control_mode()
        params = wide_params(hops=2)
        out = synthesize(mode, params, GRID)
        assert out.status == "feasible"
        assert out.rounds_used == 2
        assert out.objective_us == 89_000
        assert out.solver_calls == 3
        sched = out.schedule
        assert sched.rounds[0].alloc == ("m1", "m2")
        assert sched.rounds[1].alloc == ("m3",)
        assert sched.leftover == {"m1": 0, "m2": 0, "m3": 0}
        assert check(mode, sched, params).ok

    def test_single_slot_fan_in_needs_two_rounds(self):
        out = synthesize(fan_in_mode(), small_params(slots=1), GRID)
        assert out.status == "feasible"
        assert out.rounds_used == 2
        allocs = sorted(r.alloc for r in out.schedule.rounds)
        assert allocs == [("m1",), ("m2",)]

    def test_blocked_producer_node(self):
        # an 85 ms solo task squeezes the pipeline on a shared node; the
        # optimum packs the pipeline ahead of it and sums both app latencies
        out = synthesize(wrap_mode(), small_params(), GRID)
        assert out.status == "feasible"
        assert out.rounds_used == 1
        assert out.objective_us == 103_000

    def test_control_loop_four_hops_is_infeasible(self):
        out = synthesize(control_mode(), wide_params(hops=4), GRID)
        assert out.status == "infeasible"
        assert out.schedule is None
        assert out.solver_calls == 2  # round counts 0 and 1 both rejected

    def test_horizon_cap_limits_the_search(self):
        cfg = SynthConfig(grid_us=1000, t_max_us=50_000)
        out = synthesize(control_mode(), wide_params(hops=2), cfg)
        assert out.status == "infeasible"
        assert out.solver_calls == 2


class TestLimitsAndGuards:
    def test_max_rounds_counts_whole_rounds_in_horizon(self):
        assert max_rounds(control_mode(), wide_params(hops=2), GRID) == 2
        assert max_rounds(control_mode(), wide_params(hops=4), GRID) == 1
        cfg = SynthConfig(grid_us=1000, t_max_us=50_000)
        assert max_rounds(control_mode(), wide_params(hops=2), cfg) == 1

    def test_zero_budget_reports_timeout(self):
        cfg = SynthConfig(grid_us=1000, solver_budget_ms=0)
        out = synthesize(control_mode(), wide_params(hops=2), cfg)
        assert out.status == "timeout"
        assert out.schedule is None

    def test_broken_mode_is_rejected_before_solving(self):
        app = mk_app("a", 20, [("t1", "n1", 1)], [("t1", "t9", "m")])
        with pytest.raises(ValueError, match="unknown_edge_task"):
            synthesize(Mode(id="bad", applications=(app,)), small_params(), GRID)


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(12))
    def test_round_count_matches_exhaustive_search(self, seed):
        mode, params = random_small_case(seed)
        want_r, _witness = brute_force_min_rounds(mode, params, grid_us=1000)
        out = synthesize(mode, params, GRID)
        if want_r is None:
            assert out.status == "infeasible"
        else:
            assert out.status == "feasible"
            assert out.rounds_used == want_r
            assert check(mode, out.schedule, params).ok
