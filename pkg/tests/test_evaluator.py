import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boasf.bandit import Arm
from boasf.evaluator import (
    COUNT,
    SECONDS,
    Evaluable,
    NullClock,
    ResourceBudget,
    SimulatedClock,
    evaluate,
    run_arm_round,
)
from boasf.space import Continuous, SearchSpace
from boasf.tpe import TpeModel

UNIT = SearchSpace({"x": Continuous(0.0, 1.0)})


def make_arm(fn, low=0.0, high=1.0, orientation="maximize"):
    evaluable = Evaluable(fn=fn, low=low, high=high, orientation=orientation, name="t")
    return Arm(id="t", evaluable=evaluable, tpe=TpeModel(UNIT))


class TestResourceBudget:
    def test_modes(self):
        ResourceBudget(SECONDS, 10.5)
        ResourceBudget(COUNT, 10)
        with pytest.raises(ValueError):
            ResourceBudget("minutes", 10)
        with pytest.raises(ValueError):
            ResourceBudget(COUNT, 10.5)
        with pytest.raises(ValueError):
            ResourceBudget(SECONDS, 0)


class TestNormalization:
    def test_maximize_identity_inside_bounds(self):
        record = evaluate(make_arm(lambda c: 0.83).evaluable, {"x": 0.5}, cost_mode=COUNT)
        assert record.reward == pytest.approx(0.83)

    def test_minimize_endpoint_mapping(self):
        evaluable = Evaluable(fn=lambda c: c["x"], low=0.0, high=300.0, orientation="minimize")
        hi = evaluate(evaluable, {"x": 300.0}, cost_mode=COUNT)
        lo = evaluate(evaluable, {"x": 0.0}, cost_mode=COUNT)
        assert hi.reward == pytest.approx(0.0)
        assert lo.reward == pytest.approx(1.0)

    def test_out_of_bounds_values_clip(self):
        evaluable = Evaluable(fn=lambda c: 7.0, low=0.0, high=1.0, orientation="maximize")
        assert evaluate(evaluable, {"x": 0.1}, cost_mode=COUNT).reward == 1.0
        evaluable = Evaluable(fn=lambda c: -3.0, low=0.0, high=1.0, orientation="maximize")
        assert evaluate(evaluable, {"x": 0.1}, cost_mode=COUNT).reward == 0.0

    @given(a=st.floats(-50, 50), b=st.floats(-50, 50))
    @settings(max_examples=100, deadline=None)
    def test_monotone_for_maximize(self, a, b):
        evaluable = Evaluable(fn=lambda c: c["x"], low=-10.0, high=10.0, orientation="maximize")
        ra = evaluable.normalize(a)
        rb = evaluable.normalize(b)
        if a < b:
            assert ra <= rb


class TestFailureCapture:
    def test_objective_error_is_captured(self):
        def boom(config):
            raise RuntimeError("training diverged")

        record = evaluate(Evaluable(fn=boom, low=0.0, high=1.0), {"x": 0.5}, cost_mode=COUNT)
        assert record.status == "failure"
        assert record.reason == "objective-error"
        assert record.reward is None and record.raw_value is None

    def test_non_finite_raw_value_is_failure(self):
        record = evaluate(
            Evaluable(fn=lambda c: float("nan"), low=0.0, high=1.0), {"x": 0.5}, cost_mode=COUNT
        )
        assert record.status == "failure"
        assert record.reason == "objective-error"

    def test_timeout_marked_and_fully_charged(self):
        clock = SimulatedClock()

        def slow(config):
            clock.advance(5.0)
            return 0.9

        record = evaluate(
            Evaluable(fn=slow, low=0.0, high=1.0), {"x": 0.5}, timeout=3.0, clock=clock
        )
        assert record.status == "failure"
        assert record.reason == "timeout"
        assert record.reward is None
        assert record.cost == pytest.approx(5.0)
        assert record.wall_time == pytest.approx(5.0)

    def test_fast_evaluation_passes_timeout(self):
        clock = SimulatedClock()

        def quick(config):
            clock.advance(1.0)
            return 0.9

        record = evaluate(
            Evaluable(fn=quick, low=0.0, high=1.0), {"x": 0.5}, timeout=3.0, clock=clock
        )
        assert record.status == "success"
        assert record.cost == pytest.approx(1.0)


class TestCountMode:
    def test_cost_is_one_and_wall_time_zero(self):
        record = evaluate(
            Evaluable(fn=lambda c: 0.5, low=0.0, high=1.0),
            {"x": 0.5},
            cost_mode=COUNT,
            clock=NullClock(),
        )
        assert record.cost == 1.0
        assert record.wall_time == 0.0

    def test_run_arm_round_emits_exact_count(self):
        arm = make_arm(lambda c: c["x"])
        records = run_arm_round(arm, 3, cost_mode=COUNT, rng=np.random.default_rng(0))
        assert len(records) == 3
        assert [r.seq for r in records] == [0, 1, 2]
        assert len(arm.rewards) == 3
        assert len(arm.tpe.observations) == 3

    def test_failures_do_not_contaminate(self):
        def boom(config):
            raise ValueError("no")

        arm = make_arm(boom)
        records = run_arm_round(arm, 5, cost_mode=COUNT, rng=np.random.default_rng(0))
        assert len(records) == 5
        assert all(r.status == "failure" for r in records)
        assert arm.rewards == []
        assert arm.tpe.observations == []
        assert [r.seq for r in records] == [0, 1, 2, 3, 4]


class TestTimeMode:
    def test_in_flight_completion_rule(self):
        # Evaluations cost ~3 s each against a 10 s share: the fourth starts
        # while 1 s of share remains and runs to completion.
        clock = SimulatedClock()

        def cost_three(config):
            clock.advance(3.0)
            return 0.5

        arm = make_arm(cost_three)
        records = run_arm_round(
            arm, 10.0, cost_mode=SECONDS, clock=clock, rng=np.random.default_rng(0)
        )
        assert len(records) == 4
        total = sum(r.cost for r in records)
        assert total == pytest.approx(12.0)
        assert total >= 10.0
        assert total - 10.0 <= 3.0  # overshoot bounded by one in-flight evaluation

    def test_share_exactly_consumed_stops(self):
        clock = SimulatedClock()

        def cost_five(config):
            clock.advance(5.0)
            return 0.5

        arm = make_arm(cost_five)
        records = run_arm_round(
            arm, 10.0, cost_mode=SECONDS, clock=clock, rng=np.random.default_rng(0)
        )
        assert len(records) == 2
        assert sum(r.cost for r in records) == pytest.approx(10.0)

    def test_rejects_non_positive_share(self):
        arm = make_arm(lambda c: 0.5)
        with pytest.raises(ValueError):
            run_arm_round(arm, 0, cost_mode=COUNT)


class TestEvaluableValidation:
    def test_bounds_and_orientation(self):
        with pytest.raises(ValueError):
            Evaluable(fn=lambda c: 0.0, low=1.0, high=1.0)
        with pytest.raises(ValueError):
            Evaluable(fn=lambda c: 0.0, low=0.0, high=1.0, orientation="sideways")
