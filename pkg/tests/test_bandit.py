import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boasf.bandit import (
    Arm,
    BanditConfig,
    NoSuccessfulEvaluationError,
    advance_probabilities,
    allocate_resources,
    filter_arms,
    gaussian_ucb,
    run,
)
from boasf.evaluator import COUNT, SECONDS, Evaluable, ResourceBudget, SimulatedClock
from boasf.space import Continuous, SearchSpace
from boasf.tpe import TpeModel

UNIT = SearchSpace({"x": Continuous(0.0, 1.0)})


def constant_arm(arm_id, reward):
    evaluable = Evaluable(fn=lambda c, r=reward: r, low=0.0, high=1.0, name=arm_id)
    return Arm(id=arm_id, evaluable=evaluable, tpe=TpeModel(UNIT))


def failing_arm(arm_id):
    def boom(config):
        raise RuntimeError("always fails")

    return Arm(id=arm_id, evaluable=Evaluable(fn=boom, low=0.0, high=1.0), tpe=TpeModel(UNIT))


class TestGaussianUcb:
    def test_zero_variance(self):
        assert gaussian_ucb([0.8, 0.8, 0.8, 0.8], 2.0) == pytest.approx(0.8, abs=1e-12)

    def test_two_sample_arithmetic(self):
        # mu = 0.8, population sigma = 0.2, N = 2.
        expected = 0.8 + 2.0 * 0.2 / math.sqrt(2.0)
        assert gaussian_ucb([0.6, 1.0], 2.0) == pytest.approx(expected, abs=1e-12)
        assert gaussian_ucb([0.6, 1.0], 2.0) == pytest.approx(1.0828427124746192, abs=1e-9)

    def test_single_sample_sigma_zero(self):
        assert gaussian_ucb([0.5], 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_empty_rewards_is_caller_error(self):
        with pytest.raises(ValueError):
            gaussian_ucb([], 2.0)

    @given(
        rewards=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40),
        c=st.floats(0.1, 5.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_ucb_at_least_mean(self, rewards, c):
        assert gaussian_ucb(rewards, c) >= np.mean(rewards) - 1e-12


class TestAdvanceProbabilities:
    def test_linear_rescaling(self):
        probs = advance_probabilities({"a": 0.5, "b": 0.7, "c": 0.9})
        assert probs["a"] == pytest.approx(0.0, abs=1e-12)
        assert probs["b"] == pytest.approx(0.5, abs=1e-9)
        assert probs["c"] == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_equal_scores_all_advance(self):
        assert advance_probabilities({"a": 0.3, "b": 0.3}) == {"a": 1.0, "b": 1.0}

    def test_shared_maximum(self):
        probs = advance_probabilities({"a": 0.2, "b": 0.8, "c": 0.8})
        assert probs == {"a": 0.0, "b": 1.0, "c": 1.0}

    def test_single_arm(self):
        assert advance_probabilities({"only": 0.42}) == {"only": 1.0}


class TestFilterArms:
    def test_certain_advance_and_discard(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            assert filter_arms({"a": 1.0, "b": 0.0}, rng) == ["a"]

    def test_all_ones_all_survive(self):
        rng = np.random.default_rng(0)
        assert filter_arms({"a": 1.0, "b": 1.0, "c": 1.0}, rng) == ["a", "b", "c"]

    def test_monte_carlo_middle_arm_frequency(self):
        # 10^4 seeded trials: the p=0.5 arm survives in 0.5 +/- 0.02 of them.
        rng = np.random.default_rng(123)
        survived = 0
        for _ in range(10_000):
            survivors = filter_arms({"a": 1.0, "b": 0.5, "c": 0.0}, rng)
            assert "a" in survivors and "c" not in survivors
            survived += "b" in survivors
        assert abs(survived / 10_000 - 0.5) < 0.02

    def test_randomized_strict_subset_guarantee(self):
        rng = np.random.default_rng(7)
        for _ in range(2000):
            n = int(rng.integers(2, 12))
            scores = rng.random(n)
            while np.allclose(scores, scores[0]):
                scores = rng.random(n)
            probs = advance_probabilities({f"a{i}": float(s) for i, s in enumerate(scores)})
            survivors = filter_arms(probs, rng)
            assert 1 <= len(survivors) < n


class TestAllocateResources:
    def test_equal_scores_split_evenly(self):
        shares = allocate_resources({"a": 0.7, "b": 0.7}, 100.0, SECONDS)
        assert shares["a"] == pytest.approx(50.0, abs=1e-9)
        assert shares["b"] == pytest.approx(50.0, abs=1e-9)

    def test_exact_softmax_count_example(self):
        shares = allocate_resources({"a": 0.0, "b": math.log(3.0)}, 4, COUNT)
        assert shares == {"a": 1, "b": 3}

    def test_softmax_values_frozen_oracle(self):
        # Independent oracle: direct exp arithmetic over scores [1.0, 0.5, 0.0].
        shares = allocate_resources({"a": 1.0, "b": 0.5, "c": 0.0}, 1.0, SECONDS)
        assert shares["a"] == pytest.approx(0.506480391055654, abs=1e-9)
        assert shares["b"] == pytest.approx(0.307195885718498, abs=1e-9)
        assert shares["c"] == pytest.approx(0.186323723225848, abs=1e-9)
        assert sum(shares.values()) == pytest.approx(1.0, abs=1e-9)

    def test_seconds_shares_sum_to_budget(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n = int(rng.integers(1, 10))
            ucbs = {f"a{i}": float(rng.random() * 3) for i in range(n)}
            budget = float(rng.random() * 100 + 0.1)
            shares = allocate_resources(ucbs, budget, SECONDS)
            assert sum(shares.values()) == pytest.approx(budget, abs=1e-9)
            assert all(v > 0 for v in shares.values())

    def test_seconds_strictly_monotone_in_score(self):
        shares = allocate_resources({"a": 0.1, "b": 0.5, "c": 0.9}, 60.0, SECONDS)
        assert shares["a"] < shares["b"] < shares["c"]

    def test_count_shares_sum_to_floor(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = int(rng.integers(1, 10))
            ucbs = {f"a{i}": float(rng.random() * 3) for i in range(n)}
            budget = float(rng.integers(n, 80)) + 0.7
            shares = allocate_resources(ucbs, budget, COUNT)
            assert sum(shares.values()) == int(budget)
            assert all(isinstance(v, int) and v >= 1 for v in shares.values())

    def test_count_floor_of_one_per_survivor(self):
        shares = allocate_resources({"a": 5.0, "b": 0.0, "c": 0.0}, 3, COUNT)
        assert shares == {"a": 1, "b": 1, "c": 1}

    def test_count_budget_below_arm_count(self):
        shares = allocate_resources({"a": 0.9, "b": 0.1, "c": 0.5}, 2, COUNT)
        assert sum(shares.values()) == 2
        assert shares["a"] == 1 and shares["c"] == 1 and shares["b"] == 0

    def test_rejects_empty_and_non_positive(self):
        with pytest.raises(ValueError):
            allocate_resources({}, 10.0)
        with pytest.raises(ValueError):
            allocate_resources({"a": 1.0}, 0.0)


class TestRun:
    def config(self, amount=30, rounds=3, mode=COUNT, **kw):
        return BanditConfig(
            budget=ResourceBudget(mode, amount),
            rounds=rounds,
            ucb_c=2.0,
            filter_seed=5,
            sampling_seed=6,
            **kw,
        )

    def test_single_arm_gets_entire_budget(self):
        arm = constant_arm("solo", 0.7)
        result = run(self.config(amount=30, rounds=3), [arm])
        assert result.arm_id == "solo"
        assert result.reward == pytest.approx(0.7)
        assert len(result.records) == 30
        assert result.total_cost == 30

    def test_single_round_never_filters(self):
        arms = [constant_arm("hi", 0.9), constant_arm("lo", 0.1)]
        result = run(self.config(amount=20, rounds=1), arms)
        assert len(result.reports) == 1
        assert result.reports[0].survivors == ("hi", "lo")
        assert result.arm_id == "hi"

    def test_three_arm_hand_trace(self):
        # Deterministic rewards {0.9, 0.5, 0.1}, count budget 30, r=3.
        # Hand trace: round 1 splits 10 evaluations as [4, 3, 3]; UCBs equal
        # the constant rewards (sigma = 0), so advance probabilities are
        # [1, 0.5, 0]: the 0.1 arm is discarded certainly and 0.9 wins.
        for seed in range(10):
            arms = [constant_arm("a-09", 0.9), constant_arm("a-05", 0.5), constant_arm("a-01", 0.1)]
            config = BanditConfig(
                budget=ResourceBudget(COUNT, 30), rounds=3, ucb_c=2.0,
                filter_seed=seed, sampling_seed=seed + 1,
            )
            result = run(config, arms)
            first = result.reports[0]
            assert [s.allocated for s in first.arms] == [4, 3, 3]
            assert "a-01" not in first.survivors
            assert "a-09" in first.survivors
            by_arm = {s.arm_id: s for s in first.arms}
            assert by_arm["a-09"].advance_probability == pytest.approx(1.0)
            assert by_arm["a-05"].advance_probability == pytest.approx(0.5)
            assert by_arm["a-01"].advance_probability == pytest.approx(0.0)
            assert result.arm_id == "a-09"
            assert result.reward == pytest.approx(0.9)

    def test_all_failures_raise(self):
        arms = [failing_arm("f1"), failing_arm("f2")]
        with pytest.raises(NoSuccessfulEvaluationError):
            run(self.config(amount=12, rounds=2), arms)

    def test_failed_arm_discarded_after_first_round(self):
        arms = [constant_arm("ok", 0.6), failing_arm("broken")]
        result = run(self.config(amount=20, rounds=2), arms)
        first = result.reports[0]
        by_arm = {s.arm_id: s for s in first.arms}
        assert by_arm["broken"].advance_probability == 0.0
        assert by_arm["broken"].ucb is None
        assert "broken" not in first.survivors
        assert result.arm_id == "ok"

    def test_count_mode_resource_conservation(self):
        for amount, rounds in [(30, 3), (31, 3), (50, 4), (7, 2)]:
            arms = [constant_arm("a", 0.9), constant_arm("b", 0.5)]
            result = run(self.config(amount=amount, rounds=rounds), arms)
            assert result.total_cost <= amount
            per_round = amount // rounds
            for report in result.reports:
                allocated = sum(s.allocated for s in report.arms)
                assert allocated == per_round

    def test_anytime_curve_non_decreasing(self):
        def noisy(config):
            return config["x"]

        arms = [
            Arm(id=f"n{i}", evaluable=Evaluable(fn=noisy, low=0.0, high=1.0), tpe=TpeModel(UNIT))
            for i in range(3)
        ]
        result = run(self.config(amount=36, rounds=3), arms)
        best = -np.inf
        curve = []
        for record in result.records:
            if record.ok:
                best = max(best, record.reward)
            curve.append(best)
        assert all(b >= a for a, b in zip(curve, curve[1:]))
        assert result.reward == pytest.approx(curve[-1])

    def test_strict_subset_on_filtered_rounds(self):
        rewards = [0.9, 0.7, 0.5, 0.3, 0.1]
        arms = [constant_arm(f"c{r}", r) for r in rewards]
        result = run(self.config(amount=60, rounds=3), arms)
        live = len(arms)
        for report in result.reports[:-1]:
            ucbs = [s.ucb for s in report.arms if s.ucb is not None]
            if len(report.arms) >= 2 and len(set(ucbs)) > 1:
                assert 1 <= len(report.survivors) < len(report.arms)
            live = len(report.survivors)

    def test_deterministic_trace_same_seeds(self):
        def build():
            return [
                Arm(
                    id=f"n{i}",
                    evaluable=Evaluable(fn=lambda c: c["x"], low=0.0, high=1.0),
                    tpe=TpeModel(UNIT),
                )
                for i in range(3)
            ]

        events_a, events_b = [], []
        run(self.config(amount=24, rounds=2), build(), sink=lambda k, p: events_a.append((k, p)))
        run(self.config(amount=24, rounds=2), build(), sink=lambda k, p: events_b.append((k, p)))
        assert events_a == events_b

    def test_parallelism_invariance(self):
        def build():
            return [constant_arm(f"c{i}", 0.2 + 0.2 * i) for i in range(4)]

        serial, threaded = [], []
        run(self.config(amount=40, rounds=2, parallelism=1), build(), sink=lambda k, p: serial.append((k, p)))
        run(self.config(amount=40, rounds=2, parallelism=4), build(), sink=lambda k, p: threaded.append((k, p)))
        assert serial == threaded

    def test_seconds_mode_overrun_bounded(self):
        clock = SimulatedClock()

        def costly(config):
            clock.advance(3.0)
            return config["x"]

        arms = [
            Arm(id=f"t{i}", evaluable=Evaluable(fn=costly, low=0.0, high=1.0), tpe=TpeModel(UNIT))
            for i in range(2)
        ]
        config = BanditConfig(
            budget=ResourceBudget(SECONDS, 24.0), rounds=2, ucb_c=2.0,
            filter_seed=1, sampling_seed=2,
        )
        result = run(config, arms, clock=clock)
        # Each arm may overrun each of its rounds by at most one evaluation.
        max_overrun = 3.0 * len(arms) * config.rounds
        assert result.total_cost <= 24.0 + max_overrun
        for report in result.reports:
            for stats in report.arms:
                arm_costs = [r.cost for r in result.records
                             if r.arm_id == stats.arm_id and r.round_index == report.round_index]
                if stats.allocated > 0 and arm_costs:
                    assert sum(arm_costs) - stats.allocated <= 3.0 + 1e-9

    def test_rejects_duplicate_arm_ids(self):
        arms = [constant_arm("same", 0.5), constant_arm("same", 0.6)]
        with pytest.raises(ValueError):
            run(self.config(), arms)

    def test_rejects_empty_arm_list(self):
        with pytest.raises(ValueError):
            run(self.config(), [])


class TestBanditConfigValidation:
    def test_field_checks(self):
        budget = ResourceBudget(COUNT, 10)
        with pytest.raises(ValueError):
            BanditConfig(budget=budget, rounds=0)
        with pytest.raises(ValueError):
            BanditConfig(budget=budget, rounds=1, ucb_c=0.0)
        with pytest.raises(ValueError):
            BanditConfig(budget=budget, rounds=1, parallelism=0)
