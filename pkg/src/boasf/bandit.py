"""Adaptive successive filtering over a finite set of arms.

Each round every live arm spends its resource share proposing and evaluating
configurations through its own Parzen-estimator model. Arms are then scored
with a Gaussian upper confidence bound over their cumulative reward history,
the scores are min-max scaled into advance probabilities (the best arm
always advances, the worst never does), survivors are drawn independently,
and the next round's pool is split among them by a softmax over the raw
scores. Round one is pure exploration: an equal split over all arms.

Rewards must lie in [0, 1]; the evaluator's normalization guarantees this.
"""

from __future__ import annotations

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .evaluator import (
    COUNT,
    Evaluable,
    EvaluationRecord,
    NullClock,
    RealClock,
    ResourceBudget,
    run_arm_round,
)
from .space import Configuration
from .tpe import TpeModel

__all__ = [
    "Arm",
    "ArmRoundStats",
    "BanditConfig",
    "RoundReport",
    "BestResult",
    "NoSuccessfulEvaluationError",
    "gaussian_ucb",
    "advance_probabilities",
    "filter_arms",
    "allocate_resources",
    "run",
]

log = logging.getLogger("boasf")


class NoSuccessfulEvaluationError(RuntimeError):
    """Every evaluation across every arm failed; there is no result to return."""


@dataclass
class Arm:
    """One competitor: an evaluable objective plus its proposal model and history."""

    id: str
    evaluable: Evaluable
    tpe: TpeModel
    rewards: list[float] = field(default_factory=list)
    alive: bool = True
    seq: int = 0


@dataclass(frozen=True)
class BanditConfig:
    budget: ResourceBudget
    rounds: int
    ucb_c: float = 2.0
    filter_seed: int = 0
    sampling_seed: int = 0
    timeout: Optional[float] = None
    parallelism: int = 1
    mode: Optional[str] = None
    partition_k: Optional[int] = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not self.ucb_c > 0:
            raise ValueError(f"ucb_c must be > 0, got {self.ucb_c}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")


@dataclass(frozen=True)
class ArmRoundStats:
    arm_id: str
    ucb: Optional[float]
    advance_probability: float
    allocated: float
    evaluations: int


@dataclass(frozen=True)
class RoundReport:
    round_index: int
    arms: tuple[ArmRoundStats, ...]
    survivors: tuple[str, ...]


@dataclass(frozen=True)
class BestResult:
    arm_id: str
    config: Configuration
    reward: float
    total_cost: float
    records: tuple[EvaluationRecord, ...]
    reports: tuple[RoundReport, ...]


# ---------------------------------------------------------------------------
# Scoring, filtering, allocation
# ---------------------------------------------------------------------------

def gaussian_ucb(rewards: Sequence[float], c: float) -> float:
    """mu + c * sigma / sqrt(N) over the arm's cumulative rewards.

    sigma is the population standard deviation, so a single sample scores
    exactly its own value.
    """
    if len(rewards) == 0:
        raise ValueError("gaussian_ucb requires at least one reward")
    arr = np.asarray(rewards, dtype=float)
    return float(arr.mean() + c * arr.std() / math.sqrt(len(arr)))


def advance_probabilities(ucbs: Mapping[str, float]) -> dict[str, float]:
    """Min-max scale scores into advance probabilities.

    The argmax arm gets probability 1 and the argmin probability 0. When all
    scores are equal (including a single arm) there is nothing to
    discriminate on and every arm advances with probability 1.
    """
    if not ucbs:
        raise ValueError("advance_probabilities requires at least one arm")
    values = list(ucbs.values())
    lo, hi = min(values), max(values)
    if hi == lo:
        return {arm: 1.0 for arm in ucbs}
    return {arm: (u - lo) / (hi - lo) for arm, u in ucbs.items()}


def filter_arms(probs: Mapping[str, float], rng: np.random.Generator) -> list[str]:
    """Draw survival independently per arm with its advance probability.

    Draws are consumed in the mapping's iteration order, so a seeded
    generator gives a reproducible survivor set. Probability-1 arms always
    survive and probability-0 arms never do, which makes the result a
    non-empty strict subset whenever scores are not all equal.
    """
    survivors = [arm for arm, p in probs.items() if rng.random() < p]
    if not survivors:  # unreachable: the argmax arm has p == 1
        raise AssertionError("filtering produced an empty survivor set")
    return survivors


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max()
    e = np.exp(shifted)
    return e / e.sum()


def allocate_resources(
    ucbs: Mapping[str, float], round_budget: float, mode: str = "seconds"
) -> dict[str, float]:
    """Split the round budget across survivors by a softmax over raw scores.

    Seconds mode returns positive real shares summing to the budget. Count
    mode returns integer shares summing to floor(budget), rounded by largest
    remainder with a floor of one evaluation per arm; when the budget cannot
    cover one evaluation per arm, the highest-scored arms get one each.
    """
    if not ucbs:
        raise ValueError("allocate_resources requires at least one arm")
    if not round_budget > 0:
        raise ValueError(f"round budget must be > 0, got {round_budget}")
    arms = list(ucbs)
    weights = _softmax(np.array([ucbs[a] for a in arms], dtype=float))
    if mode != COUNT:
        return {a: float(w * round_budget) for a, w in zip(arms, weights)}

    total = int(math.floor(round_budget))
    n = len(arms)
    if total < n:
        ranked = sorted(range(n), key=lambda i: (-ucbs[arms[i]], i))
        chosen = set(ranked[:total])
        return {a: (1 if i in chosen else 0) for i, a in enumerate(arms)}
    spare = total - n
    quotas = weights * spare
    counts = np.floor(quotas).astype(int)
    leftover = spare - int(counts.sum())
    remainders = quotas - np.floor(quotas)
    # Deterministic distribution: larger remainder first, then higher score.
    order = sorted(range(n), key=lambda i: (-remainders[i], -ucbs[arms[i]], i))
    for i in order[:leftover]:
        counts[i] += 1
    return {a: int(1 + c) for a, c in zip(arms, counts)}


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------

class _BudgetTracker:
    """Thread-safe global consumption gate for seconds-mode runs."""

    def __init__(self, limit: float):
        self.limit = limit
        self.consumed = 0.0
        self._lock = threading.Lock()

    def charge(self, cost: float) -> None:
        with self._lock:
            self.consumed += cost

    def exhausted(self) -> bool:
        with self._lock:
            return self.consumed >= self.limit


def run(
    config: BanditConfig,
    arms: Sequence[Arm],
    *,
    sink: Optional[Callable[[str, dict], None]] = None,
    clock=None,
) -> BestResult:
    """Execute the full multi-round schedule and return the best evaluation.

    Round one splits the per-round pool equally over all arms; later rounds
    softmax-allocate over the survivors of the previous filter. Filtering
    happens between rounds only (with a single round nothing is ever
    filtered), and arms whose entire history failed are discarded outright
    before scaling. The result is the best successful evaluation anywhere in
    the run's history, with ties broken toward the arm with the higher mean
    reward, then arm order.

    Arms may evaluate concurrently within a round (``config.parallelism``),
    with scoring, filtering, and allocation at a barrier between rounds.
    Per-arm proposal streams are seeded independently of scheduling, so
    count-mode traces are identical at any parallelism.
    """
    if not arms:
        raise ValueError("run requires at least one arm")
    ids = [a.id for a in arms]
    if len(set(ids)) != len(ids):
        raise ValueError(f"arm ids must be unique, got {ids}")

    budget = config.budget
    count_mode = budget.mode == COUNT
    if clock is None:
        clock = NullClock() if count_mode else RealClock()
    per_round = budget.amount / config.rounds
    timeout = config.timeout
    filter_rng = np.random.default_rng(config.filter_seed)
    arm_rngs = {
        arm.id: np.random.default_rng(seq)
        for arm, seq in zip(arms, np.random.SeedSequence(config.sampling_seed).spawn(len(arms)))
    }
    tracker = None if count_mode else _BudgetTracker(budget.amount)

    order = {arm.id: i for i, arm in enumerate(arms)}
    for arm in arms:
        arm.alive = True
    live: list[Arm] = list(arms)
    all_records: list[EvaluationRecord] = []
    reports: list[RoundReport] = []

    def emit(kind: str, payload: dict) -> None:
        if sink is not None:
            sink(kind, payload)

    for round_index in range(1, config.rounds + 1):
        if round_index == 1:
            shares = allocate_resources({a.id: 0.0 for a in live}, per_round, budget.mode)
        else:
            shares = allocate_resources(
                {a.id: gaussian_ucb(a.rewards, config.ucb_c) for a in live},
                per_round,
                budget.mode,
            )

        def work(arm: Arm) -> list[EvaluationRecord]:
            share = shares[arm.id]
            if share <= 0:
                return []
            return run_arm_round(
                arm,
                share,
                timeout=timeout,
                cost_mode=budget.mode,
                clock=clock,
                rng=arm_rngs[arm.id],
                round_index=round_index,
                tracker=tracker,
            )

        if config.parallelism > 1 and len(live) > 1:
            with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
                round_records = list(pool.map(work, live))
        else:
            round_records = [work(arm) for arm in live]

        for records in round_records:  # deterministic arm order, not completion order
            all_records.extend(records)
            for record in records:
                emit("evaluation", _record_payload(record))

        scored = {a.id: gaussian_ucb(a.rewards, config.ucb_c) for a in live if a.rewards}
        if not scored:
            raise NoSuccessfulEvaluationError(
                "no successful evaluation in any arm; nothing to return"
            )
        probs = advance_probabilities(scored)
        # Arms with zero successes ever are discarded outright.
        probs.update({a.id: 0.0 for a in live if not a.rewards})
        if round_index < config.rounds:
            survivor_ids = set(filter_arms({a.id: probs[a.id] for a in live}, filter_rng))
        else:
            # No next round to advance to; the final report lists every arm
            # that finished the run as a survivor.
            survivor_ids = {a.id for a in live}

        stats = tuple(
            ArmRoundStats(
                arm_id=a.id,
                ucb=scored.get(a.id),
                advance_probability=probs[a.id],
                allocated=shares[a.id],
                evaluations=len(records),
            )
            for a, records in zip(live, round_records)
        )
        report = RoundReport(round_index=round_index, arms=stats, survivors=tuple(
            a.id for a in live if a.id in survivor_ids
        ))
        reports.append(report)
        emit("round", _report_payload(report))
        log.info(
            "round %d: %d arms evaluated, %d advance",
            round_index, len(live), len(report.survivors),
        )

        for arm in live:
            arm.alive = arm.id in survivor_ids
        live = [a for a in live if a.alive]

    best = _best_record(all_records, arms, order)
    if best is None:
        raise NoSuccessfulEvaluationError("no successful evaluation in any arm; nothing to return")
    total_cost = float(sum(r.cost for r in all_records))
    return BestResult(
        arm_id=best.arm_id,
        config=dict(best.config),
        reward=best.reward,
        total_cost=total_cost,
        records=tuple(all_records),
        reports=tuple(reports),
    )


def _best_record(records, arms, order) -> Optional[EvaluationRecord]:
    # Best single successful evaluation; ties go to the arm with the better
    # cumulative mean reward, then to arm order, then to the earlier attempt.
    means = {a.id: (sum(a.rewards) / len(a.rewards) if a.rewards else 0.0) for a in arms}
    best = None
    best_key = None
    for r in records:
        if not r.ok:
            continue
        key = (-r.reward, -means[r.arm_id], order[r.arm_id], r.seq)
        if best is None or key < best_key:
            best, best_key = r, key
    return best


def _record_payload(record: EvaluationRecord) -> dict:
    return {
        "round": record.round_index,
        "arm": record.arm_id,
        "seq": record.seq,
        "status": record.status,
        "reason": record.reason,
        "reward": record.reward,
        "raw_value": record.raw_value,
        "cost": record.cost,
        "wall_time": record.wall_time,
        "config": record.config,
    }


def _report_payload(report: RoundReport) -> dict:
    return {
        "round": report.round_index,
        "arms": [
            {
                "arm": s.arm_id,
                "ucb": s.ucb,
                "advance_probability": s.advance_probability,
                "allocated": s.allocated,
                "evaluations": s.evaluations,
            }
            for s in report.arms
        ],
        "survivors": list(report.survivors),
    }
