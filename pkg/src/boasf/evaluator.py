"""Objective evaluation under resource accounting.

Evaluations never raise: objective exceptions and per-evaluation timeouts
are captured as failure records with their cost still charged. Successful
raw values are normalized into a reward in [0, 1] using the evaluable's
declared bounds, flipped for minimizing objectives.

Budgets come in two modes: wall-clock ``seconds`` (cost = elapsed time read
from a pluggable clock) and evaluation ``count`` (cost = 1 per evaluation).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import tpe
from .space import Configuration

__all__ = [
    "SECONDS",
    "COUNT",
    "DEFAULT_TIMEOUT_SECONDS",
    "ResourceBudget",
    "Evaluable",
    "EvaluationRecord",
    "RealClock",
    "NullClock",
    "SimulatedClock",
    "evaluate",
    "run_arm_round",
]

SECONDS = "seconds"
COUNT = "count"

# Cap on a single evaluation in seconds mode, mirroring a per-model training
# limit; disabled in count mode.
DEFAULT_TIMEOUT_SECONDS = 120.0


class RealClock:
    """Monotonic wall clock."""

    def now(self) -> float:
        return time.monotonic()


class NullClock:
    """Always reads zero; used in count mode so traces stay byte-identical."""

    def now(self) -> float:
        return 0.0


class SimulatedClock:
    """Manually advanced clock for deterministic accounting tests."""

    def __init__(self, start: float = 0.0):
        self._t = float(start)

    def now(self) -> float:
        return self._t

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise ValueError("cannot advance a clock backwards")
        self._t += float(dt)


@dataclass(frozen=True)
class ResourceBudget:
    """Total resource pool: wall-clock seconds or an evaluation count."""

    mode: str
    amount: float

    def __post_init__(self):
        if self.mode not in (SECONDS, COUNT):
            raise ValueError(f"budget mode must be {SECONDS!r} or {COUNT!r}, got {self.mode!r}")
        if not self.amount > 0:
            raise ValueError(f"budget amount must be > 0, got {self.amount}")
        if self.mode == COUNT and float(self.amount) != int(self.amount):
            raise ValueError(f"count budgets must be integral, got {self.amount}")


@dataclass(frozen=True)
class Evaluable:
    """A black-box objective with declared value bounds and orientation.

    ``fn`` maps a configuration to a raw real value (or raises). ``low`` and
    ``high`` bound the values worth distinguishing; rewards are the raw value
    normalized into [0, 1] and clipped, with 1 meaning best. Must be safe to
    call from multiple workers on distinct arms at once.
    """

    fn: Callable[[Configuration], float]
    low: float
    high: float
    orientation: str = "maximize"
    name: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high)) or not self.low < self.high:
            raise ValueError(f"evaluable bounds must be finite with low < high, got ({self.low}, {self.high})")
        if self.orientation not in ("maximize", "minimize"):
            raise ValueError(f"orientation must be maximize or minimize, got {self.orientation!r}")

    def normalize(self, raw: float) -> float:
        r = (raw - self.low) / (self.high - self.low)
        r = min(1.0, max(0.0, r))
        return 1.0 - r if self.orientation == "minimize" else r


@dataclass(frozen=True)
class EvaluationRecord:
    """Outcome of a single evaluation; failures carry no reward."""

    arm_id: str
    config: Configuration
    status: str  # "success" | "failure"
    reason: Optional[str]  # None | "timeout" | "objective-error"
    reward: Optional[float]
    raw_value: Optional[float]
    cost: float
    wall_time: float
    seq: int
    round_index: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "success"


def evaluate(
    evaluable: Evaluable,
    config: Configuration,
    timeout: Optional[float] = None,
    *,
    clock=None,
    cost_mode: str = SECONDS,
    arm_id: str = "",
    seq: int = 0,
    round_index: int = 0,
) -> EvaluationRecord:
    """Run one evaluation, capturing any failure as a record.

    The timeout is cooperative: an objective that overruns is charged its
    full elapsed time and marked as a timeout failure after it returns.
    Non-finite raw values are treated as objective errors so they can never
    reach reward statistics or proposal models.
    """
    clock = clock if clock is not None else RealClock()
    start = clock.now()
    raw: Optional[float] = None
    reason: Optional[str] = None
    try:
        raw = float(evaluable.fn(config))
        if not math.isfinite(raw):
            raw, reason = None, "objective-error"
    except Exception:
        reason = "objective-error"
    wall = clock.now() - start
    if reason is None and timeout is not None and wall > timeout:
        reason = "timeout"
    cost = 1.0 if cost_mode == COUNT else wall
    reward = evaluable.normalize(raw) if reason is None else None
    return EvaluationRecord(
        arm_id=arm_id,
        config=dict(config),
        status="success" if reason is None else "failure",
        reason=reason,
        reward=reward,
        raw_value=raw,
        cost=cost,
        wall_time=wall,
        seq=seq,
        round_index=round_index,
    )


def run_arm_round(
    arm,
    share: float,
    *,
    timeout: Optional[float] = None,
    cost_mode: str = SECONDS,
    clock=None,
    rng: Optional[np.random.Generator] = None,
    round_index: int = 0,
    tracker=None,
) -> list[EvaluationRecord]:
    """Drive one arm through its round share of resources.

    Loops suggest -> evaluate -> update until the share is exhausted: exactly
    floor(share) evaluations in count mode; in seconds mode an in-flight
    evaluation that overruns the share completes and is charged in full.
    Successes feed the arm's reward history and proposal model; failures are
    recorded but contaminate neither. ``tracker``, when given, vetoes new
    evaluations once the global budget is exhausted.
    """
    if share <= 0:
        raise ValueError(f"round share must be > 0, got {share}")
    clock = clock if clock is not None else (NullClock() if cost_mode == COUNT else RealClock())
    rng = rng if rng is not None else np.random.default_rng()
    records: list[EvaluationRecord] = []

    def one_evaluation() -> EvaluationRecord:
        config = tpe.suggest(arm.tpe, rng)
        record = evaluate(
            arm.evaluable,
            config,
            timeout,
            clock=clock,
            cost_mode=cost_mode,
            arm_id=arm.id,
            seq=arm.seq,
            round_index=round_index,
        )
        arm.seq += 1
        if record.ok:
            arm.rewards.append(record.reward)
            tpe.update(arm.tpe, config, 1.0 - record.reward)
        if tracker is not None:
            tracker.charge(record.cost)
        records.append(record)
        return record

    if cost_mode == COUNT:
        for _ in range(int(share)):
            if tracker is not None and tracker.exhausted():
                break
            one_evaluation()
    else:
        consumed = 0.0
        while consumed < share:
            if tracker is not None and tracker.exhausted():
                break
            consumed += one_evaluation().cost
    return records
