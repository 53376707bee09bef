"""Command-line front end: run a schedule, inspect partitions, report traces.

Subcommands:
    boasf run --config run.json [overrides]     execute and stream a trace
    boasf partition --config run.json           list the sub-space arms
    boasf report TRACE [--csv PATH]             summarize a finished trace

Exit codes: 0 success, 1 runtime failure (including "no successful
evaluation"), 2 configuration error. Set BOASF_LOG=debug|info|warning for
log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bandit, trace
from .evaluator import COUNT, DEFAULT_TIMEOUT_SECONDS, SECONDS, Evaluable, ResourceBudget
from .space import Categorical, Continuous, Integer, SearchSpace, SpaceError, partition
from .tasks import (
    BRANIN_SPACE,
    CvSpec,
    branin_evaluable,
    builtin_learners,
    cv_evaluable,
    get_learner,
    load_csv,
    make_dataset,
    sphere,
    sphere_space,
)
from .tpe import TpeModel, TpeParams

__all__ = ["main", "ConfigError", "cmd_run", "cmd_partition", "cmd_report"]

log = logging.getLogger("boasf")

MODES = ("model-selection", "hpo")
_DEFAULT_LEARNERS = ["knn", "decision-tree", "logistic-regression", "gaussian-nb"]


class ConfigError(Exception):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# ---------------------------------------------------------------------------
# Configuration loading and validation
# ---------------------------------------------------------------------------

def _expect(section: dict, field: str, types, default=None, required=False, path=""):
    label = f"{path}.{field}" if path else field
    if field not in section or section[field] is None:
        if required:
            raise ConfigError(label, "missing required field")
        return default
    value = section[field]
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types) or isinstance(value, bool) and types is not bool:
        raise ConfigError(label, f"expected {getattr(types, '__name__', types)}, got {value!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    mode: str
    budget: ResourceBudget
    rounds: int
    ucb_c: float
    filter_seed: int
    sampling_seed: int
    data_seed: int
    tpe_params: TpeParams
    timeout: Optional[float]
    parallelism: int
    output: str
    partition_k: int
    learners: tuple[str, ...]
    target: dict
    dataset: dict
    effective: dict


def load_raw_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path}:{exc.lineno}: invalid JSON: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return raw


def apply_overrides(raw: dict, args) -> dict:
    """Command-line flags strictly shadow file values."""
    raw = json.loads(json.dumps(raw))  # deep copy, JSON-clean
    run = raw.setdefault("run", {})
    budget = raw.setdefault("budget", {})
    if getattr(args, "mode", None) is not None:
        run["mode"] = args.mode
    if getattr(args, "rounds", None) is not None:
        run["rounds"] = args.rounds
    if getattr(args, "ucb_c", None) is not None:
        run["ucb_c"] = args.ucb_c
    if getattr(args, "partition_k", None) is not None:
        run["partition_k"] = args.partition_k
    if getattr(args, "timeout", None) is not None:
        run["timeout"] = args.timeout
    if getattr(args, "output", None) is not None:
        run["output"] = args.output
    if getattr(args, "parallelism", None) is not None:
        run["parallelism"] = args.parallelism
    if getattr(args, "seed", None) is not None:
        run["seeds"] = {"filter": args.seed, "sampling": args.seed + 1, "data": args.seed + 2}
    if getattr(args, "budget", None) is not None:
        budget["amount"] = args.budget
    if getattr(args, "budget_mode", None) is not None:
        budget["mode"] = args.budget_mode
    return raw


def validate_config(raw: dict) -> RunConfig:
    run = _expect(raw, "run", dict, default={})
    mode = _expect(run, "mode", str, required=True, path="run")
    if mode not in MODES:
        raise ConfigError("run.mode", f"must be one of {MODES}, got {mode!r}")

    budget_section = _expect(raw, "budget", dict, required=True)
    budget_mode = _expect(budget_section, "mode", str, default=COUNT, path="budget")
    amount = _expect(budget_section, "amount", (int, float), required=True, path="budget")
    try:
        budget = ResourceBudget(budget_mode, float(amount))
    except ValueError as exc:
        raise ConfigError("budget", str(exc))

    rounds = _expect(run, "rounds", int, default=3, path="run")
    if rounds < 1:
        raise ConfigError("run.rounds", f"must be >= 1, got {rounds}")
    ucb_c = _expect(run, "ucb_c", float, default=2.0, path="run")
    if not ucb_c > 0:
        raise ConfigError("run.ucb_c", f"must be > 0, got {ucb_c}")

    seeds = _expect(run, "seeds", dict, default={}, path="run")
    filter_seed = _expect(seeds, "filter", int, default=0, path="run.seeds")
    sampling_seed = _expect(seeds, "sampling", int, default=1, path="run.seeds")
    data_seed = _expect(seeds, "data", int, default=2, path="run.seeds")

    timeout = _expect(run, "timeout", (int, float), path="run")
    if timeout is None and budget.mode == SECONDS:
        timeout = DEFAULT_TIMEOUT_SECONDS
    if timeout is not None:
        timeout = float(timeout)
        if timeout <= 0:
            raise ConfigError("run.timeout", f"must be > 0, got {timeout}")

    parallelism = _expect(run, "parallelism", int, default=os.cpu_count() or 1, path="run")
    if parallelism < 1:
        raise ConfigError("run.parallelism", f"must be >= 1, got {parallelism}")
    output = _expect(run, "output", str, default="trace.jsonl", path="run")
    partition_k = _expect(run, "partition_k", int, default=2, path="run")
    if partition_k < 1:
        raise ConfigError("run.partition_k", f"must be >= 1, got {partition_k}")

    tpe_section = _expect(raw, "tpe", dict, default={})
    try:
        tpe_params = TpeParams(
            gamma=_expect(tpe_section, "gamma", float, default=0.25, path="tpe"),
            n_candidates=_expect(tpe_section, "n_candidates", int, default=24, path="tpe"),
            min_observations=_expect(tpe_section, "min_observations", int, default=3, path="tpe"),
            bandwidth_floor=_expect(tpe_section, "bandwidth_floor", float, default=0.01, path="tpe"),
            prior_weight=_expect(tpe_section, "prior_weight", float, default=1.0, path="tpe"),
        )
    except ValueError as exc:
        raise ConfigError("tpe", str(exc))

    known = {l.name for l in builtin_learners()}
    learners = _expect(raw, "learners", list, default=list(_DEFAULT_LEARNERS))
    for name in learners:
        if name not in known:
            raise ConfigError("learners", f"unknown learner {name!r}; available: {sorted(known)}")
    if mode == "model-selection" and not learners:
        raise ConfigError("learners", "model-selection mode needs at least one learner")

    target = _expect(raw, "target", dict, default={})
    if mode == "hpo":
        has_learner = "learner" in target and target["learner"] is not None
        has_objective = "objective" in target and target["objective"] is not None
        if has_learner == has_objective:
            raise ConfigError("target", "hpo mode needs exactly one of 'learner' or 'objective'")
        if has_learner and target["learner"] not in known:
            raise ConfigError("target.learner", f"unknown learner {target['learner']!r}")
        if has_objective and target["objective"] not in ("branin", "sphere"):
            raise ConfigError("target.objective", "must be 'branin' or 'sphere'")

    dataset = _expect(raw, "dataset", dict, default={})
    needs_data = mode == "model-selection" or (mode == "hpo" and target.get("learner"))
    if needs_data:
        source = _expect(dataset, "source", str, default="builtin", path="dataset")
        if source not in ("builtin", "csv"):
            raise ConfigError("dataset.source", f"must be 'builtin' or 'csv', got {source!r}")
        if source == "builtin":
            _expect(dataset, "name", str, required=True, path="dataset")
        else:
            _expect(dataset, "path", str, required=True, path="dataset")
        folds = _expect(dataset, "cv_folds", int, default=3, path="dataset")
        if folds < 2:
            raise ConfigError("dataset.cv_folds", f"must be >= 2, got {folds}")

    # Execution-only settings (parallelism, output path) stay out of the echo
    # so traces are byte-identical whenever the results are.
    effective = {
        "run": {
            "mode": mode,
            "rounds": rounds,
            "ucb_c": ucb_c,
            "seeds": {"filter": filter_seed, "sampling": sampling_seed, "data": data_seed},
            "timeout": timeout,
            "partition_k": partition_k,
        },
        "budget": {"mode": budget.mode, "amount": budget.amount},
        "tpe": {
            "gamma": tpe_params.gamma,
            "n_candidates": tpe_params.n_candidates,
            "min_observations": tpe_params.min_observations,
            "bandwidth_floor": tpe_params.bandwidth_floor,
            "prior_weight": tpe_params.prior_weight,
        },
        "learners": list(learners),
        "target": dict(target),
        "dataset": dict(dataset),
    }
    return RunConfig(
        mode=mode,
        budget=budget,
        rounds=rounds,
        ucb_c=ucb_c,
        filter_seed=filter_seed,
        sampling_seed=sampling_seed,
        data_seed=data_seed,
        tpe_params=tpe_params,
        timeout=timeout,
        parallelism=parallelism,
        output=output,
        partition_k=partition_k,
        learners=tuple(learners),
        target=dict(target),
        dataset=dict(dataset),
        effective=effective,
    )


# ---------------------------------------------------------------------------
# Arm construction
# ---------------------------------------------------------------------------

def _space_from_config(entries, field: str) -> SearchSpace:
    if not isinstance(entries, list) or not entries:
        raise ConfigError(field, "expected a non-empty list of parameter declarations")
    domains = {}
    for i, entry in enumerate(entries):
        label = f"{field}[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(label, "expected an object")
        name = _expect(entry, "name", str, required=True, path=label)
        kind = _expect(entry, "type", str, required=True, path=label)
        try:
            if kind == "continuous":
                domains[name] = Continuous(
                    float(_expect(entry, "low", (int, float), required=True, path=label)),
                    float(_expect(entry, "high", (int, float), required=True, path=label)),
                    _expect(entry, "scale", str, default="linear", path=label),
                )
            elif kind == "integer":
                domains[name] = Integer(
                    _expect(entry, "low", int, required=True, path=label),
                    _expect(entry, "high", int, required=True, path=label),
                )
            elif kind == "categorical":
                domains[name] = Categorical(tuple(_expect(entry, "values", list, required=True, path=label)))
            else:
                raise ConfigError(f"{label}.type", f"unknown parameter type {kind!r}")
        except SpaceError as exc:
            raise ConfigError(label, str(exc))
    try:
        return SearchSpace(domains)
    except SpaceError as exc:
        raise ConfigError(field, str(exc))


def _resolve_dataset(config: RunConfig):
    section = config.dataset
    if section.get("source", "builtin") == "csv":
        dataset = load_csv(section["path"])
    else:
        params = {
            k: v
            for k, v in section.items()
            if k not in ("source", "name", "n", "cv_folds")
        }
        dataset = make_dataset(
            section["name"],
            int(section.get("n", 600)),
            seed=config.data_seed,
            **params,
        )
    cv = CvSpec(folds=int(section.get("cv_folds", 3)), seed=config.data_seed)
    if cv.folds > len(dataset):
        raise ConfigError("dataset.cv_folds", f"more folds than samples ({cv.folds} > {len(dataset)})")
    return dataset, cv


def _sphere_upper_bound(space: SearchSpace) -> float:
    total = 0.0
    for name, domain in space.params.items():
        if isinstance(domain, (Continuous, Integer)):
            total += max(domain.low ** 2, domain.high ** 2)
        else:
            try:
                total += max(float(v) ** 2 for v in domain.values)
            except (TypeError, ValueError):
                raise ConfigError(
                    "target.bounds",
                    f"cannot derive bounds over non-numeric parameter {name!r}; declare bounds explicitly",
                )
    return float(total)


def _hpo_space(config: RunConfig) -> SearchSpace:
    """Resolve only the hpo search space; partition listing needs no objective."""
    target = config.target
    if target.get("learner"):
        return get_learner(target["learner"]).space
    if target.get("space"):
        return _space_from_config(target["space"], "target.space")
    if target["objective"] == "branin":
        return BRANIN_SPACE
    return sphere_space(int(target.get("dim", 2)))


def _hpo_target(config: RunConfig):
    """Resolve the hpo search space and the shared evaluable."""
    target = config.target
    if target.get("learner"):
        learner = get_learner(target["learner"])
        dataset, cv = _resolve_dataset(config)
        return learner.space, cv_evaluable(learner, dataset, cv)
    space = _hpo_space(config)
    bounds = target.get("bounds")
    if bounds is not None and (not isinstance(bounds, list) or len(bounds) != 2):
        raise ConfigError("target.bounds", "expected [low, high]")
    if target["objective"] == "branin":
        low, high = bounds if bounds else (0.0, 300.0)
        return space, branin_evaluable(float(low), float(high))
    low, high = bounds if bounds else (0.0, _sphere_upper_bound(space))
    evaluable = Evaluable(
        fn=lambda cfg: sphere([cfg[name] for name in space.params]),
        low=float(low),
        high=float(high),
        orientation="minimize",
        name="sphere",
    )
    return space, evaluable


def build_arms(config: RunConfig) -> list[bandit.Arm]:
    if config.mode == "model-selection":
        dataset, cv = _resolve_dataset(config)
        arms = []
        for name in config.learners:
            learner = get_learner(name)
            arms.append(
                bandit.Arm(
                    id=learner.name,
                    evaluable=cv_evaluable(learner, dataset, cv),
                    tpe=TpeModel(learner.space, config.tpe_params),
                )
            )
        return arms
    space, evaluable = _hpo_target(config)
    subs = partition(space, config.partition_k)
    width = len(str(len(subs) - 1)) if len(subs) > 1 else 1
    return [
        bandit.Arm(
            id=f"sub-{sub.index:0{width}d}",
            evaluable=evaluable,
            tpe=TpeModel(sub, config.tpe_params),
        )
        for sub in subs
    ]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _run_id(effective: dict) -> str:
    blob = json.dumps(effective, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def cmd_run(args) -> int:
    config = validate_config(apply_overrides(load_raw_config(args.config), args))
    arms = build_arms(config)
    bandit_config = bandit.BanditConfig(
        budget=config.budget,
        rounds=config.rounds,
        ucb_c=config.ucb_c,
        filter_seed=config.filter_seed,
        sampling_seed=config.sampling_seed,
        timeout=config.timeout,
        parallelism=config.parallelism,
        mode=config.mode,
        partition_k=config.partition_k if config.mode == "hpo" else None,
    )
    run_id = _run_id(config.effective)
    log.info("run %s: %d arms, budget %s %s", run_id, len(arms), config.budget.amount, config.budget.mode)
    with trace.TraceWriter(config.output, run_id) as writer:
        writer.write("header", {"schema_version": trace.SCHEMA_VERSION, "config": config.effective})
        try:
            result = bandit.run(
                bandit_config,
                arms,
                sink=lambda kind, payload: writer.write(kind, payload),
            )
        except bandit.NoSuccessfulEvaluationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        writer.write("final", {
            "arm": result.arm_id,
            "config": result.config,
            "reward": result.reward,
            "total_cost": result.total_cost,
        })
    print(f"best arm: {result.arm_id}")
    print(f"best configuration: {json.dumps(result.config, sort_keys=True)}")
    print(f"best reward: {result.reward:.6f}")
    print(f"trace: {config.output}")
    return 0


def cmd_partition(args) -> int:
    config = validate_config(apply_overrides(load_raw_config(args.config), args))
    if config.mode != "hpo":
        raise ConfigError("run.mode", "partition listing requires hpo mode")
    space = _hpo_space(config)
    subs = partition(space, config.partition_k)
    for sub in subs:
        print(f"{sub.index}: {sub.describe()}")
    print(f"total: {len(subs)} sub-spaces ({len(space.params)} parameters, k={config.partition_k})")
    return 0


def cmd_report(args) -> int:
    try:
        events = trace.read_trace(args.trace)
    except (OSError, trace.TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    evaluations = [e for e in events if e["event"] == "evaluation"]
    rounds = [e for e in events if e["event"] == "round"]
    finals = [e for e in events if e["event"] == "final"]
    if not evaluations:
        print("error: trace contains no evaluations", file=sys.stderr)
        return 1
    for report in rounds:
        per_round = [e for e in evaluations if e["round"] == report["round"]]
        reported = sum(a["evaluations"] for a in report["arms"])
        if reported != len(per_round):
            print(
                f"error: round {report['round']} reports {reported} evaluations, trace has {len(per_round)}",
                file=sys.stderr,
            )
            return 1
        print(f"round {report['round']}: {len(report['arms'])} arms, {len(report['survivors'])} advance")
        for arm in report["arms"]:
            ucb = "-" if arm["ucb"] is None else f"{arm['ucb']:.4f}"
            print(
                f"  {arm['arm']:<24s} ucb={ucb:<8s} p={arm['advance_probability']:.3f} "
                f"allocated={arm['allocated']:g} evaluations={arm['evaluations']}"
            )
    curve = trace.best_so_far_curve(events)
    csv_path = args.csv or f"{args.trace}.curve.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cumulative_cost", "best_reward"])
        writer.writerows(curve)
    print(f"curve: {csv_path} ({len(curve)} rows)")
    if finals:
        final = finals[0]
        print(f"final: arm={final['arm']} reward={final['reward']:.6f} total_cost={final['total_cost']:g}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boasf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_override_flags(p):
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--budget", type=float, help="total resource amount")
        p.add_argument("--budget-mode", dest="budget_mode", choices=(SECONDS, COUNT))
        p.add_argument("--rounds", type=int)
        p.add_argument("--ucb-c", dest="ucb_c", type=float)
        p.add_argument("--partition-k", dest="partition_k", type=int)
        p.add_argument("--seed", type=int, help="sets filter/sampling/data seeds to seed, seed+1, seed+2")
        p.add_argument("--timeout", type=float, help="per-evaluation cap in seconds")
        p.add_argument("--output", help="trace output path")
        p.add_argument("--parallelism", type=int, help="max concurrent arm workers")

    run_p = sub.add_parser("run", help="execute a schedule and write a trace")
    add_override_flags(run_p)
    run_p.set_defaults(fn=cmd_run)

    part_p = sub.add_parser("partition", help="list the sub-space arms of an hpo config")
    add_override_flags(part_p)
    part_p.set_defaults(fn=cmd_partition)

    report_p = sub.add_parser("report", help="summarize a trace and write the anytime curve")
    report_p.add_argument("trace", help="path to a JSON Lines trace")
    report_p.add_argument("--csv", help="curve output path (default: TRACE.curve.csv)")
    report_p.set_defaults(fn=cmd_report)
    return parser


def _setup_logging():
    level = os.environ.get("BOASF_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SpaceError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
