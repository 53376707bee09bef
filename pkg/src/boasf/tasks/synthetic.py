"""Synthetic benchmark objectives and planted bandit arms."""

from __future__ import annotations

import math

import numpy as np

from ..evaluator import Evaluable
from ..space import Continuous, SearchSpace

__all__ = [
    "branin",
    "BRANIN_SPACE",
    "branin_evaluable",
    "sphere",
    "sphere_space",
    "planted_bernoulli_arm",
    "bernoulli_evaluable",
]

_BRANIN_B = 5.1 / (4.0 * math.pi ** 2)
_BRANIN_C = 5.0 / math.pi
_BRANIN_T = 1.0 / (8.0 * math.pi)


def branin(x1: float, x2: float) -> float:
    """Two-dimensional multimodal benchmark on [-5, 10] x [0, 15];
    global minimum approximately 0.397887."""
    return float(
        (x2 - _BRANIN_B * x1 ** 2 + _BRANIN_C * x1 - 6.0) ** 2
        + 10.0 * (1.0 - _BRANIN_T) * math.cos(x1)
        + 10.0
    )


BRANIN_SPACE = SearchSpace({
    "x1": Continuous(-5.0, 10.0),
    "x2": Continuous(0.0, 15.0),
})


def branin_evaluable(low: float = 0.0, high: float = 300.0) -> Evaluable:
    return Evaluable(
        fn=lambda cfg: branin(cfg["x1"], cfg["x2"]),
        low=low,
        high=high,
        orientation="minimize",
        name="branin",
    )


def sphere(x) -> float:
    """Sum of squares; global minimum 0 at the origin."""
    arr = np.asarray(x, dtype=float)
    return float((arr * arr).sum())


def sphere_space(dim: int, low: float = -5.0, high: float = 5.0) -> SearchSpace:
    if dim < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {dim}")
    return SearchSpace({f"x{i + 1}": Continuous(low, high) for i in range(dim)})


def planted_bernoulli_arm(mean: float, rng: np.random.Generator) -> int:
    """One coin flip: 1 with the planted probability, else 0."""
    if not 0.0 <= mean <= 1.0:
        raise ValueError(f"planted mean must lie in [0, 1], got {mean}")
    return int(rng.random() < mean)


def bernoulli_evaluable(mean: float, rng: np.random.Generator, name: str = "") -> Evaluable:
    """A planted arm as an evaluable; the configuration is ignored."""
    return Evaluable(
        fn=lambda _cfg: float(planted_bernoulli_arm(mean, rng)),
        low=0.0,
        high=1.0,
        orientation="maximize",
        name=name or f"bernoulli-{mean:g}",
    )
