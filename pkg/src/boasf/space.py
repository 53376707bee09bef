"""Search-space primitives: parameter domains, configurations, and sub-space partitioning.

A search space is an ordered mapping of named parameter domains (continuous,
integer, or categorical). Partitioning splits each domain into at most k
pieces and crosses them into disjoint sub-spaces whose union covers the
original space, so a single optimization problem can be turned into a finite
set of independent arms.

Interval ownership convention: continuous pieces are half-open [lo, hi)
except the last piece of each parameter, which is closed at the parent's
upper bound. This guarantees that every valid configuration falls in exactly
one sub-space of a partition.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

__all__ = [
    "SpaceError",
    "Continuous",
    "Integer",
    "Categorical",
    "Domain",
    "SearchSpace",
    "Configuration",
    "SubSpace",
    "ContinuousSlice",
    "IntegerSlice",
    "CategoricalSubset",
    "sample_uniform",
    "partition",
    "contains",
]

Value = Union[float, int, str]
Configuration = dict[str, Value]

_SCALES = ("linear", "log")


class SpaceError(ValueError):
    """Invalid domain, space, restriction, or configuration."""


@dataclass(frozen=True)
class Continuous:
    """Real-valued domain, optionally sampled/split on a logarithmic scale."""

    low: float
    high: float
    scale: str = "linear"

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high)):
            raise SpaceError(f"continuous bounds must be finite, got ({self.low}, {self.high})")
        if not self.low < self.high:
            raise SpaceError(f"continuous domain requires low < high, got ({self.low}, {self.high})")
        if self.scale not in _SCALES:
            raise SpaceError(f"unknown scale {self.scale!r}, expected one of {_SCALES}")
        if self.scale == "log" and self.low <= 0:
            raise SpaceError(f"log scale requires low > 0, got low={self.low}")

    @property
    def cardinality(self) -> float:
        return math.inf

    def contains(self, value: Value) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        return self.low <= float(value) <= self.high

    # Internal coordinates: the scale on which uniform sampling, splitting,
    # and kernel fitting operate (identity for linear, natural log otherwise).
    def to_internal(self, value: float) -> float:
        return math.log(value) if self.scale == "log" else float(value)

    def from_internal(self, t: float) -> float:
        return math.exp(t) if self.scale == "log" else float(t)

    def internal_bounds(self) -> tuple[float, float]:
        return self.to_internal(self.low), self.to_internal(self.high)


@dataclass(frozen=True)
class Integer:
    """Bounded integer domain, inclusive at both ends."""

    low: int
    high: int

    def __post_init__(self):
        if not (isinstance(self.low, int) and isinstance(self.high, int)):
            raise SpaceError(f"integer bounds must be ints, got ({self.low!r}, {self.high!r})")
        if not self.low < self.high:
            raise SpaceError(f"integer domain requires low < high, got ({self.low}, {self.high})")

    @property
    def cardinality(self) -> int:
        return self.high - self.low + 1

    def contains(self, value: Value) -> bool:
        if isinstance(value, bool):
            return False
        if isinstance(value, float) and not value.is_integer():
            return False
        if not isinstance(value, (int, float)):
            return False
        return self.low <= int(value) <= self.high


@dataclass(frozen=True)
class Categorical:
    """Ordered set of distinct tokens; order is preserved by splitting."""

    values: tuple

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(values))
        if not self.values:
            raise SpaceError("categorical domain must have at least one value")
        if len(set(self.values)) != len(self.values):
            raise SpaceError(f"categorical values must be distinct, got {self.values}")

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def contains(self, value: Value) -> bool:
        return value in self.values


Domain = Union[Continuous, Integer, Categorical]


@dataclass(frozen=True)
class SearchSpace:
    """Ordered mapping of parameter names to domains.

    Treated as immutable after construction; instances are safe to share
    between concurrent workers.
    """

    params: dict[str, Domain]

    def __post_init__(self):
        if not self.params:
            raise SpaceError("search space must declare at least one parameter")
        for name, domain in self.params.items():
            if not isinstance(name, str) or not name:
                raise SpaceError(f"parameter names must be non-empty strings, got {name!r}")
            if not isinstance(domain, (Continuous, Integer, Categorical)):
                raise SpaceError(f"parameter {name!r} has unsupported domain {domain!r}")

    @property
    def names(self) -> list[str]:
        return list(self.params)

    def validate(self, config: Configuration) -> None:
        """Raise SpaceError unless config names and values match this space exactly."""
        if set(config) != set(self.params):
            missing = set(self.params) - set(config)
            extra = set(config) - set(self.params)
            raise SpaceError(f"configuration keys mismatch (missing={sorted(missing)}, extra={sorted(extra)})")
        for name, domain in self.params.items():
            if not domain.contains(config[name]):
                raise SpaceError(f"value {config[name]!r} outside domain of parameter {name!r}")


# ---------------------------------------------------------------------------
# Sub-spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuousSlice:
    """[low, high) restriction of a continuous parameter; closed at high for
    the final slice of a partition."""

    low: float
    high: float
    closed_high: bool
    scale: str = "linear"

    def contains(self, value: Value) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        v = float(value)
        if self.closed_high:
            return self.low <= v <= self.high
        return self.low <= v < self.high

    def describe(self) -> str:
        closer = "]" if self.closed_high else ")"
        return f"[{self.low:g}, {self.high:g}{closer}"


@dataclass(frozen=True)
class IntegerSlice:
    """Contiguous inclusive integer range; may be a single value."""

    low: int
    high: int

    def contains(self, value: Value) -> bool:
        if isinstance(value, bool):
            return False
        if isinstance(value, float) and not value.is_integer():
            return False
        if not isinstance(value, (int, float)):
            return False
        return self.low <= int(value) <= self.high

    def describe(self) -> str:
        return f"[{self.low} .. {self.high}]"


@dataclass(frozen=True)
class CategoricalSubset:
    """Order-preserving subset of a categorical domain."""

    values: tuple

    def contains(self, value: Value) -> bool:
        return value in self.values

    def describe(self) -> str:
        return "{" + ", ".join(repr(v) for v in self.values) + "}"


Restriction = Union[ContinuousSlice, IntegerSlice, CategoricalSubset]


@dataclass(frozen=True)
class SubSpace:
    """Per-parameter restriction of a parent space.

    A sub-space behaves as a search space in its own right (see ``space``)
    while keeping the half-open boundary bookkeeping needed for the
    disjoint-cover guarantee of ``partition``.
    """

    parent: SearchSpace
    restrictions: dict[str, Restriction]
    index: int = 0

    def __post_init__(self):
        if set(self.restrictions) != set(self.parent.params):
            raise SpaceError("sub-space restrictions must cover exactly the parent parameters")
        for name, restriction in self.restrictions.items():
            domain = self.parent.params[name]
            if isinstance(restriction, ContinuousSlice):
                if not isinstance(domain, Continuous):
                    raise SpaceError(f"restriction type mismatch for {name!r}")
                if restriction.low < domain.low or restriction.high > domain.high:
                    raise SpaceError(f"restriction for {name!r} escapes parent domain")
            elif isinstance(restriction, IntegerSlice):
                if not isinstance(domain, Integer):
                    raise SpaceError(f"restriction type mismatch for {name!r}")
                if restriction.low < domain.low or restriction.high > domain.high:
                    raise SpaceError(f"restriction for {name!r} escapes parent domain")
            elif isinstance(restriction, CategoricalSubset):
                if not isinstance(domain, Categorical):
                    raise SpaceError(f"restriction type mismatch for {name!r}")
                if not set(restriction.values) <= set(domain.values):
                    raise SpaceError(f"restriction for {name!r} escapes parent domain")
            else:
                raise SpaceError(f"unsupported restriction {restriction!r}")

    @cached_property
    def space(self) -> SearchSpace:
        """The sub-space materialized as a plain SearchSpace.

        Singleton integer slices become one-value categorical domains so the
        result is always a valid space (numeric domains require low < high).
        """
        domains: dict[str, Domain] = {}
        for name, restriction in self.restrictions.items():
            if isinstance(restriction, ContinuousSlice):
                domains[name] = Continuous(restriction.low, restriction.high, restriction.scale)
            elif isinstance(restriction, IntegerSlice):
                if restriction.low == restriction.high:
                    domains[name] = Categorical((restriction.low,))
                else:
                    domains[name] = Integer(restriction.low, restriction.high)
            else:
                domains[name] = Categorical(restriction.values)
        return SearchSpace(domains)

    def contains(self, config: Configuration) -> bool:
        """True iff every value of config lies inside its restriction.

        Raises SpaceError when the configuration names do not match the
        parent space; out-of-restriction values simply yield False.
        """
        if set(config) != set(self.restrictions):
            raise SpaceError("configuration keys do not match the sub-space parameters")
        return all(r.contains(config[name]) for name, r in self.restrictions.items())

    def describe(self) -> str:
        inner = ", ".join(f"{name}: {r.describe()}" for name, r in self.restrictions.items())
        return f"[{inner}]"


def contains(sub: SubSpace, config: Configuration) -> bool:
    return sub.contains(config)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def sample_uniform(space: SearchSpace | SubSpace, rng: np.random.Generator) -> Configuration:
    """Draw one configuration uniformly from the space.

    Logarithmic continuous parameters are uniform in the log domain.
    Parameters are consumed from the generator in declaration order, so a
    fixed seed yields an identical configuration.
    """
    if isinstance(space, SubSpace):
        space = space.space
    config: Configuration = {}
    for name, domain in space.params.items():
        if isinstance(domain, Continuous):
            lo, hi = domain.internal_bounds()
            config[name] = domain.from_internal(float(rng.uniform(lo, hi)))
        elif isinstance(domain, Integer):
            config[name] = int(rng.integers(domain.low, domain.high + 1))
        else:
            config[name] = domain.values[int(rng.integers(len(domain.values)))]
    return config


def _split_chunks(items: tuple, k: int) -> list[tuple]:
    # Near-equal contiguous chunks, larger chunks first.
    n_chunks = min(k, len(items))
    base, rem = divmod(len(items), n_chunks)
    sizes = [base + 1] * rem + [base] * (n_chunks - rem)
    out, start = [], 0
    for size in sizes:
        out.append(items[start:start + size])
        start += size
    return out


def _domain_pieces(domain: Domain, k: int) -> list[Restriction]:
    if isinstance(domain, Continuous):
        lo, hi = domain.internal_bounds()
        edges = [domain.from_internal(t) for t in np.linspace(lo, hi, k + 1)]
        edges[0], edges[-1] = domain.low, domain.high
        return [
            ContinuousSlice(edges[i], edges[i + 1], closed_high=(i == k - 1), scale=domain.scale)
            for i in range(k)
        ]
    if isinstance(domain, Integer):
        values = tuple(range(domain.low, domain.high + 1))
        return [IntegerSlice(chunk[0], chunk[-1]) for chunk in _split_chunks(values, k)]
    return [CategoricalSubset(chunk) for chunk in _split_chunks(domain.values, k)]


def partition(space: SearchSpace, k: int) -> list[SubSpace]:
    """Split each parameter into at most k pieces and cross them into sub-spaces.

    Continuous domains split into k equal-width intervals (equal in the log
    domain for log-scale parameters); integer and categorical domains split
    into min(k, cardinality) near-equal contiguous chunks preserving order.
    The resulting sub-spaces are pairwise disjoint and cover the space; for n
    unbounded (continuous) parameters the count is k**n.
    """
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise SpaceError(f"partition requires an integer k >= 1, got {k!r}")
    per_param = [_domain_pieces(domain, k) for domain in space.params.values()]
    names = space.names
    subs = []
    for index, combo in enumerate(itertools.product(*per_param)):
        subs.append(SubSpace(space, dict(zip(names, combo)), index=index))
    return subs
