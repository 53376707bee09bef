"""Tree Parzen Estimator: density-ratio proposals for one arm.

Observations (configuration, loss) are split at the gamma quantile into a
good set and a bad set. A Parzen density is fitted to each set per
parameter: a truncated-Gaussian kernel mixture over the (internal) interval
for numeric parameters, a smoothed frequency table for categorical ones.
The next configuration is chosen by drawing candidates from the good
density l and keeping the candidate that maximizes l(x)/g(x), which ranks
candidates exactly as expected improvement would.

Losses are minimized here; callers that maximize a reward in [0, 1] feed
``loss = 1 - reward``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .space import (
    Categorical,
    Configuration,
    Continuous,
    Integer,
    SearchSpace,
    SpaceError,
    SubSpace,
    sample_uniform,
)

__all__ = [
    "Observation",
    "TpeParams",
    "TpeModel",
    "ParzenDensity",
    "split_observations",
    "fit_density",
    "suggest",
    "update",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Observation:
    """One evaluated configuration with its loss (lower is better)."""

    config: Configuration
    loss: float

    def __post_init__(self):
        if not math.isfinite(self.loss):
            raise ValueError(f"observation loss must be finite, got {self.loss!r}")


@dataclass(frozen=True)
class TpeParams:
    """Tunables of the estimator; defaults follow common TPE practice."""

    gamma: float = 0.25
    n_candidates: int = 24
    min_observations: int = 3
    bandwidth_floor: float = 0.01
    prior_weight: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.n_candidates < 1:
            raise ValueError(f"n_candidates must be >= 1, got {self.n_candidates}")
        if self.min_observations < 2:
            raise ValueError(f"min_observations must be >= 2, got {self.min_observations}")
        if self.bandwidth_floor <= 0.0:
            raise ValueError(f"bandwidth_floor must be > 0, got {self.bandwidth_floor}")
        if self.prior_weight <= 0.0:
            raise ValueError(f"prior_weight must be > 0, got {self.prior_weight}")


@dataclass
class TpeModel:
    """Per-arm observation history plus the space proposals are drawn from.

    Single-writer: suggest/update calls for one model must be serialized.
    Distinct models are independent and may be driven concurrently.
    """

    space: SearchSpace | SubSpace
    params: TpeParams = field(default_factory=TpeParams)
    observations: list[Observation] = field(default_factory=list)

    @property
    def sampling_space(self) -> SearchSpace:
        return self.space.space if isinstance(self.space, SubSpace) else self.space

    def __post_init__(self):
        for obs in self.observations:
            self.sampling_space.validate(obs.config)


def split_observations(
    obs: list[Observation], gamma: float
) -> tuple[list[Observation], list[Observation]]:
    """Split into (good, bad): good holds the ceil(gamma * n) lowest losses.

    At least one observation is always good. Ties at the threshold are broken
    by insertion order, earlier observations going to the good side.
    """
    if not obs:
        raise ValueError("split_observations requires at least one observation")
    n_good = max(1, math.ceil(gamma * len(obs)))
    # Stable sort keeps insertion order among equal losses.
    order = sorted(range(len(obs)), key=lambda i: obs[i].loss)
    good_idx = set(order[:n_good])
    good = [o for i, o in enumerate(obs) if i in good_idx]
    bad = [o for i, o in enumerate(obs) if i not in good_idx]
    return good, bad


# ---------------------------------------------------------------------------
# One-dimensional densities
# ---------------------------------------------------------------------------

class _NumericParzen:
    """Truncated-Gaussian kernel mixture plus a uniform prior component.

    Operates in the parameter's internal coordinates (log domain for
    log-scale parameters). With no kernels the density is exactly the
    uniform prior; otherwise each kernel has weight 1 and the prior has
    weight ``prior_weight``, normalized.
    """

    def __init__(self, lo, hi, locs, bandwidths, prior_weight, domain):
        self.lo = float(lo)
        self.hi = float(hi)
        self.locs = np.asarray(locs, dtype=float)
        self.bws = np.asarray(bandwidths, dtype=float)
        self.domain = domain
        n = len(self.locs)
        total = n + prior_weight
        self.prior_prob = prior_weight / total
        self.kernel_prob = (1.0 / total) if n else 0.0
        if n:
            a = (self.lo - self.locs) / self.bws
            b = (self.hi - self.locs) / self.bws
            self._cdf_lo = ndtr(a)
            self._cdf_hi = ndtr(b)
            self._norm = np.maximum(self._cdf_hi - self._cdf_lo, 1e-300)

    def pdf(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        out = np.full(values.shape, self.prior_prob / (self.hi - self.lo))
        if len(self.locs):
            z = (values[None, :] - self.locs[:, None]) / self.bws[:, None]
            kernels = np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / (self.bws[:, None] * self._norm[:, None])
            out = out + self.kernel_prob * kernels.sum(axis=0)
        return out

    def log_pdf(self, values: np.ndarray) -> np.ndarray:
        return np.log(self.pdf(values))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        n = len(self.locs)
        out = np.empty(size, dtype=float)
        if n == 0:
            out[:] = rng.uniform(self.lo, self.hi, size)
            return out
        comp = rng.random(size)
        from_prior = comp < self.prior_prob
        out[from_prior] = rng.uniform(self.lo, self.hi, int(from_prior.sum()))
        idx = np.minimum(((comp - self.prior_prob) / self.kernel_prob).astype(int), n - 1)
        kernel_mask = ~from_prior
        if kernel_mask.any():
            sel = idx[kernel_mask]
            u = self._cdf_lo[sel] + rng.random(int(kernel_mask.sum())) * self._norm[sel]
            x = self.locs[sel] + self.bws[sel] * ndtri(u)
            out[kernel_mask] = np.clip(x, self.lo, self.hi)
        return out

    def to_external(self, internal: np.ndarray) -> np.ndarray:
        if isinstance(self.domain, Continuous) and self.domain.scale == "log":
            return np.exp(internal)
        if isinstance(self.domain, Integer):
            return np.clip(np.rint(internal), self.domain.low, self.domain.high)
        return internal


class _CategoricalParzen:
    """Smoothed frequency table: P(v) = (count(v) + w) / (n + w * |values|)."""

    def __init__(self, values, counts, prior_weight):
        self.values = tuple(values)
        counts = np.asarray(counts, dtype=float)
        smoothed = counts + prior_weight
        self.probs = smoothed / smoothed.sum()
        self._log_probs = np.log(self.probs)
        self._index = {v: i for i, v in enumerate(self.values)}

    def log_pdf(self, indices: np.ndarray) -> np.ndarray:
        return self._log_probs[indices]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cum = np.cumsum(self.probs)
        return np.searchsorted(cum, rng.random(size), side="right").clip(0, len(self.values) - 1)


class ParzenDensity:
    """Product of per-parameter one-dimensional densities."""

    def __init__(self, space: SearchSpace, components: dict):
        self.space = space
        self.components = components

    def sample_arrays(self, rng: np.random.Generator, size: int) -> dict[str, np.ndarray]:
        """Per-parameter draws in scoring coordinates (internal for numeric
        parameters after integer rounding, value index for categoricals)."""
        out = {}
        for name, comp in self.components.items():
            draws = comp.sample(rng, size)
            if isinstance(comp, _NumericParzen) and isinstance(comp.domain, Integer):
                draws = comp.to_external(draws)
            out[name] = draws
        return out

    def log_pdf_arrays(self, arrays: dict[str, np.ndarray]) -> np.ndarray:
        total = None
        for name, comp in self.components.items():
            part = comp.log_pdf(arrays[name])
            total = part if total is None else total + part
        return total

    def configuration(self, arrays: dict[str, np.ndarray], i: int) -> Configuration:
        config: Configuration = {}
        for name, comp in self.components.items():
            value = arrays[name][i]
            if isinstance(comp, _CategoricalParzen):
                config[name] = comp.values[int(value)]
            elif isinstance(comp.domain, Integer):
                config[name] = int(value)
            else:
                config[name] = float(comp.to_external(np.asarray([value]))[0])
        return config


def _numeric_internal(domain: Continuous | Integer, value) -> float:
    if isinstance(domain, Continuous):
        return domain.to_internal(float(value))
    return float(value)


def _bandwidths(positions: np.ndarray, width: float, floor: float) -> np.ndarray:
    """Per-kernel bandwidth: distance to the nearest neighboring observation,
    floored at ``floor * width``; a lone kernel gets the full domain width."""
    n = len(positions)
    if n == 1:
        return np.array([max(width, floor * width)])
    order = np.argsort(positions, kind="stable")
    sorted_pos = positions[order]
    gaps = np.diff(sorted_pos)
    nn = np.empty(n)
    nn[0] = gaps[0]
    nn[-1] = gaps[-1]
    if n > 2:
        nn[1:-1] = np.minimum(gaps[:-1], gaps[1:])
    out = np.empty(n)
    out[order] = nn
    return np.maximum(out, floor * width)


def fit_density(
    obs: list[Observation], space: SearchSpace | SubSpace, params: TpeParams
) -> ParzenDensity:
    """Fit the per-parameter Parzen mixture to the given observations.

    An empty observation list yields the uniform prior density over the
    space. Observations outside the space raise SpaceError.
    """
    if isinstance(space, SubSpace):
        space = space.space
    for o in obs:
        space.validate(o.config)
    components: dict = {}
    for name, domain in space.params.items():
        if isinstance(domain, Categorical):
            counts = np.zeros(len(domain.values))
            index = {v: i for i, v in enumerate(domain.values)}
            for o in obs:
                counts[index[o.config[name]]] += 1.0
            components[name] = _CategoricalParzen(domain.values, counts, params.prior_weight)
            continue
        if isinstance(domain, Continuous):
            lo, hi = domain.internal_bounds()
        else:
            lo, hi = float(domain.low), float(domain.high)
        width = hi - lo
        positions = np.array([_numeric_internal(domain, o.config[name]) for o in obs])
        bws = _bandwidths(positions, width, params.bandwidth_floor) if len(positions) else np.empty(0)
        components[name] = _NumericParzen(lo, hi, positions, bws, params.prior_weight, domain)
    return ParzenDensity(space, components)


# ---------------------------------------------------------------------------
# Model operations
# ---------------------------------------------------------------------------

def suggest(model: TpeModel, rng: np.random.Generator) -> Configuration:
    """Propose the next configuration to evaluate.

    Below ``min_observations`` this is a uniform draw (prior exploration);
    afterwards ``n_candidates`` samples are drawn from the good-set density l
    and the candidate maximizing l(x)/g(x) is returned. The result always
    lies inside the model's space.
    """
    space = model.sampling_space
    if len(model.observations) < model.params.min_observations:
        return sample_uniform(space, rng)
    good, bad = split_observations(model.observations, model.params.gamma)
    l_density = fit_density(good, space, model.params)
    g_density = fit_density(bad, space, model.params)
    arrays = l_density.sample_arrays(rng, model.params.n_candidates)
    scores = l_density.log_pdf_arrays(arrays) - g_density.log_pdf_arrays(arrays)
    best = int(np.argmax(scores))
    config = l_density.configuration(arrays, best)
    space.validate(config)
    return config


def update(model: TpeModel, config: Configuration, loss: float) -> None:
    """Append one observation; rejects non-finite losses and foreign configs."""
    if not math.isfinite(loss):
        raise ValueError(f"loss must be finite, got {loss!r}")
    model.sampling_space.validate(config)
    model.observations.append(Observation(dict(config), float(loss)))
