"""Bandit-scheduled black-box optimization.

Tree Parzen Estimator proposals nested inside an adaptive successive
filtering scheduler: arms are scored with a Gaussian upper confidence bound,
filtered probabilistically via min-max scaling, and allocated the next
round's resources through a softmax over their scores.
"""

from .space import (
    Categorical,
    Configuration,
    Continuous,
    Integer,
    SearchSpace,
    SpaceError,
    SubSpace,
    contains,
    partition,
    sample_uniform,
)
from .tpe import (
    Observation,
    ParzenDensity,
    TpeModel,
    TpeParams,
    fit_density,
    split_observations,
    suggest,
    update,
)
from .evaluator import (
    Evaluable,
    EvaluationRecord,
    NullClock,
    RealClock,
    ResourceBudget,
    SimulatedClock,
    evaluate,
    run_arm_round,
)
from .bandit import (
    Arm,
    BanditConfig,
    BestResult,
    NoSuccessfulEvaluationError,
    RoundReport,
    advance_probabilities,
    allocate_resources,
    filter_arms,
    gaussian_ucb,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "Arm",
    "BanditConfig",
    "BestResult",
    "Categorical",
    "Configuration",
    "Continuous",
    "Evaluable",
    "EvaluationRecord",
    "Integer",
    "NoSuccessfulEvaluationError",
    "NullClock",
    "Observation",
    "ParzenDensity",
    "RealClock",
    "ResourceBudget",
    "RoundReport",
    "SearchSpace",
    "SimulatedClock",
    "SpaceError",
    "SubSpace",
    "TpeModel",
    "TpeParams",
    "advance_probabilities",
    "allocate_resources",
    "contains",
    "evaluate",
    "filter_arms",
    "fit_density",
    "gaussian_ucb",
    "partition",
    "run",
    "run_arm_round",
    "sample_uniform",
    "split_observations",
    "suggest",
    "update",
]
