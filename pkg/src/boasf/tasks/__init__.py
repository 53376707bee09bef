"""Built-in desk-scale objectives: datasets, learners, and synthetic functions."""

from .datasets import (
    CvSpec,
    Dataset,
    balanced_accuracy,
    cv_evaluable,
    cv_reward,
    kfold_split,
    load_csv,
    make_dataset,
    select_best_baseline,
    stratified_kfold,
)
from .learners import Learner, builtin_learners, get_learner
from .synthetic import (
    BRANIN_SPACE,
    bernoulli_evaluable,
    branin,
    branin_evaluable,
    planted_bernoulli_arm,
    sphere,
    sphere_space,
)

__all__ = [
    "BRANIN_SPACE",
    "CvSpec",
    "Dataset",
    "Learner",
    "balanced_accuracy",
    "bernoulli_evaluable",
    "branin",
    "branin_evaluable",
    "builtin_learners",
    "cv_evaluable",
    "cv_reward",
    "get_learner",
    "kfold_split",
    "load_csv",
    "make_dataset",
    "planted_bernoulli_arm",
    "select_best_baseline",
    "sphere",
    "sphere_space",
    "stratified_kfold",
]
