"""Contextual submodular sequence optimization."""

from conseqopt.core import (
    ActionLibrary,
    Dataset,
    Environment,
    ObjectiveKind,
    ObjectiveSpec,
    depth_to_success,
    eval_sequence,
    expected_value,
    marginal_gain,
)
from conseqopt.learning import (
    LearnerConfig,
    SequencePredictor,
    train_conseqopt_classification,
    train_conseqopt_regression,
)

__all__ = [
    "ActionLibrary",
    "Dataset",
    "Environment",
    "LearnerConfig",
    "ObjectiveKind",
    "ObjectiveSpec",
    "SequencePredictor",
    "depth_to_success",
    "eval_sequence",
    "expected_value",
    "marginal_gain",
    "train_conseqopt_classification",
    "train_conseqopt_regression",
]

__version__ = "0.1.0"
