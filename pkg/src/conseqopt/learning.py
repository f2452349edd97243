"""Per-slot training of contextual sequence predictors.

Two trainers share one structure: for every slot, build training targets from
the predictions of the slots before it, fit a learner, then predict on the same
training environments to form the prefix for the next slot.

* ``alg1``: per-slot cost-sensitive classifier over environment features. The
  built-in classifier regresses each action's marginal loss with ridge
  regression and predicts the argmin.
* ``alg2``: per-slot ridge regressor over per-action feature rows that
  estimates marginal benefit; the prediction is the argmax.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from conseqopt.core import (
    ActionSeq,
    Dataset,
    Environment,
    ObjectiveSpec,
    eval_sequence,
    extension_values,
)
from conseqopt.errors import ConfigurationError, DataError, SchemaError

MODEL_VERSION = 1
CLASSIFIER = "CostSensitiveClassifier"
REGRESSOR = "BenefitRegressor"


@dataclass(frozen=True)
class LearnerConfig:
    lam: float = 1e-6
    standardize: bool = True
    fit_intercept: bool = True
    drop_saturated: bool = False
    difference_features: bool = True
    # "signed" differences cannot change the argmax of a linear scorer with
    # shared weights; "absolute" lets the regressor reward dissimilarity.
    difference_mode: str = "absolute"

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigurationError(f"lam must be > 0, got {self.lam}")
        if self.difference_mode not in ("signed", "absolute"):
            raise ConfigurationError(f"unknown difference_mode {self.difference_mode!r}")

    @classmethod
    def interpolating(cls, lam: float = 1e-8) -> "LearnerConfig":
        """Raw features, no intercept: one-hot inputs give an exactly diagonal system."""
        return cls(lam=lam, standardize=False, fit_intercept=False, difference_features=False)


# -- ridge regression ---------------------------------------------------------


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DataError("learner inputs contain non-finite values")


def ridge_fit(X: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    """Solve (X^T X + lam I) W = X^T Y. ``Y`` may hold several target columns."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    _check_finite(X, Y)
    if not lam > 0:
        raise ConfigurationError("lam must be > 0")
    if X.shape[0] != Y.shape[0]:
        raise SchemaError(f"{X.shape[0]} rows of features for {Y.shape[0]} targets")
    A = X.T @ X + lam * np.eye(X.shape[1])
    b = X.T @ Y
    W = np.linalg.solve(A, b)
    # one refinement step keeps the normal-equation residual near machine precision
    W = W + np.linalg.solve(A, b - A @ W)
    return W


def normal_equation_residual(X: np.ndarray, Y: np.ndarray, W: np.ndarray, lam: float) -> float:
    A = X.T @ X + lam * np.eye(X.shape[1])
    return float(np.max(np.abs(A @ W - X.T @ Y), initial=0.0))


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        std = X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        return cls(X.mean(axis=0), std)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> Optional["Standardizer"]:
        if d is None:
            return None
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64))


# -- slot models --------------------------------------------------------------


@dataclass
class SlotModel:
    """One trained slot.

    ``weights`` is ``(inputs [+1 intercept], |V|)`` for the classifier (one
    loss regressor per action) and ``(inputs [+1],)`` for the benefit
    regressor. ``schema`` records the expected input layout.
    """

    kind: str
    weights: np.ndarray
    schema: dict
    standardizer: Optional[Standardizer] = None

    @property
    def input_len(self) -> int:
        return int(self.schema["base_len"]) * (1 + int(self.schema.get("difference_blocks", 0)))

    def design(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_len:
            raise SchemaError(f"slot expects {self.input_len} inputs, got shape {X.shape}")
        if self.standardizer is not None:
            X = self.standardizer(X)
        if self.schema.get("intercept"):
            X = np.hstack([X, np.ones((X.shape[0], 1))])
        return X

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.design(X) @ self.weights

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "schema": dict(self.schema),
            "standardization": None if self.standardizer is None else self.standardizer.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SlotModel":
        return cls(
            kind=d["kind"],
            weights=np.array(d["weights"], dtype=np.float64),
            schema=dict(d["schema"]),
            standardizer=Standardizer.from_dict(d.get("standardization")),
        )


def _fit_slot(kind: str, X: np.ndarray, Y: np.ndarray, config: LearnerConfig, schema: dict) -> SlotModel:
    X = np.asarray(X, dtype=np.float64)
    _check_finite(X, Y)
    std = Standardizer.fit(X) if config.standardize else None
    schema = dict(schema, intercept=bool(config.fit_intercept))
    model = SlotModel(kind, np.zeros(0), schema, std)
    W = ridge_fit(model.design(X), Y, config.lam)
    model.weights = W
    return model


# -- algorithm 1: cost-sensitive classification ---------------------------------


@dataclass
class MarginalLossMatrix:
    values: np.ndarray  # |D| x |V|, row minimum exactly 0
    targets: np.ndarray  # zero-loss action per row, lowest id on ties


def compute_target_actions(
    obj: ObjectiveSpec, data: Dataset, prev_predictions: Sequence[Sequence[int]]
) -> MarginalLossMatrix:
    if len(prev_predictions) != len(data):
        raise SchemaError(f"{len(prev_predictions)} prefixes for {len(data)} environments")
    ext = np.stack(
        [
            extension_values(obj, env, data.library.check(p))
            for env, p in zip(data.environments, prev_predictions)
        ]
    )
    targets = ext.argmax(axis=1)
    losses = ext.max(axis=1, keepdims=True) - ext
    return MarginalLossMatrix(losses, targets)


def train_slot_classifier(features: np.ndarray, losses, config: LearnerConfig = LearnerConfig()) -> SlotModel:
    M = losses.values if isinstance(losses, MarginalLossMatrix) else np.asarray(losses, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] != M.shape[0]:
        raise SchemaError(f"{features.shape[0]} feature rows for {M.shape[0]} loss rows")
    if config.drop_saturated:
        keep = M.max(axis=1) > 0
        if keep.any():
            features, M = features[keep], M[keep]
    schema = {"base_len": features.shape[1], "difference_blocks": 0, "num_actions": M.shape[1]}
    return _fit_slot(CLASSIFIER, features, M, config, schema)


def classify(model: SlotModel, features: np.ndarray) -> np.ndarray:
    if model.kind != CLASSIFIER:
        raise SchemaError(f"classify needs a {CLASSIFIER}, got {model.kind}")
    pred = model.predict(np.atleast_2d(features))
    return pred.argmin(axis=1)


# -- algorithm 2: benefit regression --------------------------------------------


class BlockedActionFeatures:
    """Per-action rows ``e_a (x) [1, x]``: a shared weight vector acts per action."""

    name = "blocked"

    def __init__(self, num_actions: int, intercept: bool = True):
        self.num_actions = int(num_actions)
        self.intercept = bool(intercept)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.intercept:
            X = np.hstack([np.ones((X.shape[0], 1)), X])
        D, L = X.shape
        V = self.num_actions
        out = np.zeros((D, V, V * L))
        for a in range(V):
            out[:, a, a * L:(a + 1) * L] = X
        return out

    def to_dict(self) -> dict:
        return {"name": self.name, "num_actions": self.num_actions, "intercept": self.intercept}


class DescriptorActionFeatures(BlockedActionFeatures):
    """Blocked environment features followed by a fixed descriptor per action."""

    name = "descriptor"

    def __init__(self, descriptors, intercept: bool = True):
        self.descriptors = np.asarray(descriptors, dtype=np.float64)
        super().__init__(self.descriptors.shape[0], intercept)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        blocked = super().__call__(X)
        desc = np.broadcast_to(self.descriptors, (blocked.shape[0],) + self.descriptors.shape)
        return np.concatenate([blocked, desc], axis=2)

    def to_dict(self) -> dict:
        return dict(super().to_dict(), name=self.name, descriptors=self.descriptors.tolist())


def action_features_from_dict(d: dict):
    if d["name"] == "blocked":
        return BlockedActionFeatures(d["num_actions"], d["intercept"])
    if d["name"] == "descriptor":
        return DescriptorActionFeatures(d["descriptors"], d["intercept"])
    raise SchemaError(f"unknown action feature provider {d['name']!r}")


def slot_rows(base: np.ndarray, prev_choices: Sequence[Sequence[int]], config: LearnerConfig) -> np.ndarray:
    """Per-action feature rows for one slot: (|D|, |V|, L') with L' = L * (1 + #diff blocks)."""
    base = np.asarray(base, dtype=np.float64)
    if base.ndim != 3:
        raise SchemaError(f"base features must be (|D|, |V|, L), got shape {base.shape}")
    if len(prev_choices) != base.shape[0]:
        raise SchemaError(f"{len(prev_choices)} prefixes for {base.shape[0]} environments")
    blocks = [base]
    depth = len(prev_choices[0]) if len(prev_choices) else 0
    if any(len(p) != depth for p in prev_choices):
        raise SchemaError("all prefixes must have the same length")
    if config.difference_features and depth:
        idx = np.arange(base.shape[0])
        for j in range(depth):
            chosen = base[idx, [p[j] for p in prev_choices]][:, None, :]
            diff = base - chosen
            blocks.append(np.abs(diff) if config.difference_mode == "absolute" else diff)
    return np.concatenate(blocks, axis=2)


def compute_features_and_benefit(
    obj: ObjectiveSpec,
    data: Dataset,
    prev_choices: Sequence[Sequence[int]],
    base_features: np.ndarray,
    config: LearnerConfig = LearnerConfig(),
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X_i, M_B_i)``: rows ordered environment-major, then action."""
    base_features = np.asarray(base_features, dtype=np.float64)
    D, V = len(data), data.library.size
    if base_features.shape[:2] != (D, V):
        raise SchemaError(f"base features shape {base_features.shape} does not match ({D}, {V}, L)")
    rows = slot_rows(base_features, prev_choices, config)
    benefit = np.stack(
        [
            extension_values(obj, env, data.library.check(p)) - eval_sequence(obj, env, p)
            for env, p in zip(data.environments, prev_choices)
        ]
    )
    return rows.reshape(D * V, -1), benefit


def train_slot_regressor(X: np.ndarray, benefits: np.ndarray, config: LearnerConfig = LearnerConfig(),
                         difference_blocks: int = 0) -> SlotModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(benefits, dtype=np.float64).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise SchemaError(f"{X.shape[0]} feature rows for {y.shape[0]} benefits")
    if X.shape[1] % (1 + difference_blocks):
        raise SchemaError("feature width is not a multiple of the block count")
    schema = {"base_len": X.shape[1] // (1 + difference_blocks), "difference_blocks": difference_blocks}
    return _fit_slot(REGRESSOR, X, y, config, schema)


def predict_slot_regression(model: SlotModel, rows: np.ndarray) -> tuple[int, np.ndarray]:
    if model.kind != REGRESSOR:
        raise SchemaError(f"regression prediction needs a {REGRESSOR}, got {model.kind}")
    rows = np.asarray(rows, dtype=np.float64)
    n_actions = model.schema.get("num_actions")
    if n_actions is not None and rows.shape[0] != n_actions:
        raise SchemaError(f"expected {n_actions} action rows, got {rows.shape[0]}")
    pred = model.predict(rows)
    return int(pred.argmax()), pred


# -- sequence predictor ---------------------------------------------------------


@dataclass
class SequencePredictor:
    algorithm: str
    slots: list[SlotModel]
    library_size: int
    feature_len: int
    objective: ObjectiveSpec
    config: LearnerConfig
    action_features: Optional[BlockedActionFeatures] = None
    training_report: list[dict] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.slots)

    def predict(self, features: np.ndarray) -> list[ActionSeq]:
        """Sequences for a batch of environment feature rows."""
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if X.shape[1] != self.feature_len:
            raise SchemaError(f"predictor expects {self.feature_len} features, got {X.shape[1]}")
        D = X.shape[0]
        prefixes: list[ActionSeq] = [() for _ in range(D)]
        if self.algorithm == "alg1":
            for slot in self.slots:
                choice = classify(slot, X)
                prefixes = [p + (int(c),) for p, c in zip(prefixes, choice)]
            return prefixes
        base = self.action_features(X)
        for slot in self.slots:
            rows = slot_rows(base, prefixes, self.config)
            pred = slot.predict(rows.reshape(D * self.library_size, -1)).reshape(D, self.library_size)
            choice = pred.argmax(axis=1)
            prefixes = [p + (int(c),) for p, c in zip(prefixes, choice)]
        return prefixes

    def slot1_benefits(self, features: np.ndarray) -> np.ndarray:
        """Predicted slot-1 benefit of every action, (|D|, |V|). Regression predictors only."""
        if self.algorithm != "alg2":
            raise ConfigurationError("slot-1 benefits need a regression predictor")
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        base = self.action_features(X)
        D = X.shape[0]
        return self.slots[0].predict(base.reshape(D * self.library_size, -1)).reshape(D, self.library_size)

    def to_dict(self) -> dict:
        first = self.slots[0].standardizer if self.algorithm == "alg1" and self.slots else None
        return {
            "version": MODEL_VERSION,
            "algorithm": self.algorithm,
            "objective": self.objective.to_dict(),
            "library_size": self.library_size,
            "feature_len": self.feature_len,
            "standardization": None if first is None else first.to_dict(),
            "learner": asdict(self.config),
            "action_features": None if self.action_features is None else self.action_features.to_dict(),
            "slots": [s.to_dict() for s in self.slots],
            "training_report": self.training_report,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SequencePredictor":
        if d.get("version") != MODEL_VERSION:
            raise SchemaError(f"unsupported model version {d.get('version')!r}")
        af = d.get("action_features")
        return cls(
            algorithm=d["algorithm"],
            slots=[SlotModel.from_dict(s) for s in d["slots"]],
            library_size=int(d["library_size"]),
            feature_len=int(d["feature_len"]),
            objective=ObjectiveSpec.from_dict(d["objective"]),
            config=LearnerConfig(**d["learner"]),
            action_features=None if af is None else action_features_from_dict(af),
            training_report=list(d.get("training_report", [])),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SequencePredictor":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def predict_sequence(pred: SequencePredictor, env: Union[Environment, np.ndarray]) -> ActionSeq:
    features = env.features if isinstance(env, Environment) else env
    return pred.predict(np.asarray(features).reshape(1, -1))[0]


def train_conseqopt_classification(
    data: Dataset, obj: ObjectiveSpec, N: int, config: LearnerConfig = LearnerConfig()
) -> SequencePredictor:
    if N < 1:
        raise ConfigurationError("sequence length N must be >= 1")
    X = data.features()
    prefixes: list[ActionSeq] = [() for _ in range(len(data))]
    slots, report = [], []
    for i in range(N):
        losses = compute_target_actions(obj, data, prefixes)
        model = train_slot_classifier(X, losses, config)
        chosen = classify(model, X)
        rows = np.arange(len(data))
        prefixes = [p + (int(c),) for p, c in zip(prefixes, chosen)]
        slots.append(model)
        report.append(
            {
                "slot": i + 1,
                "empirical_loss": float(losses.values[rows, chosen].mean()),
                "target_hit_rate": float((losses.values[rows, chosen] == 0).mean()),
                "saturated_rows": int((losses.values.max(axis=1) == 0).sum()),
                "expected_value": _mean_value(obj, data, prefixes),
            }
        )
    return SequencePredictor("alg1", slots, data.library.size, data.feature_len, obj, config, None, report)


def train_conseqopt_regression(
    data: Dataset,
    obj: ObjectiveSpec,
    N: int,
    config: LearnerConfig = LearnerConfig(),
    action_features=None,
) -> SequencePredictor:
    if N < 1:
        raise ConfigurationError("sequence length N must be >= 1")
    V, D = data.library.size, len(data)
    if action_features is None:
        action_features = BlockedActionFeatures(V)
    base = action_features(data.features())
    if base.shape[:2] != (D, V):
        raise SchemaError(f"action feature provider returned shape {base.shape}")
    prefixes: list[ActionSeq] = [() for _ in range(D)]
    slots, report = [], []
    for i in range(N):
        X_i, benefit = compute_features_and_benefit(obj, data, prefixes, base, config)
        blocks = i if config.difference_features else 0
        if config.drop_saturated and (benefit.max(axis=1) > 0).any():
            keep = np.repeat(benefit.max(axis=1) > 0, V)
            model = train_slot_regressor(X_i[keep], benefit.reshape(-1)[keep], config, blocks)
        else:
            model = train_slot_regressor(X_i, benefit, config, blocks)
        model.schema["num_actions"] = V
        pred = model.predict(X_i).reshape(D, V)
        chosen = pred.argmax(axis=1)
        rows = np.arange(D)
        slot_loss = benefit.max(axis=1) - benefit[rows, chosen]
        prefixes = [p + (int(c),) for p, c in zip(prefixes, chosen)]
        slots.append(model)
        report.append(
            {
                "slot": i + 1,
                "mse": float(np.mean((pred - benefit) ** 2)),
                "empirical_loss": float(slot_loss.mean()),
                "target_hit_rate": float((slot_loss == 0).mean()),
                "saturated_rows": int((benefit.max(axis=1) == 0).sum()),
                "expected_value": _mean_value(obj, data, prefixes),
            }
        )
    return SequencePredictor("alg2", slots, V, data.feature_len, obj, config, action_features, report)


def _mean_value(obj, data, seqs) -> float:
    return float(np.mean([eval_sequence(obj, e, s) for e, s in zip(data.environments, seqs)]))


def reduction_slack(training_report, num_actions: int) -> list[float]:
    """Per-slot sqrt(2 (|V| - 1) r_reg), with the training MSE standing in for r_reg.

    ``training_report`` is either a list of slot report dicts carrying ``mse``
    or a plain sequence of squared-loss values.
    """
    values = [r["mse"] if isinstance(r, dict) else r for r in training_report]
    out = []
    for r in values:
        r = float(r)
        if r < 0 or not math.isfinite(r):
            raise DataError(f"squared-loss regret must be finite and >= 0, got {r}")
        out.append(math.sqrt(2.0 * (num_actions - 1) * r))
    return out
