"""Domain types and the two built-in monotone submodular sequence objectives.

Sequences are plain tuples of integer action ids. Every evaluation is a pure
function of precomputed per-action vectors stored on an :class:`Environment`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from conseqopt.errors import ConfigurationError, NormalizerViolation, SchemaError
from conseqopt.rng import stream

ActionSeq = tuple[int, ...]


def _frozen(arr, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ActionLibrary:
    size: int
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if int(self.size) < 1:
            raise ConfigurationError(f"library size must be >= 1, got {self.size}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
            if len(self.labels) != self.size:
                raise ConfigurationError(
                    f"library has {self.size} actions but {len(self.labels)} labels"
                )

    def check(self, seq: Iterable[int]) -> ActionSeq:
        seq = tuple(int(a) for a in seq)
        for a in seq:
            if not 0 <= a < self.size:
                raise SchemaError(f"action id {a} outside library of size {self.size}")
        return seq


@dataclass(frozen=True, eq=False)
class Environment:
    """One problem instance: a context feature vector plus per-action evaluations."""

    id: str
    features: np.ndarray
    action_costs: Optional[np.ndarray] = None
    action_success: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen(self.features, np.float64).reshape(-1))
        if self.action_costs is not None:
            costs = _frozen(self.action_costs, np.float64).reshape(-1)
            if not np.all(np.isfinite(costs)) or np.any(costs < 0):
                raise ConfigurationError(f"environment {self.id!r}: costs must be finite and >= 0")
            object.__setattr__(self, "action_costs", costs)
        if self.action_success is not None:
            object.__setattr__(
                self, "action_success", _frozen(self.action_success, bool).reshape(-1)
            )
        if (
            self.action_costs is not None
            and self.action_success is not None
            and len(self.action_costs) != len(self.action_success)
        ):
            raise SchemaError(f"environment {self.id!r}: cost and success vectors differ in length")

    @property
    def num_actions(self) -> Optional[int]:
        if self.action_costs is not None:
            return len(self.action_costs)
        if self.action_success is not None:
            return len(self.action_success)
        return None


@dataclass(frozen=True, eq=False)
class Dataset:
    environments: tuple[Environment, ...]
    library: ActionLibrary
    objective: Optional["ObjectiveSpec"] = None
    # optional fixed per-action descriptors, (|V|, K); used by regression features
    action_descriptors: Optional[np.ndarray] = None

    def __post_init__(self):
        envs = tuple(self.environments)
        object.__setattr__(self, "environments", envs)
        if not envs:
            raise ConfigurationError("dataset needs at least one environment")
        flen = len(envs[0].features)
        for env in envs:
            if len(env.features) != flen:
                raise SchemaError(
                    f"environment {env.id!r} has {len(env.features)} features, expected {flen}"
                )
            n = env.num_actions
            if n is not None and n != self.library.size:
                raise SchemaError(
                    f"environment {env.id!r} evaluates {n} actions, library has {self.library.size}"
                )
        if self.action_descriptors is not None:
            desc = _frozen(self.action_descriptors, np.float64)
            if desc.ndim != 2 or desc.shape[0] != self.library.size:
                raise SchemaError(f"action descriptors of shape {desc.shape} for {self.library.size} actions")
            object.__setattr__(self, "action_descriptors", desc)

    def __len__(self) -> int:
        return len(self.environments)

    @property
    def feature_len(self) -> int:
        return len(self.environments[0].features)

    def features(self) -> np.ndarray:
        return np.stack([env.features for env in self.environments])

    def costs(self) -> np.ndarray:
        if any(env.action_costs is None for env in self.environments):
            raise ConfigurationError("dataset is missing action_costs")
        return np.stack([env.action_costs for env in self.environments])

    def success(self) -> np.ndarray:
        if any(env.action_success is None for env in self.environments):
            raise ConfigurationError("dataset is missing action_success")
        return np.stack([env.action_success for env in self.environments])

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(
            tuple(self.environments[i] for i in indices),
            self.library,
            self.objective,
            self.action_descriptors,
        )


class ObjectiveKind(str, enum.Enum):
    BEST_ACTION_COST = "BestActionCost"
    SATISFICING_PROBABILITY = "SatisficingProbability"


@dataclass(frozen=True)
class ObjectiveSpec:
    """Which built-in objective is maximized.

    ``normalizer`` is only meaningful for ``BestActionCost``; it must be at
    least as large as every cost the objective will see, which keeps every
    value in [0, 1].
    """

    kind: ObjectiveKind
    normalizer: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if self.kind is ObjectiveKind.BEST_ACTION_COST:
            if self.normalizer is None or not float(self.normalizer) > 0:
                raise ConfigurationError("BestActionCost needs a positive normalizer")
            object.__setattr__(self, "normalizer", float(self.normalizer))

    @classmethod
    def best_action_cost(cls, normalizer: float) -> "ObjectiveSpec":
        return cls(ObjectiveKind.BEST_ACTION_COST, normalizer)

    @classmethod
    def satisficing(cls) -> "ObjectiveSpec":
        return cls(ObjectiveKind.SATISFICING_PROBABILITY)

    @classmethod
    def for_dataset(cls, data: Dataset, kind=ObjectiveKind.BEST_ACTION_COST, normalizer=None):
        """Build an objective whose normalizer defaults to the largest observed cost."""
        kind = ObjectiveKind(kind)
        if kind is ObjectiveKind.SATISFICING_PROBABILITY:
            return cls.satisficing()
        if normalizer is None:
            normalizer = float(data.costs().max())
            if normalizer <= 0:
                normalizer = 1.0
        return cls.best_action_cost(normalizer)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "normalizer": self.normalizer}

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectiveSpec":
        return cls(ObjectiveKind(d["kind"]), d.get("normalizer"))


def _cost_vector(obj: ObjectiveSpec, env: Environment) -> np.ndarray:
    if env.action_costs is None:
        raise ConfigurationError(f"environment {env.id!r} has no action_costs for BestActionCost")
    if env.action_costs.size and env.action_costs.max() > obj.normalizer:
        raise NormalizerViolation(
            f"environment {env.id!r}: cost {env.action_costs.max()} exceeds normalizer {obj.normalizer}"
        )
    return env.action_costs


def _success_vector(env: Environment) -> np.ndarray:
    if env.action_success is None:
        raise ConfigurationError(f"environment {env.id!r} has no action_success")
    return env.action_success


def _check_ids(seq, n: int) -> ActionSeq:
    seq = tuple(int(a) for a in seq)
    for a in seq:
        if not 0 <= a < n:
            raise SchemaError(f"action id {a} outside library of size {n}")
    return seq


def eval_sequence(obj: ObjectiveSpec, env: Environment, seq: Sequence[int]) -> float:
    if obj.kind is ObjectiveKind.BEST_ACTION_COST:
        costs = _cost_vector(obj, env)
        seq = _check_ids(seq, len(costs))
        best = min((costs[a] for a in seq), default=obj.normalizer)
        # normalizer caps the empty-prefix minimum so f(<>) == 0
        best = min(best, obj.normalizer)
        return float((obj.normalizer - best) / obj.normalizer)
    success = _success_vector(env)
    seq = _check_ids(seq, len(success))
    return 1.0 if any(success[a] for a in seq) else 0.0


def marginal_gain(obj: ObjectiveSpec, env: Environment, seq: Sequence[int], a: int) -> float:
    seq = tuple(seq)
    return eval_sequence(obj, env, seq + (int(a),)) - eval_sequence(obj, env, seq)


def extension_values(obj: ObjectiveSpec, env: Environment, seq: Sequence[int]) -> np.ndarray:
    """f(seq + <a>) for every library action a, bit-identical to eval_sequence."""
    if obj.kind is ObjectiveKind.BEST_ACTION_COST:
        costs = _cost_vector(obj, env)
        seq = _check_ids(seq, len(costs))
        cur = min((costs[a] for a in seq), default=obj.normalizer)
        cur = min(cur, obj.normalizer)
        return (obj.normalizer - np.minimum(costs, cur)) / obj.normalizer
    success = _success_vector(env)
    seq = _check_ids(seq, len(success))
    hit = any(success[a] for a in seq)
    return np.where(success | hit, 1.0, 0.0)


def marginal_gains(obj: ObjectiveSpec, env: Environment, seq: Sequence[int]) -> np.ndarray:
    """Marginal gain of every library action appended to ``seq``.

    Elementwise identical (bit for bit) to calling :func:`marginal_gain` per action.
    """
    return extension_values(obj, env, seq) - eval_sequence(obj, env, seq)


def gain_matrix(obj: ObjectiveSpec, data: Dataset, prefixes: Sequence[Sequence[int]]) -> np.ndarray:
    """|D| x |V| matrix of marginal gains given one prefix per environment."""
    if len(prefixes) != len(data):
        raise SchemaError(f"{len(prefixes)} prefixes for {len(data)} environments")
    return np.stack(
        [marginal_gains(obj, env, p) for env, p in zip(data.environments, prefixes)]
    )


def expected_value(obj: ObjectiveSpec, data: Dataset, seqs: Sequence[Sequence[int]]) -> float:
    if len(seqs) != len(data):
        raise SchemaError(f"{len(seqs)} sequences for {len(data)} environments")
    return float(np.mean([eval_sequence(obj, e, s) for e, s in zip(data.environments, seqs)]))


def depth_to_success(env: Environment, seq: Sequence[int]) -> Optional[int]:
    """1-based position of the first succeeding action, or None when nothing succeeds."""
    success = _success_vector(env)
    for depth, a in enumerate(_check_ids(seq, len(success)), start=1):
        if success[a]:
            return depth
    return None


@dataclass
class PropertyReport:
    trials: int
    violations: int = 0
    witnesses: list = field(default_factory=list)


def check_monotone_submodular(
    obj: ObjectiveSpec,
    env: Environment,
    trials: int,
    seed: int,
    *,
    max_len: int = 4,
    tol: float = 1e-12,
    value_fn: Optional[Callable[[ActionSeq], float]] = None,
) -> PropertyReport:
    """Sample random (S1, S2, a) triples and record every property violation.

    ``value_fn`` replaces the objective evaluation; tests use it to inject a
    counterfeit objective. ``tol`` absorbs floating point rounding only.
    """
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    n = env.num_actions
    if n is None:
        raise ConfigurationError(f"environment {env.id!r} has no evaluation vector")
    f = value_fn if value_fn is not None else (lambda s: eval_sequence(obj, env, s))
    rng = stream(seed, "check_monotone_submodular")
    report = PropertyReport(trials=trials)
    for _ in range(trials):
        s1 = tuple(int(x) for x in rng.integers(0, n, size=rng.integers(0, max_len + 1)))
        s2 = tuple(int(x) for x in rng.integers(0, n, size=rng.integers(0, max_len + 1)))
        a = int(rng.integers(0, n))
        f1, f12 = f(s1), f(s1 + s2)
        f2 = f(s2)
        if f1 > f12 + tol or f2 > f12 + tol:
            report.violations += 1
            report.witnesses.append(
                {"property": "monotonicity", "s1": s1, "s2": s2, "f_s1": f1, "f_s2": f2, "f_s1s2": f12}
            )
        long_gain = f(s1 + s2 + (a,)) - f12
        short_gain = f(s1 + (a,)) - f1
        if long_gain > short_gain + tol:
            report.violations += 1
            report.witnesses.append(
                {"property": "submodularity", "s1": s1, "s2": s2, "a": a,
                 "gain_long": long_gain, "gain_short": short_gain}
            )
    return report
