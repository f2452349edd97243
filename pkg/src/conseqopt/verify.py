"""Bound checks over seeded random instances small enough to brute force."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from conseqopt.bench import generate_random_dataset
from conseqopt.core import Dataset, ObjectiveKind, ObjectiveSpec, expected_value
from conseqopt.errors import ConfigurationError, InstanceTooLarge
from conseqopt.greedy import (
    MAX_ENUMERATION,
    BoundReport,
    brute_force_optimal,
    greedy_expected,
    greedy_per_environment,
    optimal_curve,
    verify_depth_bound,
    verify_greedy_bound,
)
from conseqopt.learning import (
    BlockedActionFeatures,
    LearnerConfig,
    reduction_slack,
    train_conseqopt_classification,
    train_conseqopt_regression,
)


@dataclass(frozen=True)
class BoundSuiteConfig:
    num_instances: int = 100
    num_actions: int = 5
    slots: int = 3
    num_envs: int = 10
    objectives: tuple[str, ...] = (
        ObjectiveKind.BEST_ACTION_COST.value,
        ObjectiveKind.SATISFICING_PROBABILITY.value,
    )
    seed: int = 0
    lam: float = 1e-8
    learners: bool = True

    def __post_init__(self):
        for name in ("num_instances", "num_actions", "slots", "num_envs"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {v!r}")
        object.__setattr__(self, "objectives", tuple(self.objectives))
        for k in self.objectives:
            try:
                ObjectiveKind(k)
            except ValueError:
                raise ConfigurationError(f"objectives: unknown kind {k!r}") from None
        if not self.lam > 0:
            raise ConfigurationError(f"lam must be > 0, got {self.lam!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "BoundSuiteConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigurationError(f"unknown config field {key!r}")
        return cls(**d)

    def check_size(self) -> None:
        if self.num_actions**self.slots > MAX_ENUMERATION:
            raise InstanceTooLarge(
                f"|V|^N = {self.num_actions}^{self.slots} exceeds {MAX_ENUMERATION}; shrink num_actions or slots"
            )


@dataclass
class InstanceResult:
    instance: int
    objective: str
    checks: dict[str, BoundReport] = field(default_factory=dict)
    gating: tuple[str, ...] = ("clairvoyant_contextual", "clairvoyant_static")

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "objective": self.objective,
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
        }


def check_instance(data: Dataset, obj: ObjectiveSpec, N: int, lam: float, learners: bool = True) -> dict[str, BoundReport]:
    """Every bound check on one instance, keyed by check name."""
    V = data.library.size
    out: dict[str, BoundReport] = {}
    opt_ctx = brute_force_optimal(obj, data, N, per_environment=True).value
    opt_static = brute_force_optimal(obj, data, N, per_environment=False).value

    greedy_seqs = [greedy_per_environment(obj, e, V, N).sequence for e in data.environments]
    out["clairvoyant_contextual"] = verify_greedy_bound(
        expected_value(obj, data, greedy_seqs), opt_ctx, [0.0] * N, opt_space="contextual"
    )
    static = greedy_expected(obj, data, N).sequence
    out["clairvoyant_static"] = verify_greedy_bound(
        expected_value(obj, data, [static] * len(data)), opt_static, [0.0] * N, opt_space="static"
    )

    learned = {}
    if learners:
        cfg = LearnerConfig.interpolating(lam)
        p1 = train_conseqopt_classification(data, obj, N, cfg)
        p2 = train_conseqopt_regression(data, obj, N, cfg, BlockedActionFeatures(V, intercept=False))
        for name, pred in (("alg1", p1), ("alg2", p2)):
            seqs = pred.predict(data.features())
            learned[name] = seqs
            achieved = expected_value(obj, data, seqs)
            slacks = [r["empirical_loss"] for r in pred.training_report]
            out[f"{name}_empirical_static"] = verify_greedy_bound(
                achieved, opt_static, slacks, opt_space="static", slack_kind="empirical_slot_loss"
            )
            out[f"{name}_empirical_contextual"] = verify_greedy_bound(
                achieved, opt_ctx, slacks, opt_space="contextual", slack_kind="empirical_slot_loss"
            )
        out["alg2_reduction"] = verify_greedy_bound(
            expected_value(obj, data, learned["alg2"]),
            opt_static,
            reduction_slack(p2.training_report, V),
            opt_space="static",
            slack_kind="sqrt_2(V-1)mse",
        )

    if obj.kind is ObjectiveKind.SATISFICING_PROBABILITY:
        curve = optimal_curve(obj, data, N, per_environment=False)
        out["depth_static_greedy"] = verify_depth_bound(data, [static] * len(data), curve)
        if learners:
            for name, seqs in learned.items():
                slacks = [r["empirical_loss"] for r in (p1 if name == "alg1" else p2).training_report]
                out[f"depth_{name}"] = verify_depth_bound(data, seqs, curve, slacks)
    return out


def run_bound_suite(cfg: BoundSuiteConfig) -> list[InstanceResult]:
    cfg.check_size()
    results = []
    for i in range(cfg.num_instances):
        for kind in cfg.objectives:
            data = generate_random_dataset(cfg.seed * 1_000_003 + i, cfg.num_actions, cfg.num_envs, kind)
            res = InstanceResult(i, kind)
            res.checks = check_instance(data, data.objective, cfg.slots, cfg.lam, cfg.learners)
            results.append(res)
    return results


def summarize(results: Sequence[InstanceResult]) -> dict:
    names = sorted({k for r in results for k in r.checks})
    summary = {}
    for name in names:
        reps = [r.checks[name] for r in results if name in r.checks]
        margin = [
            (rep.achieved - rep.bound_value) if rep.direction == "lower" else (rep.bound_value - rep.achieved)
            for rep in reps
        ]
        summary[name] = {
            "checked": len(reps),
            "held": sum(rep.holds for rep in reps),
            "min_margin": float(np.min(margin)),
        }
    return summary


def clairvoyant_failures(results: Sequence[InstanceResult]) -> int:
    return sum(not r.checks[k].holds for r in results for k in r.gating if k in r.checks)
