"""Clairvoyant greedy sequences, brute-force optima and the greedy bound checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from conseqopt.core import (
    ActionSeq,
    Dataset,
    Environment,
    ObjectiveKind,
    ObjectiveSpec,
    depth_to_success,
    eval_sequence,
    extension_values,
)
from conseqopt.errors import ConfigurationError, InstanceTooLarge, NormalizerViolation, SchemaError

GREEDY_FACTOR = 1.0 - 1.0 / math.e
BOUND_TOL = 1e-9
MAX_ENUMERATION = 10**7


@dataclass
class GreedyTrace:
    sequence: ActionSeq
    per_slot_gain: list[float]
    per_slot_error: list[float]


@dataclass
class BoundReport:
    """Outcome of one bound check.

    For ``direction == "lower"`` the check is ``achieved >= bound_value``; for
    the satisficing-depth bound it is ``achieved <= bound_value``.
    """

    achieved: float
    opt: float
    slack_terms: list[float]
    bound_value: float
    holds: bool
    direction: str = "lower"
    opt_space: str = "static"
    slack_kind: str = "epsilon"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _argmax_lowest(values: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest action id on ties
    return int(np.argmax(values))


def greedy_per_environment(obj: ObjectiveSpec, env: Environment, num_actions: int, N: int) -> GreedyTrace:
    if N < 1:
        raise ConfigurationError("sequence length N must be >= 1")
    seq: ActionSeq = ()
    gains = []
    for _ in range(N):
        ext = extension_values(obj, env, seq)
        if len(ext) != num_actions:
            raise SchemaError(f"environment evaluates {len(ext)} actions, library has {num_actions}")
        # argmax over f(seq + <a>) rather than the rounded differences
        a = _argmax_lowest(ext)
        gains.append(float(ext[a] - eval_sequence(obj, env, seq)))
        seq += (a,)
    return GreedyTrace(seq, gains, [0.0] * N)


def greedy_expected(obj: ObjectiveSpec, data: Dataset, N: int) -> GreedyTrace:
    """Greedy on the dataset-mean objective: the static, context-free sequence."""
    if N < 1:
        raise ConfigurationError("sequence length N must be >= 1")
    seq: ActionSeq = ()
    gains = []
    for _ in range(N):
        ext = np.mean([extension_values(obj, env, seq) for env in data.environments], axis=0)
        base = np.mean([eval_sequence(obj, env, seq) for env in data.environments])
        a = _argmax_lowest(ext)
        gains.append(float(ext[a] - base))
        seq += (a,)
    return GreedyTrace(seq, gains, [0.0] * N)


def _value_table(obj: ObjectiveSpec, data: Dataset) -> np.ndarray:
    """Per-env, per-action 'score' whose max over a sequence determines f."""
    if obj.kind is ObjectiveKind.BEST_ACTION_COST:
        costs = data.costs()
        if costs.max() > obj.normalizer:
            raise NormalizerViolation(f"cost {costs.max()} exceeds normalizer {obj.normalizer}")
        return (obj.normalizer - costs) / obj.normalizer
    return data.success().astype(np.float64)


@dataclass
class OptimumResult:
    sequences: list[ActionSeq]
    value: float
    per_environment: bool
    enumerated: int


def brute_force_optimal(obj: ObjectiveSpec, data: Dataset, N: int, per_environment: bool) -> OptimumResult:
    """Exhaustive maximizer over ordered length-N sequences with repetition.

    Ties resolve to the lexicographically smallest sequence. When
    ``per_environment`` is set, each environment gets its own optimum and the
    reported value is their mean.
    """
    V = data.library.size
    if N < 1:
        raise ConfigurationError("sequence length N must be >= 1")
    total = V**N
    if total > MAX_ENUMERATION:
        raise InstanceTooLarge(f"|V|^N = {V}^{N} = {total} exceeds {MAX_ENUMERATION}")
    # both built-ins reduce to max over items of a per-item score, with f(<>) = 0
    score = np.maximum(_value_table(obj, data), 0.0)
    D = len(data)
    best_env = np.full(D, -1.0)
    best_env_idx = np.zeros(D, dtype=np.int64)
    best_static, best_static_idx = -1.0, 0
    chunk = 1 << 15
    it = itertools.product(range(V), repeat=N)
    offset = 0
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        vals = score[:, block].max(axis=2)  # D x chunk
        if per_environment:
            idx = vals.argmax(axis=1)
            v = vals[np.arange(D), idx]
            better = v > best_env
            best_env = np.where(better, v, best_env)
            best_env_idx = np.where(better, idx + offset, best_env_idx)
        else:
            means = vals.mean(axis=0)
            i = int(means.argmax())
            if means[i] > best_static:
                best_static, best_static_idx = float(means[i]), i + offset
        offset += len(block)

    def decode(k: int) -> ActionSeq:
        digits = []
        for _ in range(N):
            k, r = divmod(int(k), V)
            digits.append(r)
        return tuple(reversed(digits))

    if per_environment:
        return OptimumResult([decode(k) for k in best_env_idx], float(best_env.mean()), True, total)
    return OptimumResult([decode(best_static_idx)] * D, best_static, False, total)


def optimal_curve(obj: ObjectiveSpec, data: Dataset, N: int, per_environment: bool) -> list[float]:
    """OPT value at every prefix length 0..N (index 0 is the empty sequence)."""
    return [0.0] + [brute_force_optimal(obj, data, n, per_environment).value for n in range(1, N + 1)]


def verify_greedy_bound(
    achieved_f: float,
    opt: float,
    slacks: Sequence[float],
    *,
    opt_space: str = "static",
    slack_kind: str = "epsilon",
) -> BoundReport:
    slacks = [float(s) for s in slacks]
    if any(s < 0 for s in slacks):
        raise ConfigurationError("slack terms must be >= 0")
    bound = GREEDY_FACTOR * opt - math.fsum(slacks)
    return BoundReport(
        achieved=float(achieved_f),
        opt=float(opt),
        slack_terms=slacks,
        bound_value=bound,
        holds=bool(achieved_f >= bound - BOUND_TOL),
        opt_space=opt_space,
        slack_kind=slack_kind,
    )


def truncated_depth(env: Environment, seq: Sequence[int]) -> int:
    """Depth to success, counting a miss as len(seq) + 1."""
    d = depth_to_success(env, seq)
    return len(seq) + 1 if d is None else d


def verify_depth_bound(
    data: Dataset,
    seqs: Sequence[Sequence[int]],
    opt_depth_curve: Sequence[float],
    slacks: Optional[Sequence[float]] = None,
    *,
    opt_space: str = "static",
) -> BoundReport:
    """Satisficing-depth bound, discretized over prefix lengths 0..N.

    Left side: mean depth to success with misses charged N + 1, which equals
    the sum over n = 0..N of the fraction still unsatisfied after n items.
    Right side: 4 * sum_n (1 - OPT(n)) + sum of slacks.
    """
    N = len(opt_depth_curve) - 1
    if len(seqs) != len(data):
        raise SchemaError(f"{len(seqs)} sequences for {len(data)} environments")
    if N < 0 or any(len(s) != N for s in seqs):
        raise SchemaError("opt_depth_curve must have one entry per prefix length 0..N")
    slacks = [float(s) for s in (slacks or [0.0] * N)]
    achieved = float(np.mean([truncated_depth(env, s) for env, s in zip(data.environments, seqs)]))
    area = math.fsum(1.0 - float(c) for c in opt_depth_curve)
    bound = 4.0 * area + math.fsum(slacks)
    return BoundReport(
        achieved=achieved,
        opt=area,
        slack_terms=slacks,
        bound_value=bound,
        holds=bool(achieved <= bound + BOUND_TOL),
        direction="upper",
        opt_space=opt_space,
    )
