"""Synthetic scenarios, baseline orderings and the method comparison harness.

Two desk-scale scenarios stand in for the robotics case studies:

* ``SatisficingSeeds``: a latent 2D context per environment, a library of
  actions that each work inside a viability region of context space, and
  noisy observations of the context as features. Actions come in clusters
  with overlapping regions, and a hidden per-environment fault can disable a
  whole cluster, so similar actions tend to fail together.
* ``Navigation``: a grid cost map with obstacles, a fan of arc trajectories
  from the robot cell, and per-action traversal cost plus straight-line
  cost-to-go. Features are per-sector occupancy around the robot plus the goal
  offset.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from conseqopt.core import (
    ActionLibrary,
    ActionSeq,
    Dataset,
    Environment,
    ObjectiveKind,
    ObjectiveSpec,
    depth_to_success,
    eval_sequence,
)
from conseqopt.errors import ConfigurationError
from conseqopt.greedy import greedy_expected, greedy_per_environment
from conseqopt.learning import (
    BlockedActionFeatures,
    DescriptorActionFeatures,
    LearnerConfig,
    SequencePredictor,
    train_conseqopt_classification,
    train_conseqopt_regression,
)
from conseqopt.rng import stream

FAILURE_PENALTY = 40.0


class ScenarioKind(str, enum.Enum):
    NAVIGATION = "Navigation"
    SATISFICING = "SatisficingSeeds"


@dataclass(frozen=True)
class ScenarioConfig:
    kind: ScenarioKind = ScenarioKind.SATISFICING
    num_envs: int = 500
    num_actions: int = 30
    slots: int = 3
    feature_len: int = 17
    noise: float = 0.1
    obstacle_density: float = 0.0
    seed: int = 42
    train_fraction: float = 0.6
    failure_penalty: float = FAILURE_PENALTY
    objective: str = ObjectiveKind.BEST_ACTION_COST.value
    lam: float = 1e-6
    # satisficing layout
    clusters: int = 6
    # probability that a hidden per-environment fault disables a whole cluster
    cluster_failure: float = 0.4
    regions: str = "disks"
    num_contexts: Optional[int] = None
    # navigation layout
    grid_width: int = 24
    grid_height: int = 24

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        for name in ("num_envs", "num_actions", "slots", "feature_len", "clusters", "grid_width", "grid_height"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not 0.0 <= self.obstacle_density <= 1.0:
            raise ConfigurationError(f"obstacle_density must lie in [0, 1], got {self.obstacle_density!r}")
        if not 0.0 <= self.cluster_failure <= 1.0:
            raise ConfigurationError(f"cluster_failure must lie in [0, 1], got {self.cluster_failure!r}")
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigurationError(f"noise must lie in [0, 1], got {self.noise!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError(f"train_fraction must lie in (0, 1), got {self.train_fraction!r}")
        if not self.failure_penalty > 0:
            raise ConfigurationError(f"failure_penalty must be > 0, got {self.failure_penalty!r}")
        if not self.lam > 0:
            raise ConfigurationError(f"lam must be > 0, got {self.lam!r}")
        if self.regions not in ("disks", "voronoi"):
            raise ConfigurationError(f"regions must be 'disks' or 'voronoi', got {self.regions!r}")
        if self.num_contexts is not None and (not isinstance(self.num_contexts, int) or self.num_contexts < 1):
            raise ConfigurationError(f"num_contexts must be a positive integer, got {self.num_contexts!r}")
        try:
            ObjectiveKind(self.objective)
        except ValueError:
            raise ConfigurationError(f"objective must be one of {[k.value for k in ObjectiveKind]}") from None
        if self.kind is ScenarioKind.NAVIGATION and self.feature_len < 3:
            raise ConfigurationError("feature_len must be >= 3 for Navigation (sectors + goal offset)")

    @classmethod
    def navigation(cls, **overrides) -> "ScenarioConfig":
        base = dict(
            kind=ScenarioKind.NAVIGATION, num_envs=400, num_actions=24, slots=3,
            feature_len=14, noise=0.5, obstacle_density=0.12,
        )
        base.update(overrides)
        return cls(**base)

    @classmethod
    def satisficing(cls, **overrides) -> "ScenarioConfig":
        return cls(**overrides)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigurationError(f"unknown config field {key!r}")
        kind = ScenarioKind(d.get("kind", ScenarioKind.SATISFICING))
        try:
            if kind is ScenarioKind.NAVIGATION:
                return cls.navigation(**d)
            return cls(**d)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["kind"] = self.kind.value
        return d


# -- satisficing seeds ----------------------------------------------------------


@dataclass
class SatisficingLayout:
    centers: np.ndarray  # (V, 2) region centers
    radii: np.ndarray  # (V,)
    cluster: np.ndarray  # (V,) cluster id of every action
    feature_centers: np.ndarray  # (L, 2) observation basis
    feature_width: float = 0.25

    def success(self, z: np.ndarray, regions: str) -> np.ndarray:
        d = np.linalg.norm(self.centers - z, axis=1)
        if regions == "voronoi":
            return d == d.min()
        return d < self.radii

    def observe(self, z: np.ndarray) -> np.ndarray:
        d2 = np.sum((self.feature_centers - z) ** 2, axis=1)
        return np.exp(-d2 / (2 * self.feature_width**2))

    def descriptors(self) -> np.ndarray:
        return np.column_stack([self.centers, self.radii])


def satisficing_layout(cfg: ScenarioConfig) -> SatisficingLayout:
    rng = stream(cfg.seed, "satisficing/layout")
    V, K = cfg.num_actions, min(cfg.clusters, cfg.num_actions)
    cluster_centers = rng.uniform(0.15, 0.85, size=(K, 2))
    cluster = np.arange(V) % K
    centers = np.clip(cluster_centers[cluster] + rng.normal(0, 0.03, size=(V, 2)), 0, 1)
    radii = rng.uniform(0.3, 0.45, size=V)
    side = int(math.ceil(math.sqrt(cfg.feature_len)))
    grid = (np.arange(side) + 0.5) / side
    basis = np.array([(x, y) for y in grid for x in grid])[: cfg.feature_len]
    return SatisficingLayout(centers, radii, cluster, basis)


def generate_satisficing_dataset(cfg: ScenarioConfig) -> Dataset:
    if cfg.kind is not ScenarioKind.SATISFICING:
        raise ConfigurationError("generate_satisficing_dataset needs kind = SatisficingSeeds")
    layout = satisficing_layout(cfg)
    ctx_rng = stream(cfg.seed, "satisficing/contexts")
    obs_rng = stream(cfg.seed, "satisficing/observation")
    time_rng = stream(cfg.seed, "satisficing/times")
    fault_rng = stream(cfg.seed, "satisficing/faults")
    K = int(layout.cluster.max()) + 1
    if cfg.num_contexts is not None:
        protos = ctx_rng.uniform(0, 1, size=(cfg.num_contexts, 2))
        contexts = protos[ctx_rng.integers(0, cfg.num_contexts, size=cfg.num_envs)]
    else:
        contexts = ctx_rng.uniform(0, 1, size=(cfg.num_envs, 2))
    V = cfg.num_actions
    # each action has its own nominal execution time; environments jitter it
    nominal = time_rng.uniform(2.0, 10.0, size=V)
    envs = []
    for n, z in enumerate(contexts):
        faulty = fault_rng.uniform(size=K) < cfg.cluster_failure
        success = layout.success(z, cfg.regions) & ~faulty[layout.cluster]
        times = np.minimum(nominal * time_rng.uniform(0.8, 1.2, size=V), cfg.failure_penalty)
        costs = np.where(success, times, cfg.failure_penalty)
        features = layout.observe(z) + cfg.noise * obs_rng.normal(size=cfg.feature_len)
        envs.append(Environment(f"sat-{n:05d}", features, costs, success))
    labels = tuple(f"seed-{a:02d}-c{layout.cluster[a]}" for a in range(V))
    return Dataset(
        tuple(envs),
        ActionLibrary(V, labels),
        _scenario_objective(cfg, cfg.failure_penalty),
        layout.descriptors(),
    )


def _scenario_objective(cfg: ScenarioConfig, normalizer: float) -> ObjectiveSpec:
    if ObjectiveKind(cfg.objective) is ObjectiveKind.SATISFICING_PROBABILITY:
        return ObjectiveSpec.satisficing()
    return ObjectiveSpec.best_action_cost(normalizer)


# -- navigation -----------------------------------------------------------------


@dataclass
class GridWorld:
    width: int
    height: int
    cost_map: np.ndarray  # (height, width) traversal cost of free cells, >= 0
    obstacles: np.ndarray  # (height, width) bool
    start: tuple[float, float]
    goal: tuple[float, float]

    def __post_init__(self):
        if self.cost_map.shape != (self.height, self.width) or self.obstacles.shape != (self.height, self.width):
            raise ConfigurationError("cost_map and obstacles must be (height, width)")
        if not np.all(np.isfinite(self.cost_map)) or np.any(self.cost_map < 0):
            raise ConfigurationError("cell costs must be finite and >= 0")
        if _cell(self.start) == _cell(self.goal):
            raise ConfigurationError("start and goal must be different cells")


def _cell(p) -> tuple[int, int]:
    return int(math.floor(p[0])), int(math.floor(p[1]))


@dataclass
class TrajectoryLibrary:
    """Arc trajectories from the robot cell, stored as densely sampled points."""

    points: list[np.ndarray]  # each (P, 2), x/y in cell units
    step: float

    @classmethod
    def arcs(cls, num: int, start, length: float, max_curvature: float, step: float = 0.25):
        ks = np.linspace(-max_curvature, max_curvature, num) if num > 1 else np.zeros(1)
        s = np.arange(0.0, length + 1e-9, step)
        paths = []
        for k in ks:
            if abs(k) < 1e-12:
                x, y = np.zeros_like(s), s
            else:
                # heading starts along +y and turns at constant curvature k
                x, y = (1 - np.cos(k * s)) / k, np.sin(k * s) / k
            paths.append(np.column_stack([start[0] + x, start[1] + y]))
        return cls(paths, step)

    def __len__(self) -> int:
        return len(self.points)

    def cells(self, a: int) -> list[tuple[int, int]]:
        out = []
        for p in self.points[a]:
            c = _cell(p)
            if not out or out[-1] != c:
                out.append(c)
        return out


def navigation_normalizer(world: GridWorld, library: TrajectoryLibrary, max_cell_cost: float) -> float:
    longest = max((len(p) - 1) * library.step for p in library.points)
    return float(longest * max_cell_cost + math.hypot(world.width, world.height))


def evaluate_trajectories(world: GridWorld, library: TrajectoryLibrary, collision_cost: float):
    """Per-action (cost, collision-free) for one world.

    Cost is the sampled line integral of cell cost along the arc plus the
    straight-line distance from its endpoint to the goal; any sample outside
    the map or inside an obstacle clamps the cost to ``collision_cost``.
    """
    costs = np.empty(len(library))
    ok = np.empty(len(library), dtype=bool)
    gx, gy = world.goal
    for a, pts in enumerate(library.points):
        cx = np.floor(pts[:, 0]).astype(int)
        cy = np.floor(pts[:, 1]).astype(int)
        inside = (cx >= 0) & (cx < world.width) & (cy >= 0) & (cy < world.height)
        if not inside.all() or world.obstacles[cy, cx].any():
            costs[a], ok[a] = collision_cost, False
            continue
        travel = float(np.sum(world.cost_map[cy[1:], cx[1:]]) * library.step)
        to_go = math.hypot(pts[-1, 0] - gx, pts[-1, 1] - gy)
        costs[a], ok[a] = min(travel + to_go, collision_cost), True
    return costs, ok


def navigation_features(world: GridWorld, feature_len: int, radius: float, half_angle: float) -> np.ndarray:
    """Occupancy histogram over angular sectors ahead of the robot, then goal offset."""
    sectors = feature_len - 2
    ys, xs = np.mgrid[0:world.height, 0:world.width]
    dx = xs + 0.5 - world.start[0]
    dy = ys + 0.5 - world.start[1]
    r = np.hypot(dx, dy)
    ang = np.arctan2(dx, dy)  # 0 straight ahead, positive to the right
    window = (r <= radius) & (r > 0.5) & (np.abs(ang) <= half_angle)
    bins = np.clip(((ang + half_angle) / (2 * half_angle) * sectors).astype(int), 0, sectors - 1)
    rough = world.cost_map - world.cost_map.min()
    if rough.max() > 0:
        rough = rough / rough.max()
    value = np.where(world.obstacles, 1.0, 0.25 * rough)
    hist = np.zeros(sectors)
    for k in range(sectors):
        m = window & (bins == k)
        hist[k] = value[m].mean() if m.any() else 0.0
    goal = [(world.goal[0] - world.start[0]) / world.width, (world.goal[1] - world.start[1]) / world.height]
    return np.concatenate([hist, goal])


def _smooth_field(rng, width, height, bumps=6) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width] + 0.5
    out = np.zeros((height, width))
    for _ in range(bumps):
        cx, cy = rng.uniform(0, width), rng.uniform(0, height)
        s = rng.uniform(1.5, 4.0)
        out += np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * s * s))
    return out / out.max() if out.max() > 0 else out


def random_world(rng, cfg: ScenarioConfig) -> GridWorld:
    W, H = cfg.grid_width, cfg.grid_height
    start = (W / 2.0, 0.5)
    obstacles = np.zeros((H, W), dtype=bool)
    ys, xs = np.mgrid[0:H, 0:W] + 0.5
    clear = np.hypot(xs - start[0], ys - start[1]) <= 2.0
    target = cfg.obstacle_density * W * H
    tries = 0
    while obstacles.sum() < target and tries < 10 * W * H:
        tries += 1
        cx, cy = rng.uniform(0, W), rng.uniform(2.0, H)
        rad = rng.uniform(0.8, 2.2)
        obstacles |= np.hypot(xs - cx, ys - cy) <= rad
        obstacles &= ~clear
        if cfg.obstacle_density >= 1.0 and obstacles.sum() >= (~clear).sum():
            break
    cost_map = 1.0 + cfg.noise * 2.0 * _smooth_field(rng, W, H)
    goal = (rng.uniform(0, W), rng.uniform(0.6 * H, H))
    if _cell(goal) == _cell(start):
        goal = (goal[0], H - 0.5)
    return GridWorld(W, H, cost_map, obstacles, start, goal)


def navigation_library(cfg: ScenarioConfig) -> TrajectoryLibrary:
    length = 0.6 * cfg.grid_height
    # widest arc turns through ~100 degrees
    max_curv = 1.75 / length
    return TrajectoryLibrary.arcs(cfg.num_actions, (cfg.grid_width / 2.0, 0.5), length, max_curv)


def generate_navigation_dataset(cfg: ScenarioConfig) -> Dataset:
    if cfg.kind is not ScenarioKind.NAVIGATION:
        raise ConfigurationError("generate_navigation_dataset needs kind = Navigation")
    rng = stream(cfg.seed, "navigation/worlds")
    library = navigation_library(cfg)
    length = (len(library.points[0]) - 1) * library.step
    max_cell = 1.0 + 2.0 * cfg.noise
    envs, normalizer = [], None
    for n in range(cfg.num_envs):
        world = random_world(rng, cfg)
        if normalizer is None:
            normalizer = navigation_normalizer(world, library, max_cell)
        costs, ok = evaluate_trajectories(world, library, normalizer)
        feats = navigation_features(world, cfg.feature_len, radius=length, half_angle=math.radians(110))
        envs.append(Environment(f"nav-{n:05d}", feats, costs, ok))
    ends = np.array([p[-1] for p in library.points])
    descriptors = np.column_stack([(ends[:, 0] - cfg.grid_width / 2.0) / cfg.grid_width, ends[:, 1] / cfg.grid_height])
    labels = tuple(f"arc-{a:02d}" for a in range(cfg.num_actions))
    return Dataset(tuple(envs), ActionLibrary(cfg.num_actions, labels), _scenario_objective(cfg, normalizer), descriptors)


def generate_dataset(cfg: ScenarioConfig) -> Dataset:
    if cfg.kind is ScenarioKind.NAVIGATION:
        return generate_navigation_dataset(cfg)
    return generate_satisficing_dataset(cfg)


def generate_random_dataset(
    seed: int, num_actions: int, num_envs: int, kind: ObjectiveKind, *, success_rate: float = 0.3
) -> Dataset:
    """Small unstructured instance with one-hot environment-id features.

    Costs are uniform on [0, 10) with normalizer 10; success is Bernoulli.
    Both vectors are always filled so either objective can be used.
    """
    rng = stream(seed, "random-instance")
    costs = rng.uniform(0.0, 10.0, size=(num_envs, num_actions))
    success = rng.uniform(size=(num_envs, num_actions)) < success_rate
    eye = np.eye(num_envs)
    envs = tuple(Environment(f"r{n}", eye[n], costs[n], success[n]) for n in range(num_envs))
    obj = ObjectiveSpec.satisficing() if ObjectiveKind(kind) is ObjectiveKind.SATISFICING_PROBABILITY else ObjectiveSpec.best_action_cost(10.0)
    return Dataset(envs, ActionLibrary(num_actions), obj)


def validate_dataset(data: Dataset) -> None:
    """Raise if any environment breaks the core invariants for its objective."""
    obj = data.objective
    for env in data.environments:
        if obj is not None:
            eval_sequence(obj, env, ())
            eval_sequence(obj, env, tuple(range(data.library.size)))


def split_dataset(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    rng = stream(seed, "split")
    order = rng.permutation(len(data))
    cut = int(round(train_fraction * len(data)))
    cut = min(max(cut, 1), len(data) - 1)
    return data.subset(sorted(order[:cut])), data.subset(sorted(order[cut:]))


# -- baselines -------------------------------------------------------------------


def _stable_desc(values: np.ndarray) -> np.ndarray:
    return np.argsort(-np.asarray(values, dtype=np.float64), kind="stable")


def baseline_order(
    data: Dataset,
    strategy: str,
    N: Optional[int] = None,
    *,
    seed: int = 0,
    train: Optional[Dataset] = None,
    predictor: Optional[SequencePredictor] = None,
    obj: Optional[ObjectiveSpec] = None,
) -> list[ActionSeq]:
    """Context-free or first-slot orderings used as comparison baselines.

    Returns one ordering per environment, truncated to ``N`` when given.
    """
    V = data.library.size
    N = V if N is None else N
    if strategy == "random":
        rng = stream(seed, "baseline/random")
        return [tuple(int(a) for a in rng.permutation(V)[:N]) for _ in data.environments]
    if strategy == "success-rate":
        ref = train if train is not None else data
        order = tuple(int(a) for a in _stable_desc(ref.success().mean(axis=0))[:N])
        return [order] * len(data)
    if strategy == "absolute-benefit":
        if predictor is None or predictor.algorithm != "alg2":
            raise ConfigurationError("absolute-benefit ordering needs a trained regression predictor")
        bene = predictor.slot1_benefits(data.features())
        return [tuple(int(a) for a in _stable_desc(row)[:N]) for row in bene]
    if strategy == "static-greedy":
        ref = train if train is not None else data
        objective = obj or ref.objective
        if objective is None:
            raise ConfigurationError("static-greedy needs an objective")
        seq = greedy_expected(objective, ref, N).sequence
        return [seq] * len(data)
    raise ConfigurationError(f"unknown baseline strategy {strategy!r}")


# -- comparison -------------------------------------------------------------------

DEFAULT_METHODS = (
    "random",
    "success-rate",
    "absolute-benefit",
    "static-greedy",
    "conseqopt-alg1",
    "conseqopt-alg2",
)
KNOWN_METHODS = DEFAULT_METHODS + ("oracle-greedy",)


def prefix_metrics(obj: ObjectiveSpec, data: Dataset, seqs: Sequence[Sequence[int]], N: int) -> list[dict]:
    """Failures, mean best cost, mean f and mean depth for every prefix length 1..N.

    Best cost is the minimum action cost inside the prefix; failing actions
    already carry the penalty. Mean depth averages only environments that
    succeeded within the prefix (None if none did).
    """
    has_success = all(e.action_success is not None for e in data.environments)
    has_costs = all(e.action_costs is not None for e in data.environments)
    rows = []
    for n in range(1, N + 1):
        pre = [tuple(s[:n]) for s in seqs]
        row = {"n": n, "mean_f": float(np.mean([eval_sequence(obj, e, p) for e, p in zip(data.environments, pre)]))}
        if has_success:
            depths = [depth_to_success(e, p) for e, p in zip(data.environments, pre)]
            found = [d for d in depths if d is not None]
            row["failures"] = sum(d is None for d in depths)
            row["mean_depth"] = float(np.mean(found)) if found else None
        if has_costs:
            row["mean_cost"] = float(np.mean([e.action_costs[list(p)].min() for e, p in zip(data.environments, pre)]))
        rows.append(row)
    return rows


@dataclass
class ComparisonReport:
    scenario: dict
    num_train: int
    num_test: int
    slots: int
    methods: dict = field(default_factory=dict)  # method -> list of per-prefix rows
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def final(self, method: str, metric: str):
        return self.methods[method][-1][metric]

    def to_text(self) -> str:
        cols = ["method", "n", "failures", "mean_cost", "mean_f", "mean_depth"]
        lines = []
        for m, rows in self.methods.items():
            for r in rows:
                lines.append([m, str(r["n"])] + [_fmt(r.get(c)) for c in cols[2:]])
        widths = [max(len(c), *(len(l[i]) for l in lines)) if lines else len(c) for i, c in enumerate(cols)]
        out = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(cols, widths)))]
        out.append("-" * len(out[0]))
        for l in lines:
            out.append("  ".join(v.rjust(w) if i else v.ljust(w) for i, (v, w) in enumerate(zip(l, widths))))
        out += [f"note: {n}" for n in self.notes]
        return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def run_comparison(
    data_train: Dataset,
    data_test: Dataset,
    methods: Sequence[str],
    N: int,
    *,
    obj: Optional[ObjectiveSpec] = None,
    config: LearnerConfig = LearnerConfig(),
    seed: int = 0,
    scenario: Optional[dict] = None,
) -> ComparisonReport:
    obj = obj or data_train.objective
    if obj is None:
        raise ConfigurationError("run_comparison needs an objective")
    ids_train = {e.id for e in data_train.environments}
    if any(e.id in ids_train for e in data_test.environments):
        raise ConfigurationError("train and test splits share environments")
    for m in methods:
        if m not in KNOWN_METHODS:
            raise ConfigurationError(f"unknown method {m!r}; choose from {list(KNOWN_METHODS)}")
    report = ComparisonReport(scenario or {}, len(data_train), len(data_test), N)
    features = _regression_features(data_train)
    alg2 = None
    if "absolute-benefit" in methods or "conseqopt-alg2" in methods:
        alg2 = train_conseqopt_regression(data_train, obj, N, config, features)
    X_test = data_test.features()
    for m in methods:
        if m == "conseqopt-alg1":
            seqs = train_conseqopt_classification(data_train, obj, N, config).predict(X_test)
        elif m == "conseqopt-alg2":
            seqs = alg2.predict(X_test)
        elif m == "oracle-greedy":
            seqs = [greedy_per_environment(obj, e, data_test.library.size, N).sequence for e in data_test.environments]
        else:
            seqs = baseline_order(data_test, m, N, seed=seed, train=data_train, predictor=alg2, obj=obj)
        report.methods[m] = prefix_metrics(obj, data_test, seqs, N)
    if "static-greedy" in methods:
        report.notes.append("static-greedy stands in for the offline maximum-discrepancy ordering")
    return report


def _regression_features(data: Dataset):
    if data.action_descriptors is not None:
        return DescriptorActionFeatures(data.action_descriptors)
    return BlockedActionFeatures(data.library.size)


def run_scenario(cfg: ScenarioConfig, methods: Sequence[str] = DEFAULT_METHODS) -> ComparisonReport:
    data = generate_dataset(cfg)
    train, test = split_dataset(data, cfg.train_fraction, cfg.seed)
    return run_comparison(
        train, test, methods, cfg.slots,
        obj=data.objective, config=LearnerConfig(lam=cfg.lam), seed=cfg.seed, scenario=cfg.to_dict(),
    )
