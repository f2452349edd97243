"""Dataset files, config loading and run manifests.

A dataset lives in a directory holding ``dataset.jsonl`` (one environment per
line) and ``header.json``. Floats are written with Python's shortest
round-trip repr, so reading back reproduces every value exactly.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional, Union

import numpy as np

from conseqopt.core import ActionLibrary, Dataset, Environment, ObjectiveSpec
from conseqopt.errors import ConfigurationError, DataError, SchemaError

DATASET_FILE = "dataset.jsonl"
HEADER_FILE = "header.json"
MANIFEST_FILE = "manifest.json"

PathLike = Union[str, Path]


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def _floats(values) -> list:
    return [float(v) for v in values]


def header_dict(data: Dataset) -> dict:
    header = {
        "num_actions": data.library.size,
        "feature_len": data.feature_len,
        "num_envs": len(data),
        "objective": None if data.objective is None else data.objective.to_dict(),
    }
    if data.library.labels is not None:
        header["action_labels"] = list(data.library.labels)
    if data.action_descriptors is not None:
        header["action_descriptors"] = data.action_descriptors.tolist()
    return header


def env_line(env: Environment) -> str:
    rec = {"id": env.id, "features": _floats(env.features)}
    if env.action_costs is not None:
        rec["action_costs"] = _floats(env.action_costs)
    if env.action_success is not None:
        rec["action_success"] = [bool(x) for x in env.action_success]
    return json.dumps(rec, sort_keys=True, allow_nan=False, separators=(",", ":"))


def write_dataset(data: Dataset, directory: PathLike) -> dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ds = directory / DATASET_FILE
    hd = directory / HEADER_FILE
    with ds.open("w", encoding="utf-8", newline="\n") as fh:
        for env in data.environments:
            fh.write(env_line(env) + "\n")
    hd.write_text(dumps(header_dict(data)), encoding="utf-8")
    return {"dataset": ds, "header": hd}


def _finite(values, what: str, line: int) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError):
        raise SchemaError(f"line {line}: {what} must be a list of numbers") from None
    if not np.all(np.isfinite(arr)):
        raise DataError(f"line {line}: {what} contains non-finite values")
    return arr


def read_dataset(directory: PathLike) -> Dataset:
    """Load and validate a dataset directory against its header."""
    directory = Path(directory)
    try:
        header = json.loads((directory / HEADER_FILE).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SchemaError(f"{directory / HEADER_FILE} not found") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{HEADER_FILE} line {exc.lineno}: {exc.msg}") from None
    for key in ("num_actions", "feature_len"):
        if key not in header:
            raise SchemaError(f"{HEADER_FILE} missing field {key!r}")
    V, L = int(header["num_actions"]), int(header["feature_len"])
    envs = []
    path = directory / DATASET_FILE
    if not path.exists():
        raise SchemaError(f"{path} not found")
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{DATASET_FILE} line {lineno}: {exc.msg}") from None
            feats = _finite(rec.get("features", []), "features", lineno)
            if feats.shape != (L,):
                raise SchemaError(f"line {lineno}: expected {L} features, got {feats.size}")
            costs = success = None
            if rec.get("action_costs") is not None:
                costs = _finite(rec["action_costs"], "action_costs", lineno)
                if costs.shape != (V,):
                    raise SchemaError(f"line {lineno}: expected {V} action_costs, got {costs.size}")
                if np.any(costs < 0):
                    raise DataError(f"line {lineno}: action_costs must be >= 0")
            if rec.get("action_success") is not None:
                success = np.asarray(rec["action_success"], dtype=bool)
                if success.shape != (V,):
                    raise SchemaError(f"line {lineno}: expected {V} action_success, got {success.size}")
            envs.append(Environment(str(rec.get("id", lineno)), feats, costs, success))
    if not envs:
        raise SchemaError(f"{path} holds no environments")
    if "num_envs" in header and int(header["num_envs"]) != len(envs):
        raise SchemaError(f"header declares {header['num_envs']} environments, file has {len(envs)}")
    obj = header.get("objective")
    try:
        objective = None if obj is None else ObjectiveSpec.from_dict(obj)
    except (ValueError, KeyError) as exc:
        raise SchemaError(f"{HEADER_FILE} objective: {exc}") from None
    desc = header.get("action_descriptors")
    return Dataset(
        tuple(envs),
        ActionLibrary(V, header.get("action_labels")),
        objective,
        None if desc is None else np.asarray(desc, dtype=np.float64),
    )


def load_config(path: PathLike) -> dict:
    """Read a JSON (or, by extension, TOML) config into a dict."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    if path.suffix == ".toml":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    return data


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_file(path: PathLike) -> str:
    return digest_bytes(Path(path).read_bytes())


def digest_obj(obj) -> str:
    return digest_bytes(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8"))


@dataclasses.dataclass
class RunManifest:
    command: str
    config_digest: Optional[str]
    input_digests: dict
    seed: Optional[int]
    artifacts: dict
    timestamp: str = ""

    def write(self, path: PathLike) -> Path:
        path = Path(path)
        if not self.timestamp:
            self.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        path.write_text(dumps(dataclasses.asdict(self)), encoding="utf-8")
        return path


def manifest_for(command: str, artifacts: dict, *, config=None, inputs=None, seed=None) -> RunManifest:
    """Record the digest of every input and output of a run."""
    return RunManifest(
        command=command,
        config_digest=None if config is None else digest_obj(config),
        input_digests={str(p): digest_file(p) for p in (inputs or [])},
        seed=seed,
        artifacts={name: {"path": str(p), "sha256": digest_file(p)} for name, p in artifacts.items()},
    )

