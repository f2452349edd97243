"""Command line entry point: ``conseqopt {gen,train,eval,compare,verify-bounds}``.

Exit codes: 0 success, 1 failed assertion (--assert-trend or a violated
clairvoyant bound), 2 config, 3 schema, 4 data, 5 brute-force guard.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from conseqopt.bench import (
    DEFAULT_METHODS,
    KNOWN_METHODS,
    ScenarioConfig,
    generate_dataset,
    prefix_metrics,
    run_scenario,
    validate_dataset,
)
from conseqopt.errors import ConfigurationError, ConSeqOptError, SchemaError
from conseqopt.io import (
    HEADER_FILE,
    MANIFEST_FILE,
    dumps,
    load_config,
    manifest_for,
    read_dataset,
    write_dataset,
)
from conseqopt.learning import (
    BlockedActionFeatures,
    DescriptorActionFeatures,
    LearnerConfig,
    SequencePredictor,
    reduction_slack,
    train_conseqopt_classification,
    train_conseqopt_regression,
)
from conseqopt.verify import BoundSuiteConfig, clairvoyant_failures, run_bound_suite, summarize


def _scenario(args) -> tuple[ScenarioConfig, dict]:
    raw = load_config(args.config)
    if args.seed is not None:
        raw = dict(raw, seed=args.seed)
    try:
        return ScenarioConfig.from_dict(raw), raw
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from None


def cmd_gen(args) -> int:
    cfg, raw = _scenario(args)
    data = generate_dataset(cfg)
    validate_dataset(data)
    out = Path(args.out)
    paths = write_dataset(data, out)
    manifest_for("gen", paths, config=cfg.to_dict(), inputs=[args.config], seed=cfg.seed).write(out / MANIFEST_FILE)
    print(f"wrote {len(data)} environments to {paths['dataset']}")
    return 0


def _learner(args) -> LearnerConfig:
    return LearnerConfig(
        lam=args.lam,
        standardize=not args.no_standardize,
        fit_intercept=not args.no_intercept,
        drop_saturated=args.drop_saturated,
    )


def cmd_train(args) -> int:
    if args.slots < 1:
        raise ConfigurationError(f"--slots must be >= 1, got {args.slots}")
    data = read_dataset(args.dataset)
    obj = data.objective
    if obj is None:
        raise SchemaError(f"{HEADER_FILE} declares no objective")
    validate_dataset(data)
    config = _learner(args)
    if args.algorithm == "alg1":
        pred = train_conseqopt_classification(data, obj, args.slots, config)
    else:
        features = (
            DescriptorActionFeatures(data.action_descriptors)
            if data.action_descriptors is not None
            else BlockedActionFeatures(data.library.size)
        )
        pred = train_conseqopt_regression(data, obj, args.slots, config, features)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    pred.save(out)
    inputs = [Path(args.dataset) / "dataset.jsonl", Path(args.dataset) / HEADER_FILE]
    manifest_for("train", {"model": out}, config=dataclasses.asdict(config), inputs=inputs).write(
        out.with_suffix(".manifest.json")
    )
    for row in pred.training_report:
        extra = f"  mse={row['mse']:.6g}" if "mse" in row else ""
        print(f"slot {row['slot']}: loss={row['empirical_loss']:.6g}  f={row['expected_value']:.6f}{extra}")
    if pred.algorithm == "alg2":
        slack = reduction_slack(pred.training_report, pred.library_size)
        print("reduction slack per slot: " + ", ".join(f"{s:.6g}" for s in slack))
    return 0


def _load_model(path) -> SequencePredictor:
    try:
        return SequencePredictor.load(path)
    except FileNotFoundError:
        raise SchemaError(f"model file {path} not found") from None
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"model file {path} is malformed: {exc}") from None


def cmd_eval(args) -> int:
    pred = _load_model(args.model)
    data = read_dataset(args.dataset)
    if data.library.size != pred.library_size or data.feature_len != pred.feature_len:
        raise SchemaError(
            f"model expects |V|={pred.library_size}, L={pred.feature_len}; "
            f"dataset has |V|={data.library.size}, L={data.feature_len}"
        )
    seqs = pred.predict(data.features())
    metrics = {
        "algorithm": pred.algorithm,
        "num_envs": len(data),
        "prefix": prefix_metrics(pred.objective, data, seqs, pred.N),
    }
    text = dumps(metrics) if args.format == "json" else _metrics_table(metrics["prefix"])
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _metrics_table(rows) -> str:
    cols = [c for c in ("n", "failures", "mean_cost", "mean_f", "mean_depth") if c in rows[0]]
    lines = ["  ".join(f"{c:>10}" for c in cols)]
    for r in rows:
        lines.append("  ".join(f"{r[c]:>10.4f}" if isinstance(r[c], float) else f"{str(r[c]):>10}" for c in cols))
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    cfg, raw = _scenario(args)
    methods = tuple(m.strip() for m in args.methods.split(",")) if args.methods else DEFAULT_METHODS
    for m in methods:
        if m not in KNOWN_METHODS:
            raise ConfigurationError(f"--methods: unknown method {m!r}; choose from {', '.join(KNOWN_METHODS)}")
    report = run_scenario(cfg, methods)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jpath, tpath = out / "report.json", out / "report.txt"
    jpath.write_text(dumps(report.to_dict()), encoding="utf-8")
    tpath.write_text(report.to_text(), encoding="utf-8")
    manifest_for("compare", {"report_json": jpath, "report_text": tpath}, config=cfg.to_dict(),
                 inputs=[args.config], seed=cfg.seed).write(out / MANIFEST_FILE)
    sys.stdout.write(report.to_text() if args.format == "text" else dumps(report.to_dict()))
    if args.assert_trend:
        return _assert_trend(report)
    return 0


def _assert_trend(report) -> int:
    ours = [m for m in ("conseqopt-alg2", "conseqopt-alg1") if m in report.methods]
    if not ours or "random" not in report.methods:
        raise ConfigurationError("--assert-trend needs 'random' and a conseqopt method")
    metric = "failures" if "failures" in report.methods["random"][-1] else "mean_cost"
    ok = all(report.final(m, metric) < report.final("random", metric) for m in ours)
    print(f"trend {'holds' if ok else 'FAILS'}: {metric} at n={report.slots}")
    return 0 if ok else 1


def cmd_verify_bounds(args) -> int:
    raw = load_config(args.config) if args.config else {}
    if args.seed is not None:
        raw = dict(raw, seed=args.seed)
    try:
        cfg = BoundSuiteConfig.from_dict(raw)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
    cfg.check_size()
    results = run_bound_suite(cfg)
    summary = summarize(results)
    failures = clairvoyant_failures(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bounds.json"
    payload = {
        "config": dataclasses.asdict(cfg),
        "summary": summary,
        "clairvoyant_failures": failures,
        "notes": [
            "empirical_slot_loss slacks stand in for the unobservable best-in-class regret",
            "reduction slacks plug training MSE in for the squared-loss regret",
        ],
        "instances": [r.to_dict() for r in results],
    }
    path.write_text(dumps(payload), encoding="utf-8")
    inputs = [args.config] if args.config else []
    manifest_for("verify-bounds", {"bounds": path}, config=dataclasses.asdict(cfg), inputs=inputs,
                 seed=cfg.seed).write(out / MANIFEST_FILE)
    width = max(len(k) for k in summary)
    for name, s in summary.items():
        print(f"{name:<{width}}  held {s['held']}/{s['checked']}  min margin {s['min_margin']:+.3e}")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conseqopt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train a sequence predictor")
    t.add_argument("--dataset", required=True, help="dataset directory")
    t.add_argument("--algorithm", choices=("alg1", "alg2"), default="alg1")
    t.add_argument("--slots", type=int, default=3)
    t.add_argument("--lambda", dest="lam", type=float, default=1e-6)
    t.add_argument("--no-standardize", action="store_true")
    t.add_argument("--no-intercept", action="store_true")
    t.add_argument("--drop-saturated", action="store_true")
    t.add_argument("--out", required=True, help="model JSON path")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a model on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--out")
    e.add_argument("--format", choices=("json", "text"), default="json")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("compare", help="generate, split, train and compare methods")
    c.add_argument("--config", required=True)
    c.add_argument("--methods", help="comma separated; default: " + ",".join(DEFAULT_METHODS))
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int)
    c.add_argument("--assert-trend", action="store_true")
    c.add_argument("--format", choices=("json", "text"), default="text")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("verify-bounds", help="check greedy and reduction bounds on random instances")
    v.add_argument("--config")
    v.add_argument("--out", required=True)
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_verify_bounds)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConSeqOptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
