import json

import pytest

from conseqopt.cli import main
from conseqopt.io import digest_file, load_config, read_dataset, write_dataset
from conseqopt.errors import ConfigurationError, DataError, SchemaError
from conseqopt.bench import ScenarioConfig, generate_dataset

SMALL = {"kind": "SatisficingSeeds", "num_envs": 60, "num_actions": 8, "feature_len": 9, "clusters": 3, "seed": 5}
SEPARABLE = dict(SMALL, noise=0.0, cluster_failure=0.0, regions="voronoi", num_contexts=5, clusters=8)


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def small_dataset(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", SMALL)
    out = tmp_path / "data"
    assert main(["gen", "--config", cfg, "--out", str(out)]) == 0
    return out


def test_gen_writes_dataset_header_and_manifest(small_dataset):
    lines = (small_dataset / "dataset.jsonl").read_text().splitlines()
    assert len(lines) == 60
    header = json.loads((small_dataset / "header.json").read_text())
    assert header["num_actions"] == 8 and header["feature_len"] == 9
    manifest = json.loads((small_dataset / "manifest.json").read_text())
    assert manifest["seed"] == 5
    assert manifest["artifacts"]["dataset"]["sha256"] == digest_file(small_dataset / "dataset.jsonl")


def test_gen_is_byte_identical(tmp_path, small_dataset):
    again = tmp_path / "again"
    assert main(["gen", "--config", str(tmp_path / "cfg.json"), "--out", str(again)]) == 0
    for name in ("dataset.jsonl", "header.json"):
        assert (again / name).read_bytes() == (small_dataset / name).read_bytes()


def test_gen_bad_config_exit_2(tmp_path, capsys):
    cfg = write_json(tmp_path / "bad.json", {"kind": "Navigation", "obstacle_density": 1.5})
    assert main(["gen", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "obstacle_density" in capsys.readouterr().err
    broken = tmp_path / "broken.json"
    broken.write_text("{\n  \"num_envs\": 3,\n  oops\n}")
    assert main(["gen", "--config", str(broken), "--out", str(tmp_path / "y")]) == 2
    assert "line 3" in capsys.readouterr().err


def test_toml_config(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text('kind = "SatisficingSeeds"\nnum_envs = 12\nnum_actions = 4\nfeature_len = 4\n')
    assert load_config(path)["num_envs"] == 12
    assert main(["gen", "--config", str(path), "--out", str(tmp_path / "d")]) == 0
    path.write_text("num_envs = = 3\n")
    with pytest.raises(ConfigurationError):
        load_config(path)


@pytest.mark.parametrize("algorithm", ["alg1", "alg2"])
def test_train_and_retrain_byte_identical(small_dataset, tmp_path, algorithm):
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    args = ["train", "--dataset", str(small_dataset), "--algorithm", algorithm, "--slots", "3"]
    assert main(args + ["--out", str(m1)]) == 0
    assert main(args + ["--out", str(m2)]) == 0
    assert m1.read_bytes() == m2.read_bytes()
    model = json.loads(m1.read_text())
    assert len(model["slots"]) == 3
    assert (tmp_path / "m1.manifest.json").exists()


def test_train_zero_slots_exit_2(small_dataset, tmp_path):
    assert main(["train", "--dataset", str(small_dataset), "--slots", "0", "--out", str(tmp_path / "m")]) == 2


def test_eval_perfect_model_has_no_depth_one_failures(tmp_path):
    cfg = write_json(tmp_path / "sep.json", SEPARABLE)
    data = tmp_path / "sep"
    assert main(["gen", "--config", cfg, "--out", str(data)]) == 0
    model = tmp_path / "model.json"
    assert main(["train", "--dataset", str(data), "--algorithm", "alg1", "--slots", "2", "--lambda", "1e-8",
                 "--no-standardize", "--no-intercept", "--out", str(model)]) == 0
    out = tmp_path / "metrics.json"
    assert main(["eval", "--model", str(model), "--dataset", str(data), "--out", str(out)]) == 0
    metrics = json.loads(out.read_text())
    assert metrics["prefix"][0]["failures"] == 0
    assert main(["eval", "--model", str(model), "--dataset", str(data), "--format", "text"]) == 0


def test_eval_schema_mismatch_exit_3(small_dataset, tmp_path):
    model = tmp_path / "m.json"
    assert main(["train", "--dataset", str(small_dataset), "--slots", "1", "--out", str(model)]) == 0
    other_cfg = write_json(tmp_path / "o.json", dict(SMALL, feature_len=4))
    other = tmp_path / "other"
    assert main(["gen", "--config", other_cfg, "--out", str(other)]) == 0
    assert main(["eval", "--model", str(model), "--dataset", str(other)]) == 3
    assert main(["eval", "--model", str(tmp_path / "missing.json"), "--dataset", str(other)]) == 3


def test_read_dataset_errors(small_dataset, tmp_path):
    data = read_dataset(small_dataset)
    write_dataset(data, tmp_path / "copy")
    assert (tmp_path / "copy" / "dataset.jsonl").read_bytes() == (small_dataset / "dataset.jsonl").read_bytes()

    lines = (small_dataset / "dataset.jsonl").read_text().splitlines()
    rec = json.loads(lines[0])
    rec["features"] = rec["features"][:-1]
    (tmp_path / "copy" / "dataset.jsonl").write_text("\n".join([json.dumps(rec)] + lines[1:]) + "\n")
    with pytest.raises(SchemaError):
        read_dataset(tmp_path / "copy")

    rec = json.loads(lines[0])
    text = json.dumps(rec).replace(str(rec["features"][0]), "NaN", 1)
    (tmp_path / "copy" / "dataset.jsonl").write_text("\n".join([text] + lines[1:]) + "\n")
    with pytest.raises(DataError):
        read_dataset(tmp_path / "copy")
    model = tmp_path / "m.json"
    assert main(["train", "--dataset", str(tmp_path / "copy"), "--out", str(model)]) == 4

    (tmp_path / "copy" / "dataset.jsonl").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(SchemaError, match="environments"):
        read_dataset(tmp_path / "copy")


def test_descriptors_survive_round_trip(tmp_path):
    data = generate_dataset(ScenarioConfig.navigation(num_envs=5))
    write_dataset(data, tmp_path / "nav")
    back = read_dataset(tmp_path / "nav")
    assert (back.action_descriptors == data.action_descriptors).all()
    assert back.library.labels == data.library.labels
    assert (back.costs() == data.costs()).all()


def test_compare_and_assert_trend(tmp_path, capsys):
    cfg = write_json(tmp_path / "cmp.json", dict(SMALL, num_envs=150))
    out = tmp_path / "cmp"
    rc = main(["compare", "--config", cfg, "--out", str(out), "--format", "json"])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["methods"]) == 6
    assert all(len(rows) == 3 for rows in report["methods"].values())
    assert (out / "report.txt").exists() and (out / "manifest.json").exists()
    capsys.readouterr()
    rc = main(["compare", "--config", cfg, "--out", str(out), "--methods", "random,oracle-greedy"])
    assert rc == 0
    assert main(["compare", "--config", cfg, "--out", str(out), "--methods", "random,psychic"]) == 2
    assert main(["compare", "--config", cfg, "--out", str(out), "--methods", "random", "--assert-trend"]) == 2


def test_assert_trend_exit_codes(tmp_path):
    cfg = write_json(tmp_path / "sat.json", {"seed": 42})
    assert main(["compare", "--config", cfg, "--out", str(tmp_path / "a"), "--assert-trend"]) == 0


def test_assert_trend_gate():
    from conseqopt.bench import ComparisonReport
    from conseqopt.cli import _assert_trend

    def report(ours, rand):
        return ComparisonReport({}, 1, 1, 1, {"random": [{"n": 1, "failures": rand}],
                                             "conseqopt-alg2": [{"n": 1, "failures": ours}]})

    assert _assert_trend(report(3, 5)) == 0
    assert _assert_trend(report(5, 5)) == 1
    assert _assert_trend(report(7, 5)) == 1


def test_verify_bounds(tmp_path, capsys):
    cfg = write_json(tmp_path / "vb.json", {"num_instances": 100, "num_actions": 5, "slots": 3, "num_envs": 10})
    out = tmp_path / "vb"
    assert main(["verify-bounds", "--config", cfg, "--out", str(out)]) == 0
    doc = json.loads((out / "bounds.json").read_text())
    assert doc["clairvoyant_failures"] == 0
    for name in ("clairvoyant_contextual", "clairvoyant_static"):
        s = doc["summary"][name]
        assert s["held"] == s["checked"] == 200
    capsys.readouterr()
    big = write_json(tmp_path / "big.json", {"num_actions": 12, "slots": 8})
    assert main(["verify-bounds", "--config", big, "--out", str(out)]) == 5
    assert "exceeds" in capsys.readouterr().err
    assert main(["verify-bounds", "--config", write_json(tmp_path / "u.json", {"x": 1}), "--out", str(out)]) == 2
