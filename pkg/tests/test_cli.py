import json

import numpy as np
import pytest

from planscreen.cli import main
from planscreen.config import ConfigError, parse_config, resolve

FAST = [
    "--set", "task.n_episodes=40",
    "--set", "train.epochs=2",
    "--set", "train.batch_size=8",
    "--set", "train.lr=0.001",
    "--set", "dims.feat=8", "--set", "dims.det=8",
    "--set", "dims.stoch=4", "--set", "dims.pool=8",
    "--set", "dims.n_prototypes=2",
    "--set", "eval.runs=1",
]


class TestParseConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{}")
        cfg = parse_config(p)
        assert cfg == parse_config(None)
        assert cfg["train"]["lr"] == 1e-4

    def test_override_beats_file(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"train": {"lr": 0.5}}))
        cfg = parse_config(p, overrides=["train.lr=0.25"])
        assert cfg["train"]["lr"] == 0.25

    def test_unknown_field_named(self):
        with pytest.raises(ConfigError, match="lrr"):
            parse_config(None, overrides=["lrr=1"])

    def test_unknown_nested_field_named(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"train": {"lrr": 1}}))
        with pytest.raises(ConfigError, match="train.lrr"):
            parse_config(p)

    def test_type_mismatch_reports_path(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"train": {"epochs": "many"}}))
        with pytest.raises(ConfigError, match="train.epochs"):
            parse_config(p)

    def test_seed_flag_overrides_all_seeds(self):
        cfg = parse_config(None, seed=99)
        assert all(v == 99 for v in cfg["seeds"].values())

    def test_resolve_fills_task_defaults(self):
        cfg = parse_config(None, overrides=["task.kind=replacement"])
        rc = resolve(cfg)
        assert rc["task"]["horizon"] == 48
        assert rc["task"]["sigma_plan"] == 0.006
        assert rc["dims"]["obs"] == 9

    def test_bad_model_kind(self):
        with pytest.raises(ConfigError):
            parse_config(None, overrides=["train.model=dvd"])


class TestDispatch:
    def test_unknown_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_gen_data_line_count(self, tmp_path, capsys):
        ds = tmp_path / "eps.jsonl"
        rv = main(["gen-data", "--out", str(tmp_path / "out"),
                   "--set", "task.n_episodes=100",
                   "--set", f"paths.dataset={ds}"])
        assert rv == 0
        lines = [l for l in ds.read_text().splitlines() if l.strip()]
        assert len(lines) == 100
        assert (tmp_path / "out" / "resolved_config.json").exists()

    def test_runtime_error_exits_1(self, tmp_path, capsys):
        rv = main(["train", "--out", str(tmp_path),
                   "--set", "paths.dataset=/nonexistent/file.jsonl"])
        assert rv == 1
        assert "error:" in capsys.readouterr().err


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Dataset, training run, and checkpoint shared by the slow CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    ds = root / "eps.jsonl"
    assert main(["gen-data", "--out", str(root / "gen"),
                 *FAST, "--set", f"paths.dataset={ds}"]) == 0
    train_out = root / "train"
    assert main(["train", "--out", str(train_out),
                 *FAST, "--set", f"paths.dataset={ds}"]) == 0
    return root, ds, train_out


class TestTrainCommand:
    def test_outputs(self, workspace):
        root, ds, train_out = workspace
        assert (train_out / "metrics.jsonl").exists()
        assert (train_out / "timing.jsonl").exists()
        assert (train_out / "train_summary.json").exists()
        assert (train_out / "checkpoints" / "top_0.npz").exists()
        assert (train_out / "checkpoints" / "top_0.json").exists()
        rows = [json.loads(l) for l in (train_out / "metrics.jsonl").open()]
        assert [r["epoch"] for r in rows] == [1, 2]
        assert all("wall_time_s" not in r for r in rows)
        assert all("val_balanced_accuracy" in r for r in rows)

    def test_rerun_from_echoed_config_reproduces_metrics(self, workspace, tmp_path):
        root, ds, train_out = workspace
        echoed = train_out / "resolved_config.json"
        out2 = tmp_path / "rerun"
        assert main(["train", "--config", str(echoed), "--out", str(out2),
                     "--set", f"paths.dataset={ds}"]) == 0
        assert (out2 / "metrics.jsonl").read_bytes() == \
            (train_out / "metrics.jsonl").read_bytes()

    def test_input_dataset_not_mutated(self, workspace):
        root, ds, train_out = workspace
        before = ds.read_bytes()
        assert main(["eval", "--out", str(root / "eval_tmp"),
                     *FAST, "--set", f"paths.dataset={ds}"]) == 0
        assert ds.read_bytes() == before


class TestEvalAndPredict:
    def test_eval_report(self, workspace):
        root, ds, train_out = workspace
        out = root / "eval"
        assert main(["eval", "--out", str(out),
                     *FAST, "--set", f"paths.dataset={ds}"]) == 0
        report = json.loads((out / "eval_report.json").read_text())
        assert report["model"] == "firp"
        assert len(report["accuracies"]) == 1
        assert 0.0 <= report["mean"] <= 1.0

    def test_predict_json(self, workspace, capsys):
        root, ds, train_out = workspace
        ckpt = train_out / "checkpoints" / "top_0.npz"
        rv = main(["predict", "--out", str(root / "pred"),
                   *FAST,
                   "--set", f"paths.dataset={ds}",
                   "--set", f"paths.checkpoint={ckpt}",
                   "--set", "predict.episode_index=3"])
        assert rv == 0
        out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert 0.0 < out["p"] < 1.0
        assert out["episode_index"] == 3
        assert out["accepted"] == (out["p"] >= 0.5)

    def test_predict_bad_index(self, workspace, capsys):
        root, ds, train_out = workspace
        ckpt = train_out / "checkpoints" / "top_0.npz"
        rv = main(["predict", "--out", str(root / "pred2"),
                   *FAST,
                   "--set", f"paths.dataset={ds}",
                   "--set", f"paths.checkpoint={ckpt}",
                   "--set", "predict.episode_index=999"])
        assert rv == 1

    def test_replan_smoke(self, workspace):
        root, ds, train_out = workspace
        out = root / "replan"
        ckpt = train_out / "checkpoints"
        rv = main(["replan", "--out", str(out),
                   *FAST,
                   "--set", f"paths.checkpoint={ckpt}",
                   "--set", "replan.n_trials=4"])
        assert rv == 0
        table = json.loads((out / "replan_report.json").read_text())
        assert [v["variant"] for v in table["variants"]] == ["baseline", "screened"]
        assert (out / "replan_report.csv").exists()


class TestGradcheckCommand:
    def test_default_dims_pass(self, tmp_path, capsys):
        rv = main(["gradcheck", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert rv == 0
        assert "gradcheck passed" in out
