import json
from pathlib import Path

import pytest

from famsec.cli import main, parse_solver
from famsec.mdp import MctsConfig


class TestParseSolver:
    def test_vi(self):
        assert parse_solver("vi") == "vi"

    def test_mcts_full(self):
        cfg = parse_solver("mcts:d=8,its=1000,e=2000,h=12,seed=5")
        assert cfg == MctsConfig(iterations=1000, depth=8, exploration=2000.0,
                                 rollout_horizon=12, rng_seed=5)

    def test_mcts_defaults(self):
        cfg = parse_solver("mcts:d=2")
        assert cfg.depth == 2 and cfg.iterations == 100

    def test_surrogate_path(self):
        assert parse_solver("surrogate:/tmp/m.json") == ("surrogate", "/tmp/m.json")

    def test_garbage(self):
        with pytest.raises(ValueError):
            parse_solver("zzz:1")


@pytest.fixture(scope="module")
def task_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "task.json"
    rc = main(["gen-network", "--seed", "5", "--n-min", "8", "--n-max", "12", "--out", str(out)])
    assert rc == 0
    return out


class TestCli:
    def test_gen_network_writes_valid_doc(self, task_file):
        doc = json.loads(task_file.read_text())
        assert doc["schema_version"] == 1
        assert 8 <= doc["network"]["n"] <= 12

    def test_gen_network_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["gen-network", "--seed", "9", "--out", str(a)]) == 0
        assert main(["gen-network", "--seed", "9", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_assess_report_deterministic_across_workers(self, task_file, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        base = ["assess", "--task", str(task_file), "--zstar", "0", "--runs", "60", "--seed", "3"]
        assert main(base + ["--out", str(out1), "--workers", "1"]) == 0
        assert main(base + ["--out", str(out2), "--workers", "2"]) == 0
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        doc = json.loads((out1 / "report.json").read_text())
        assert -1.0 <= doc["outcome"]["x_o"] <= 1.0
        assert (out1 / "samples.csv").exists()

    def test_assess_profile(self, task_file, tmp_path, capsys):
        rc = main(["assess", "--task", str(task_file), "--runs", "40", "--seed", "2",
                   "--profile=-1000,0,1000"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert [p["z_star"] for p in doc["confidence_profile"]] == [-1000.0, 0.0, 1000.0]

    def test_solverq_measured(self, task_file, tmp_path):
        out = tmp_path / "sq"
        rc = main([
            "solverq", "--task", str(task_file),
            "--trusted", "vi", "--candidate", "mcts:d=2,its=30",
            "--runs", "50", "--seed", "4", "--out", str(out),
        ])
        assert rc == 0
        doc = json.loads((out / "report.json").read_text())
        sq = doc["solver_quality"]
        assert 0.0 < sq["x_s"] < 2.0
        assert sq["delta_mu_convention"] == "candidate_minus_trusted"

    def test_surrogate_train_and_predict(self, tmp_path, capsys):
        out = tmp_path / "surr"
        rc = main([
            "surrogate", "train", "--tasks", "25", "--runs", "6", "--seed", "8",
            "--trusted", "vi", "--epochs", "60", "--n-min", "8", "--n-max", "12",
            "--out", str(out),
        ])
        assert rc == 0
        capsys.readouterr()
        rc = main(["surrogate", "predict", "--model", str(out / "model.json"),
                   "--features", "10,0.5"])
        assert rc == 0
        pred = json.loads(capsys.readouterr().out)
        assert "mu" in pred and pred["sigma"] >= 0

    def test_experiment_synthetic_xo(self, tmp_path):
        out = tmp_path / "xo"
        rc = main(["experiment", "synthetic_xo", "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["panels"]["a"]["outcome"]["x_o"] == 1.0

    def test_missing_task_file_exit_2(self, capsys):
        assert main(["assess", "--task", "/nonexistent.json"]) == 2

    def test_bad_solver_spec_exit_2(self, task_file):
        assert main(["solverq", "--task", str(task_file), "--trusted", "bogus:1"]) == 2

    def test_exp3_without_model_exit_2(self):
        assert main(["experiment", "exp3", "--runs", "5"]) == 2
