import math

import pytest

from famsec.delivery import sample_task
from famsec.experiments import (
    ExperimentSpec,
    MissingSurrogate,
    brier_score,
    builtin_exp1_task,
    builtin_exp2_task,
    builtin_exp34_task,
    calibration_experiment,
    depth_sweep,
    env_difficulty_tasks,
    run_env_difficulty,
    run_experiment,
    run_surrogate_pipeline,
    run_synthetic_xo,
    run_synthetic_xs,
    success_probability,
)
from famsec.mdp import TabularPolicy, value_iteration
from famsec.reports import dumps_report
from famsec.rollouts import RewardSamples
from famsec.surrogate import MlpConfig, TaskSampler


class TestBrier:
    def test_perfect_predictions(self):
        assert brier_score([1.0, 0.0, 1.0], [1, 0, 1]) == 0.0

    def test_constant_half(self):
        assert brier_score([0.5, 0.5, 0.5], [1, 0, 1]) == pytest.approx(0.25)

    def test_hand_computed(self):
        assert brier_score([0.8, 0.3], [1, 0]) == pytest.approx(0.065)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            brier_score([0.5], [1, 0])

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            brier_score([1.5], [1])


class TestSuccessProbability:
    def test_all_success(self):
        s = RewardSamples(values=(1800.0,) * 4, base_seed=0, run_count=4)
        assert success_probability(s) == 1.0

    def test_half(self):
        s = RewardSamples(values=(-2200.0, 1800.0), base_seed=0, run_count=2)
        assert success_probability(s) == 0.5

    def test_counting_oracle(self):
        vals = (-5.0, 0.0, 3.0, -1.0, 10.0)
        s = RewardSamples(values=vals, base_seed=0, run_count=5)
        assert success_probability(s) == sum(v >= 0 for v in vals) / 5


class TestSyntheticSuites:
    def test_xo_panels_exact(self):
        panels = run_synthetic_xo()
        assert set(panels) == set("abcdefghijkl")
        for name, panel in panels.items():
            assert panel["error"] < 1e-9, name

    def test_xs_directions(self):
        cases = {c["case"]: c["solver_quality"]["x_s"] for c in run_synthetic_xs()}
        assert cases["identical"] == 1.0
        assert cases["worse_tight_range"] < cases["worse_wide_range"] < 1.0
        assert 1.0 < cases["better_wide_range"] < cases["better_tight_range"] < 2.0


class TestEnvDifficulty:
    def test_impossible_has_no_breakeven_outcome(self):
        tasks = env_difficulty_tasks()
        imp = tasks["impossible"]
        # even a perfect straight run lands below the break-even standard
        dist = 13
        best = (dist - 1) * imp.rewards.loiter + imp.rewards.goal
        assert best < 0

    def test_ordering_small_batch(self):
        rows, _ = run_env_difficulty(150, base_seed=21)
        by_name = {name: x_o for name, x_o, _, _ in rows}
        assert by_name["impossible"] == -1.0
        assert by_name["impossible"] < by_name["hard"] < by_name["easy"]


class TestDepthSweep:
    def test_smoke_and_report_determinism(self):
        task = builtin_exp1_task()
        spec = ExperimentSpec(
            id="exp1", m_runs=60, base_seed=3,
            params={"depths": (1, 6), "trusted_depth": 6, "its": 30},
        )
        doc_a, artifacts_a = run_experiment(spec)
        doc_b, _ = run_experiment(spec)
        assert dumps_report(doc_a) == dumps_report(doc_b)
        rows = artifacts_a["exp1_sweep.csv"][1]
        assert [r[0] for r in rows] == [1, 6]
        for row in rows:
            assert 0.0 < row[1] < 2.0

    def test_worker_count_invariance(self):
        task = builtin_exp1_task()
        rows1, *_ = depth_sweep(task, (2,), 2, 20, 1000.0, 40, base_seed=5, workers=1)
        rows2, *_ = depth_sweep(task, (2,), 2, 20, 1000.0, 40, base_seed=5, workers=2)
        assert rows1 == rows2

    def test_exp2_builtin_loads(self):
        task = builtin_exp2_task()
        assert task.network.n == 45

    def test_exp2_qualitative_anchor(self):
        # candidate at the trusted depth sits in the parity band while at
        # least one shallow solver scores clearly below it
        task = builtin_exp2_task()
        rows, *_ = depth_sweep(task, (1, 25), 25, 100, 2000.0, 150, base_seed=3, workers=2)
        xs = {d: x for d, x, *_ in rows}
        assert 0.9 <= xs[25] <= 1.1
        assert xs[1] < 0.95

    def test_exp34_builtin_overrides(self):
        task = builtin_exp34_task(0.3)
        assert task.p_trans == 0.3
        assert task.gamma == 0.95
        assert task.rewards.loiter == -100.0
        assert task.network == builtin_exp1_task().network


class TestSurrogateExperiments:
    def test_exp3_requires_model(self):
        with pytest.raises(MissingSurrogate):
            run_experiment(ExperimentSpec(id="exp3", base_seed=1))

    def test_exp3_with_tiny_model(self):
        model, data, hold, corr = run_surrogate_pipeline(
            task_count=40, m_runs=8, trusted_config="vi",
            mlp_config=MlpConfig(epochs=120, rng_seed=4),
            base_seed=11, sampler=TaskSampler(n_range=(8, 14)),
        )
        spec = ExperimentSpec(
            id="exp3", m_runs=25, base_seed=5,
            params={"model": model, "p_grid": [0.25, 0.75], "depths": (1,), "its": 25},
        )
        doc, artifacts = run_experiment(spec)
        rows = artifacts["exp3_sweep.csv"][1]
        assert len(rows) == 2
        for row in rows:
            assert 0.0 < row[3] < 2.0

    def test_pipeline_report_fields(self):
        spec = ExperimentSpec(
            id="surrogate_pipeline", m_runs=6, base_seed=2,
            params={
                "task_count": 25, "trusted": "vi",
                "mlp": MlpConfig(epochs=60, rng_seed=1),
                "sampler": TaskSampler(n_range=(8, 12)),
            },
        )
        doc, artifacts = run_experiment(spec)
        assert doc["dataset"]["generated"] == 25
        assert doc["dataset"]["accepted"] == doc["training"]["rows"] + doc["holdout"]["rows"]
        assert "training_curve_mean.csv" in artifacts
        assert doc["dataset"]["accepted"] < 25 or not doc["dataset"]["rejections"]


class TestCalibration:
    def test_smoke_and_baselines(self):
        tasks = [sample_task(100 + i, n_range=(8, 12)) for i in range(20)]

        def vi_policy(spec):
            return TabularPolicy(spec=spec, table=value_iteration(spec, 1e-6).greedy_policy)

        result = calibration_experiment(tasks, vi_policy, m_assess=60, m_truth=1, base_seed=9)
        assert 0.0 <= result["brier_model"] <= 1.0
        assert result["brier_constant_half"] == pytest.approx(0.25)
        assert len(result["per_task"]) == 20

    def test_batch_too_small(self):
        with pytest.raises(ValueError):
            calibration_experiment([], lambda s: None, 10, 1, 0)

    def test_degenerate_all_success_zero_brier(self):
        assert brier_score([1.0] * 5, [1] * 5) == 0.0


class TestDispatcher:
    def test_unknown_id_rejected(self):
        with pytest.raises(ValueError):
            ExperimentSpec(id="nope")

    def test_synthetic_xo_report(self):
        doc, artifacts = run_experiment(ExperimentSpec(id="synthetic_xo"))
        assert doc["kind"] == "experiment:synthetic_xo"
        assert len(artifacts["synthetic_xo.csv"][1]) == 12

    def test_env_difficulty_report(self):
        doc, artifacts = run_experiment(ExperimentSpec(id="env_difficulty", m_runs=60, base_seed=4))
        assert set(doc["environments"]) == {"impossible", "hard", "easy"}
