import math

import numpy as np
import pytest

from famsec.delivery import DeliveryTask, RoadNetwork, build_mdp, sample_task
from famsec.mdp import MctsConfig, MctsPolicy, TabularPolicy, value_iteration
from famsec.rollouts import (
    DistSummary,
    EmptySamples,
    RewardSamples,
    discounted_return_check,
    export_samples_csv,
    monte_carlo,
    simulate_episode,
    summarize,
)


@pytest.fixture(scope="module")
def small_task():
    return sample_task(5, n_range=(8, 13))


@pytest.fixture(scope="module")
def small_spec(small_task):
    return build_mdp(small_task)


@pytest.fixture(scope="module")
def vi_policy(small_task, small_spec):
    vt = value_iteration(small_spec, 1e-8)
    return TabularPolicy(spec=small_spec, table=vt.greedy_policy)


class TestMonteCarlo:
    def test_cardinality(self, small_task, vi_policy, small_spec):
        samples = monte_carlo(small_task, vi_policy, 200, base_seed=3, spec=small_spec)
        assert samples.run_count == 200
        assert len(samples.values) == 200
        assert len(samples.terminals) == 200

    def test_deterministic_across_runs(self, small_task, vi_policy, small_spec):
        a = monte_carlo(small_task, vi_policy, 100, base_seed=9, spec=small_spec)
        b = monte_carlo(small_task, vi_policy, 100, base_seed=9, spec=small_spec)
        assert a.values == b.values

    def test_identical_across_worker_counts(self, small_task, vi_policy, small_spec):
        serial = monte_carlo(small_task, vi_policy, 120, base_seed=4, spec=small_spec)
        parallel = monte_carlo(small_task, vi_policy, 120, base_seed=4, workers=2, spec=small_spec)
        assert serial.values == parallel.values
        assert serial.terminals == parallel.terminals

    def test_online_policy_episodes_differ(self, small_task, small_spec):
        policy = MctsPolicy(
            spec=small_spec,
            config=MctsConfig(iterations=40, depth=3, exploration=1000.0, rng_seed=1),
        )
        samples = monte_carlo(small_task, policy, 30, base_seed=8, spec=small_spec)
        assert len(set(samples.values)) > 1

    def test_rewards_within_task_bounds(self, small_task, vi_policy, small_spec):
        samples = monte_carlo(small_task, vi_policy, 300, base_seed=11, spec=small_spec)
        r = small_task.rewards
        lo = small_task.t_max * r.loiter + r.caught
        for v in samples.values:
            assert lo <= v <= r.goal

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            RewardSamples(values=(math.nan,), base_seed=0, run_count=1)


class TestSummarize:
    def test_degenerate_all_equal(self):
        s = RewardSamples(values=(0.0, 0.0, 0.0), base_seed=0, run_count=3)
        ds = summarize(s, 5)
        assert ds.mean == 0.0
        assert ds.std == 0.0
        assert "degenerate" in ds.flags

    def test_simple_stats(self):
        s = RewardSamples(values=(1.0, 2.0, 3.0), base_seed=0, run_count=3)
        ds = summarize(s, 3)
        assert ds.mean == pytest.approx(2.0)
        assert ds.std == pytest.approx(1.0)
        assert ds.stderr == pytest.approx(1.0 / math.sqrt(3))
        assert sum(ds.counts) == 3

    def test_mean_matches_exactly(self, small_task, vi_policy, small_spec):
        samples = monte_carlo(small_task, vi_policy, 500, base_seed=2, spec=small_spec)
        ds = summarize(samples)
        assert ds.mean == pytest.approx(float(np.mean(samples.values)), rel=1e-9)

    def test_bimodal_capture_delivery_histogram(self):
        # shallow solver on the two-route network: captures and deliveries
        # both frequent, so the reward histogram shows two separated modes
        from famsec.experiments import builtin_exp1_task

        task = builtin_exp1_task()
        spec = build_mdp(task)
        policy = MctsPolicy(spec=spec, config=MctsConfig(iterations=100, depth=1, exploration=1000.0, rng_seed=3))
        samples = monte_carlo(task, policy, 800, base_seed=5, spec=spec)
        vals = samples.array()
        assert samples.terminals.count("caught") >= 0.2 * len(vals)
        assert samples.terminals.count("delivered") >= 0.2 * len(vals)
        capture_mode = np.mean(vals < -1800)
        valley = np.mean((vals >= -1800) & (vals < -400))
        delivery_mode = np.mean(vals >= -400)
        assert capture_mode > 2 * valley
        assert delivery_mode > 2 * valley

    def test_empty_rejected(self):
        with pytest.raises(EmptySamples):
            summarize(RewardSamples(values=(), base_seed=0, run_count=0), 3)


class TestCsvExport:
    def test_format(self, tmp_path, small_task, vi_policy, small_spec):
        samples = monte_carlo(small_task, vi_policy, 10, base_seed=6, spec=small_spec)
        path = tmp_path / "samples.csv"
        export_samples_csv(samples, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "episode,seed,cum_reward,terminal"
        assert len(lines) == 11
        first = lines[1].split(",")
        assert first[0] == "0"
        assert first[3] in ("delivered", "caught", "timeout")


class TestDiscountedBridge:
    def test_deterministic_chain_exact(self):
        net = RoadNetwork(n=4, edges=((0, 1), (1, 2)), generator="manual")
        task = DeliveryTask(network=net, adt_start=0, mg_start=3, goal=2, p_trans=1.0, gamma=0.9)
        spec = build_mdp(task)
        vt = value_iteration(spec, 1e-10, max_sweeps=50_000)
        bridge = discounted_return_check(task, vt, 50, base_seed=3, spec=spec)
        assert bridge.empirical_mean == pytest.approx(bridge.vi_value, abs=1e-6)

    def test_statistical_agreement(self, small_task, small_spec):
        vt = value_iteration(small_spec, 1e-8)
        bridge = discounted_return_check(small_task, vt, 4000, base_seed=17, spec=small_spec)
        assert bridge.z_score <= 4.0
