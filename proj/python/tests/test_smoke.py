"""End-to-end smoke tests for the Python bindings."""

import json
import math
import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import sliceorch  # noqa: E402

REPO = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
TOY = os.path.join(REPO, "scenarios", "toy_cmdp.json")
DEFAULT = os.path.join(REPO, "scenarios", "default_2slice.json")


def test_scenario_loads():
    scen = sliceorch.ScenarioConfig.from_file(DEFAULT)
    assert scen.num_slices == 2
    assert scen.num_domains == 4
    round_trip = sliceorch.ScenarioConfig.from_json_text(scen.to_json_text())
    assert round_trip.hash() == scen.hash()


def test_bad_scenario_raises_config_error():
    with pytest.raises(sliceorch.ConfigError):
        sliceorch.ScenarioConfig.from_json_text('{"domains": []}')


def test_env_step_and_determinism():
    env_a = sliceorch.SliceEnv.from_file(TOY)
    env_b = sliceorch.SliceEnv.from_file(TOY)
    env_a.reset(7)
    env_b.reset(7)
    for _ in range(50):
        out_a = env_a.step([[0.7]])
        out_b = env_b.step([[0.7]])
        assert out_a.reward == out_b.reward
        assert out_a.cost == out_b.cost
        assert out_a.reward <= 0.0
        assert out_a.sla_violated == (out_a.cost >= 0.0)


def test_env_rejects_infeasible_action():
    env = sliceorch.SliceEnv.from_file(TOY)
    env.reset(0)
    with pytest.raises(sliceorch.FeasibilityError):
        env.step([[1.5]])
    with pytest.raises(sliceorch.DimensionError):
        env.step([[0.5, 0.5]])


def test_baseline_action_is_feasible():
    env = sliceorch.SliceEnv.from_file(DEFAULT)
    env.reset(3)
    shares = env.baseline_action(env.state())
    assert len(shares) == 2 and len(shares[0]) == 4
    for col in range(4):
        assert sum(row[col] for row in shares) <= 1.0 + 1e-12
    for row in shares:
        for v in row:
            assert 0.0 <= v <= 1.0


def test_project_action_feasibility():
    rows = sliceorch.project_action([3.0, -2.0, 0.5, 10.0, -4.0, 0.0, 1.0, 2.0], 2, 4)
    for col in range(4):
        s = sum(rows[k][col] for k in range(2))
        assert s <= 1.0 + 1e-12
        for k in range(2):
            assert 0.0 <= rows[k][col] <= 1.0


def test_short_training_round_trip(tmp_path):
    env = sliceorch.SliceEnv.from_file(TOY)
    report, policy = sliceorch.train_safe(env, iterations=3, rollout_len=32, seed=1)
    assert report.iterations == 3
    assert not report.aborted
    csv = report.to_csv()
    assert csv.splitlines()[0] == (
        "iteration,mean_reward,mean_cost,violation_rate,lambda,switch_rate"
    )

    path = str(tmp_path / "policy.bin")
    policy.save(path)
    loaded = sliceorch.GaussianPolicy.load(path)
    probe = [0.1 * (i + 1) for i in range(policy.input_dim)]
    assert loaded.mean(probe) == pytest.approx(policy.mean(probe))


def test_distributed_training_smoke():
    env = sliceorch.SliceEnv.from_file(DEFAULT)
    report = sliceorch.train_distributed(env, iterations=2, rollout_len=32, seed=9)
    assert report.iterations == 2
    assert report.num_agents == 3
    header = report.to_csv().splitlines()[0]
    assert "agent" in header


def test_run_experiment_writes_artifacts(tmp_path):
    cfg = {
        "scenario": TOY,
        "algorithm": "safe",
        "seeds": [2],
        "out_dir": str(tmp_path / "exp"),
        "learner": {"iterations": 2, "rollout_len": 32},
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(cfg))
    reports, checkpoints = sliceorch.run_experiment(str(cfg_path))
    assert len(reports) == 1 and len(checkpoints) == 1
    assert os.path.exists(reports[0])
    assert os.path.exists(checkpoints[0])
    first_row = open(reports[0]).read().splitlines()[1]
    assert all(math.isfinite(float(x)) for x in first_row.split(","))


def test_collect_demonstrations(tmp_path):
    env = sliceorch.SliceEnv.from_file(TOY)
    out = str(tmp_path / "demos.json")
    n = sliceorch.collect_demonstrations(env, 25, [1, 2], out_path=out)
    assert n == 50
    payload = json.loads(open(out).read())
    assert len(payload["records"]) == 50
