import struct
from collections import OrderedDict
from pathlib import Path

import numpy as np
import pytest

from drlzoo import DQN, PPO, TD3, build_env, call_default_params, checkpoint_load, checkpoint_save, override_params
from drlzoo.construct import IncompatibleAlgorithm, NetListShapeMismatch, construct_agent
from drlzoo.facade import BadMagic, ShapeMismatch, UnknownKey, agent_learn, compare_runs, params_from_json, params_to_json
from drlzoo.facade.checkpoint import encode_checkpoint
from drlzoo.nets import HeadNet, MLP
from drlzoo.tracking import Tracker, read_run, report_csv, trailing_means

GOLDEN = Path(__file__).parent / "golden"


def _clock(times):
    it = iter(times)
    return lambda: next(it)


def golden_tracker(metrics_dir):
    """Scripted three-episode run with a fixed clock."""
    tr = Tracker("DQN", "GridWorld-5x5", {"alg": "DQN"}, metrics_dir, clock=_clock([10.0, 10.25, 10.5, 11.0]),
                 run_id="golden")
    tr.log(12, 0, 0.0, {"q": 0.5}, {"length": 12, "epsilon": 0.9})
    tr.log(20, 1, 1.0, {"q": 0.25}, {"length": 8, "epsilon": 0.5})
    tr.log(27, 2, 0.5, {}, {"length": 7})
    tr.close()
    return tr


def test_golden_jsonl_and_csv(tmp_path):
    tr = golden_tracker(tmp_path)
    assert tr.record.path.read_bytes() == (GOLDEN / "golden.jsonl").read_bytes()
    assert report_csv([tr.record.path]).encode() == (GOLDEN / "golden.csv").read_bytes()


def test_one_episode_one_line(tmp_path):
    tr = Tracker("X", "Y", {}, tmp_path, run_id="one")
    tr.log(5, 0, 1.0)
    tr.close()
    events = read_run(tr.record.path)
    assert len(events) == 1 and events[0]["reward"] == 1.0


def test_torn_final_line_tolerated(tmp_path):
    p = tmp_path / "torn.jsonl"
    p.write_text((GOLDEN / "golden.jsonl").read_text() + '{"run_id": "gol')
    assert len(read_run(p)) == 3


def test_trailing_mean_constant():
    assert trailing_means([3.0] * 250)[-1] == 3.0


def test_default_params_td3():
    env = build_env("Pendulum-v0", "classic_control")
    alg_params, learn_params = call_default_params(env, "classic_control", "TD3")
    assert len(alg_params["net_list"]) == 3
    assert learn_params["max_episodes"] > 0
    with pytest.raises(IncompatibleAlgorithm):
        call_default_params(build_env("GridWorld-5x5", "toy"), "toy", "TD3")


def test_default_params_pure_and_accepted():
    env = build_env("CartPole-v0", "classic_control")
    a, b = call_default_params(env, "classic_control", "PPO"), call_default_params(env, "classic_control", "PPO")
    assert {k: v for k, v in a[0].items() if k != "net_list"} == {k: v for k, v in b[0].items() if k != "net_list"}
    assert a[1] == b[1]
    for na, nb in zip(a[0]["net_list"], b[0]["net_list"]):
        assert all(np.array_equal(x.data, y.data) for x, y in zip(na.parameters(), nb.parameters()))
    construct_agent(env, "PPO", a[0])


def test_override_examples():
    env = build_env("CartPole-v0", "classic_control")
    params = call_default_params(env, "classic_control", "PPO")
    new = override_params(params, {"gamma": 0.9})
    assert new[0]["gamma"] == 0.9
    assert {k: v for k, v in new[0].items() if k != "gamma"} == {k: v for k, v in params[0].items() if k != "gamma"}
    assert params[0]["gamma"] == 0.99
    with pytest.raises(UnknownKey):
        override_params(params, {"gamm": 0.9})


def test_override_net_list():
    env = build_env("CartPole-v0", "classic_control")
    params = call_default_params(env, "classic_control", "PPO")
    rng = np.random.default_rng(0)
    custom = [HeadNet(MLP(4, [32], "tanh", rng), 2, rng=rng), HeadNet(MLP(4, [32], "tanh", rng), 1, rng=rng)]
    assert override_params(params, {"net_list": custom})[0]["net_list"] is custom
    bad = [HeadNet(MLP(4, [32], "tanh", rng), 3, rng=rng), custom[1]]
    with pytest.raises(NetListShapeMismatch):
        override_params(params, {"net_list": bad})


def test_config_json_round_trip():
    env = build_env("GridWorld-5x5", "toy")
    params = override_params(call_default_params(env, "toy", "DQN"), {"lr": 0.01, "max_episodes": 7})
    alg, env2, back = params_from_json(params_to_json(params, "DQN", env))
    assert alg == "DQN" and env2.name == env.name
    assert back[0]["lr"] == 0.01 and back[1]["max_episodes"] == 7 and back[0]["gamma"] == 0.9


def test_checkpoint_byte_layout():
    buf = encode_checkpoint(OrderedDict([("a/w", np.array([1.5], dtype=np.float32))]))
    expected = (b"RLZC" + struct.pack("<II", 1, 1) + struct.pack("<I", 3) + b"a/w"
                + struct.pack("<I", 1) + struct.pack("<I", 1) + struct.pack("<f", 1.5))
    assert buf == expected


def _trained_dqn():
    env = build_env("GridWorld-5x5", "toy")
    agent = DQN(env.observation_space, env.action_space, seed=1)
    agent.learn(env, max_episodes=5, warmup_steps=20, batch_size=16, seed=1)
    return env, agent


def test_checkpoint_round_trip(tmp_path):
    env, agent = _trained_dqn()
    path = checkpoint_save(agent, tmp_path / "agent.rlzc")
    fresh = DQN(env.observation_space, env.action_space, seed=99)
    checkpoint_load(fresh, path)
    for (n1, t1), (n2, t2) in zip(agent.named_tensors().items(), fresh.named_tensors().items()):
        assert n1 == n2 and t1.data.tobytes() == t2.data.tobytes()
    rng = np.random.default_rng(0)
    for _ in range(100):
        obs = np.eye(25, dtype=np.float32)[rng.integers(25)]
        assert agent.act(obs) == fresh.act(obs)


def test_checkpoint_errors(tmp_path):
    env, agent = _trained_dqn()
    path = checkpoint_save(agent, tmp_path / "agent.rlzc")
    other_env = build_env("CartPole-v0", "classic_control")
    with pytest.raises(ShapeMismatch, match="q/"):
        checkpoint_load(DQN(other_env.observation_space, other_env.action_space), path)
    raw = bytearray(path.read_bytes())
    raw[0:4] = b"XXXX"
    (tmp_path / "bad.rlzc").write_bytes(bytes(raw))
    with pytest.raises(BadMagic):
        checkpoint_load(agent, tmp_path / "bad.rlzc")


def test_zero_episodes_valid_record():
    env = build_env("GridWorld-5x5", "toy")
    rec = agent_learn(DQN(env.observation_space, env.action_space), env, "train", max_episodes=0)
    assert len(rec) == 0 and rec.config["alg"] == "DQN"


def test_train_twice_identical(tmp_path):
    env = build_env("CartPole-v0", "classic_control")
    recs = []
    for _ in range(2):
        params = call_default_params(env, "classic_control", "PPO", seed=5)
        agent = PPO(**params[0])
        recs.append(agent.learn(env, "train", **{**params[1], "max_episodes": 8, "metrics_dir": tmp_path}))
    assert recs[0].rewards == recs[1].rewards
    table = compare_runs([recs[0].path, recs[1].path])
    assert all(row["diff_vs_first"] == 0.0 for row in table)
    assert table[0]["trailing_std"] == table[1]["trailing_std"]


def test_test_mode_untrained_matches_random_policy():
    env = build_env("GridWorld-5x5", "toy")
    agent = PPO(env.observation_space, env.action_space, seed=0)
    before = [p.data.copy() for p in agent.parameters()]
    rec = agent.learn(env, "test", max_episodes=400, test_greedy=False, seed=3)
    assert all(np.array_equal(a, p.data) for a, p in zip(before, agent.parameters()))
    # oracle: uniform random actions on a fresh env
    rng = np.random.default_rng(123)
    oracle = []
    for _ in range(2000):
        env.reset(seed=int(rng.integers(2**31)))
        total, done = 0.0, False
        while not done:
            res = env.step(int(rng.integers(4)))
            total, done = total + res.reward, res.done
        oracle.append(total)
    p = np.mean(oracle)
    se = np.sqrt(p * (1 - p) / 400 + p * (1 - p) / 2000)
    assert abs(np.mean(rec.rewards) - p) < 4 * se


def test_compare_runs_keeps_same_named_runs():
    from drlzoo.tracking import ExperimentRecord
    a, b = ExperimentRecord("same", {}), ExperimentRecord("same", {})
    a.events = [{"episode": 0, "reward": 1.0}]
    b.events = [{"episode": 0, "reward": 3.0}]
    table = compare_runs([a, b])
    assert [row["run_id"] for row in table] == ["same", "same#2"]
    assert table[1]["diff_vs_first"] == 2.0
