import math
from collections import OrderedDict

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from drlzoo.envs import (Box, DictSpace, Discrete, EpisodeFinished, InvalidAction, UnknownEnvironment,
                         build_env, list_envs, pendulum_reward, space_contains, space_sample)
from oracles import cartpole_step, value_iteration

ALL_ENVS = list_envs()


def test_registry_lists_five_builtins():
    assert set(ALL_ENVS) == {
        ("CartPole-v0", "classic_control"), ("Pendulum-v0", "classic_control"),
        ("GridWorld-5x5", "toy"), ("PixelGrid-8x8", "toy"), ("HybridReach", "toy"),
    }


def test_pendulum_has_continuous_1d_action():
    env = build_env("Pendulum-v0", "classic_control")
    assert isinstance(env.action_space, Box) and env.action_space.shape == (1,)


def test_gridworld_spaces():
    env = build_env("GridWorld-5x5", "toy")
    assert env.action_space == Discrete(4)
    assert env.observation_space.shape == (25,)


def test_unknown_env_lists_names():
    with pytest.raises(UnknownEnvironment, match="GridWorld-5x5"):
        build_env("NoSuchEnv", "toy")


def test_gridworld_reset_is_start_cell():
    obs = build_env("GridWorld-5x5", "toy").reset()
    expected = np.zeros(25, dtype=np.float32)
    expected[0] = 1.0
    assert np.array_equal(obs, expected)


def test_pendulum_reset_deterministic():
    env = build_env("Pendulum-v0", "classic_control")
    assert np.array_equal(env.reset(seed=7), env.reset(seed=7))


def test_cartpole_reset_range():
    env = build_env("CartPole-v0", "classic_control")
    env.reset(seed=0)
    states = np.array([env.reset() for _ in range(10_000)])
    assert states.min() >= -0.05 and states.max() <= 0.05
    # every component actually spreads over the interval
    assert (states.max(0) - states.min(0) > 0.09).all()


def test_pendulum_origin_reward_zero():
    env = build_env("Pendulum-v0", "classic_control")
    env.reset(seed=0)
    env.state = np.array([0.0, 0.0])
    assert env.step(np.array([0.0], dtype=np.float32)).reward == 0.0


def test_gridworld_goal_transition():
    env = build_env("GridWorld-5x5", "toy")
    env.reset()
    env.pos = (4, 3)
    res = env.step(3)
    assert res.reward == 1.0 and res.done
    assert res.observation.argmax() == 24


def test_cartpole_push_right_falls_and_matches_oracle():
    env = build_env("CartPole-v0", "classic_control")
    env.reset(seed=0)
    env.state = np.zeros(4)
    state = (0.0, 0.0, 0.0, 0.0)
    for t in range(50):
        res = env.step(1)
        state, done = cartpole_step(state, 1)
        assert np.allclose(res.observation, np.array(state, dtype=np.float32), atol=1e-6)
        assert res.done == done
        if done:
            break
    assert done and t < 49


def test_invalid_discrete_action():
    env = build_env("GridWorld-5x5", "toy")
    env.reset()
    with pytest.raises(InvalidAction):
        env.step(4)


def test_box_action_clipped_with_flag():
    env = build_env("Pendulum-v0", "classic_control")
    env.reset(seed=0)
    res = env.step(np.array([5.0], dtype=np.float32))
    assert res.info.get("clipped") == "true"


def test_step_after_done_raises():
    env = build_env("GridWorld-5x5", "toy")
    env.reset()
    env.pos = (4, 3)
    env.step(3)
    with pytest.raises(EpisodeFinished):
        env.step(0)


def test_horizon_truncates():
    env = build_env("GridWorld-5x5", "toy")
    env.reset()
    for _ in range(100):
        res = env.step(0)
    assert res.done and res.info.get("truncated") == "true"


def test_discrete_sample_frequencies():
    rng = np.random.default_rng(0)
    draws = np.array([space_sample(Discrete(4), rng) for _ in range(100_000)])
    freq = np.bincount(draws, minlength=4) / len(draws)
    assert np.all(np.abs(freq - 0.25) < 0.01)


def test_discrete_one_always_zero():
    rng = np.random.default_rng(1)
    assert {space_sample(Discrete(1), rng) for _ in range(50)} == {0}


def test_contains_cases():
    assert space_contains(Discrete(4), 3) and not space_contains(Discrete(4), 4)
    assert space_contains(Box([-2.0], [2.0], (1,)), [0.5])
    d = DictSpace(OrderedDict(state=Box(-1, 1, (4,)), img=Box(0, 1, (2, 2, 1))))
    assert not space_contains(d, {"state": np.zeros(4, dtype=np.float32)})


def test_nested_dict_rejected():
    with pytest.raises(ValueError):
        DictSpace({"a": DictSpace({"b": Discrete(2)})})


@given(st.integers(0, 2**31 - 1))
def test_box_sample_contained(seed):
    rng = np.random.default_rng(seed)
    box = Box([-1.0, 0.0], [1.0, 3.0])
    assert space_contains(box, space_sample(box, rng))


@pytest.mark.parametrize("name,env_type", ALL_ENVS)
def test_rollouts_reproducible_and_valid(name, env_type):
    def run(seed):
        env = build_env(name, env_type)
        rng = np.random.default_rng(seed)
        obs = [env.reset(seed=seed)]
        rewards = []
        for _ in range(60):
            res = env.step(env.action_space.sample(rng))
            assert space_contains(env.observation_space, res.observation)
            assert math.isfinite(res.reward)
            obs.append(res.observation)
            rewards.append(res.reward)
            if res.done:
                obs.append(env.reset())
        return obs, rewards

    a, b = run(3), run(3)
    assert a[1] == b[1]
    for x, y in zip(a[0], b[0]):
        if isinstance(x, dict):
            assert all(np.array_equal(x[k], y[k]) for k in x)
        else:
            assert np.array_equal(x, y)


@given(st.floats(-50, 50), st.floats(-8, 8), st.floats(-2, 2))
def test_pendulum_reward_bounds(theta, theta_dot, u):
    r = pendulum_reward(theta, theta_dot, u)
    assert -(math.pi ** 2 + 0.1 * 64 + 0.001 * 4) - 1e-9 <= r <= 0.0


def test_gridworld_optimal_return_is_gamma_pow_7():
    Q = value_iteration(0.9)
    assert Q[0].max() == pytest.approx(0.9 ** 7, abs=1e-12)
    assert 0.9 ** 7 == pytest.approx(0.47830, abs=1e-5)
