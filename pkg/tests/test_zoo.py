import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from drlzoo.envs import Box, Discrete, build_env
from drlzoo.ndiff import Tensor, backward, finite_diff_check, ops
from drlzoo.ndiff.tensor import ShapeMismatch
from drlzoo.zoo import (ALGORITHMS, PPO, TD3, BadHyperParam, BadIndex, BufferTooSmall, DQN, LengthMismatch,
                        ReplayBuffer, SumTree, UnknownKey, compute_gae, deterministic_actor_loss, dueling_combine,
                        per_update_priorities, policy_gradient_loss, ppo_clip_loss, replay_sample, sac_alpha_loss,
                        soft_update, td3_smoothed_target, td_target, train_step)
from oracles import gae_bruteforce

SPACE = Box(-1.0, 1.0, (1,))


def _buffer(n, prioritized=True, alpha=1.0):
    buf = ReplayBuffer(SPACE, Discrete(2), capacity=max(n, 1), prioritized=prioritized, alpha=alpha)
    for i in range(n):
        buf.add(np.zeros(1, np.float32), 0, float(i), np.zeros(1, np.float32), False)
    return buf


# ---- replay ----

def test_per_frequencies_match_priorities():
    buf = _buffer(2)
    buf.set_priority(0, 1.0)
    buf.set_priority(1, 3.0)
    rng = np.random.default_rng(0)
    draws = np.array([buf.sample_index(rng) for _ in range(100_000)])
    assert abs((draws == 1).mean() - 0.75) < 0.01


def test_per_frequencies_general_alpha():
    pri = np.array([0.5, 2.0, 1.0, 4.0, 0.1])
    alpha = 0.6
    buf = _buffer(len(pri), alpha=alpha)
    for i, p in enumerate(pri):
        buf.set_priority(i, p)
    rng = np.random.default_rng(1)
    draws = np.array([buf.sample_index(rng) for _ in range(100_000)])
    expected = pri ** alpha / (pri ** alpha).sum()
    assert np.all(np.abs(np.bincount(draws, minlength=5) / 1e5 - expected) < 0.01)


def test_per_alpha_zero_is_uniform_chi_square():
    buf = _buffer(8, alpha=0.0)
    for i in range(8):
        buf.set_priority(i, float(i + 1) ** 3)
    rng = np.random.default_rng(2)
    draws = np.array([buf.sample_index(rng) for _ in range(100_000)])
    assert stats.chisquare(np.bincount(draws, minlength=8)).pvalue > 0.01
    assert np.allclose(replay_sample(buf, 8, rng, beta=1.0)["weights"], 1.0)


def test_uniform_priorities_unit_weights():
    b = replay_sample(_buffer(10, alpha=0.6), 4, np.random.default_rng(0), beta=1.0)
    assert np.allclose(b["weights"], 1.0)


def test_uniform_buffer_too_small():
    with pytest.raises(BufferTooSmall):
        replay_sample(_buffer(3, prioritized=False), 4, np.random.default_rng(0))


def test_priority_floor_and_bad_index():
    buf = _buffer(3)
    per_update_priorities(buf, [1], [0.0])
    assert buf.tree.leaf(1) == pytest.approx(buf.eps)
    with pytest.raises(BadIndex):
        per_update_priorities(buf, [5], [1.0])


def test_new_transition_gets_max_priority():
    buf = ReplayBuffer(SPACE, Discrete(2), capacity=8, prioritized=True, alpha=0.6)
    for _ in range(4):
        buf.add(np.zeros(1, np.float32), 0, 0.0, np.zeros(1, np.float32), False)
    per_update_priorities(buf, [0, 1, 2, 3], [0.5, 3.0, 0.2, 1.5])
    i = buf.add(np.zeros(1, np.float32), 0, 0.0, np.zeros(1, np.float32), False)
    # scan the stored leaves directly
    existing = [buf.tree.tree[buf.tree.size + k] for k in range(4)]
    assert buf.tree.leaf(i) == pytest.approx(max(existing))


def test_sum_tree_update_delta():
    tree = SumTree(5)
    for i, v in enumerate([1.0, 2.0, 3.0, 4.0, 5.0]):
        tree.update(i, v)
    before = tree.total
    tree.update(2, 10.0)
    assert tree.total - before == pytest.approx(7.0)


@given(st.lists(st.floats(1e-3, 100.0), min_size=1, max_size=40))
def test_sum_tree_root_is_leaf_sum(values):
    tree = SumTree(len(values))
    for i, v in enumerate(values):
        tree.update(i, v)
    assert abs(tree.total - sum(values)) < 1e-4
    assert all(v > 0 for v in tree.leaves())


# ---- targets ----

class _Table:
    def __init__(self, q):
        self.q = np.asarray(q, dtype=np.float32)

    def __call__(self, obs, action=None):
        return Tensor(self.q)


def test_td_target_examples():
    batch = {"rewards": [1.0, 1.0], "dones": [0.0, 1.0], "next_obs": None}
    y = td_target(batch, _Table([[2.0, 0.5], [2.0, 0.5]]), None, 0.9)
    assert y[0] == pytest.approx(2.8) and y[1] == 1.0


def test_double_td_target_uses_online_argmax():
    batch = {"rewards": [0.0], "dones": [0.0], "next_obs": None}
    target, online = _Table([[5.0, 1.0]]), _Table([[0.0, 2.0]])
    # hand enumeration: online argmax = action 1, target value there = 1.0
    assert td_target(batch, target, online, 0.5, "double")[0] == pytest.approx(0.5)
    assert td_target(batch, target, online, 0.5, "dqn")[0] == pytest.approx(2.5)


def test_dueling_examples():
    assert np.allclose(dueling_combine(Tensor([[1.0]]), Tensor([[1.0, 3.0]])).data, [[0.0, 2.0]])
    assert np.allclose(dueling_combine(Tensor([[0.7]]), Tensor([[2.0, 2.0, 2.0]])).data, 0.7)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=6), st.floats(-10, 10))
def test_dueling_preserves_argmax(adv, v):
    q = dueling_combine(Tensor([[v]]), Tensor([adv])).data[0]
    a = np.asarray(adv, dtype=np.float32)
    assert a[np.argmax(q)] == a.max()


def test_gae_lambda_zero_is_delta():
    r, v, d = [1.0, 2.0, 0.5], [0.2, 0.4, 0.1, 0.3], [0, 0, 0]
    adv, _ = compute_gae(r, v, d, 0.9, 0.0)
    assert np.allclose(adv, [r[t] + 0.9 * v[t + 1] - v[t] for t in range(3)], atol=1e-6)


def test_gae_telescoping():
    r = [1.0, 2.0, 3.0, 4.0]
    adv, _ = compute_gae(r, [0.0] * 5, [0] * 4, 1.0, 1.0)
    assert np.allclose(adv, [10, 9, 7, 4])


def test_gae_three_step_oracle():
    r, v, d = [1.0, 0.0, 1.0], [0.5, 0.5, 0.5, 0.0], [0, 0, 0]
    adv, ret = compute_gae(r, v, d, 0.9, 0.95)
    oa, oret = gae_bruteforce(r, v, d, 0.9, 0.95)
    assert np.allclose(adv, oa, atol=1e-6) and np.allclose(ret, oret, atol=1e-6)


@given(st.integers(1, 12), st.integers(0, 10_000))
def test_gae_random_against_oracle(n, seed):
    rng = np.random.default_rng(seed)
    r, v = rng.standard_normal(n), rng.standard_normal(n + 1)
    d = (rng.random(n) < 0.3).astype(float)
    adv, ret = compute_gae(r, v, d, 0.97, 0.9)
    oa, oret = gae_bruteforce(r, v, d, 0.97, 0.9)
    assert np.allclose(adv, oa, atol=1e-4) and np.allclose(ret, oret, atol=1e-4)


def test_gae_length_mismatch():
    with pytest.raises(LengthMismatch):
        compute_gae([1.0, 2.0], [0.0, 0.0], [0, 0], 0.9, 0.9)


def test_policy_gradient_examples():
    z = np.zeros(3)
    loss = policy_gradient_loss(Tensor([-1.0, -2.0, -3.0]), z, Tensor(z), z, Tensor(z), 0.0, 0.0)
    assert loss.item() == 0.0
    loss = policy_gradient_loss(Tensor([-1.0]), [2.0], Tensor([0.0]), [0.0], Tensor([0.0]), 0.0, 0.0)
    assert loss.item() == pytest.approx(2.0)


def test_policy_gradient_logit_gradient():
    # actor term through a categorical log-prob, checked numerically
    adv = np.array([1.5, -0.5, 0.3])
    acts = np.array([0, 2, 1])

    def f(logits):
        lp = ops.gather(ops.log_softmax(logits, axis=-1), acts)
        return policy_gradient_loss(lp, adv, Tensor(np.zeros(3)), np.zeros(3), Tensor(np.zeros(3)), 0.0, 0.0)

    assert finite_diff_check(f, np.random.default_rng(0).standard_normal((3, 4))) < 1e-3


def test_ppo_clip_examples():
    assert ppo_clip_loss(Tensor([1.5]), [2.0], 0.2).item() == pytest.approx(-1.2 * 2.0)
    assert ppo_clip_loss(Tensor([1.0]), [3.0], 0.2).item() == pytest.approx(-3.0)
    # A < 0, ratio below the band: min(0.5 A, 0.8 A) is the clipped 0.8 A
    assert ppo_clip_loss(Tensor([0.5]), [-1.0], 0.2).item() == pytest.approx(0.8)


def _linear_actor(w):
    return lambda obs: ops.matmul(obs, w)


def test_deterministic_actor_pushes_toward_zero():
    rng = np.random.default_rng(0)
    obs = Tensor(rng.standard_normal((6, 3)))
    w = Tensor(rng.standard_normal((3, 2)), requires_grad=True)
    critic = lambda o, a: -ops.sum(ops.square(a), axis=-1)
    backward(deterministic_actor_loss(obs, _linear_actor(w), critic))
    analytic = 2.0 / 6 * obs.data.T.astype(np.float64) @ (obs.data @ w.data)
    assert np.allclose(w.grad, analytic, rtol=1e-4, atol=1e-5)
    a = obs.data @ w.data
    a_next = obs.data @ (w.data - 0.01 * w.grad)
    assert np.square(a_next).sum() < np.square(a).sum()


def test_deterministic_actor_constant_critic():
    w = Tensor(np.ones((3, 2)), requires_grad=True)
    critic = lambda o, a: ops.sum(a * 0.0, axis=-1) + 4.0
    backward(deterministic_actor_loss(Tensor(np.ones((2, 3))), _linear_actor(w), critic))
    assert not np.any(w.grad)
    lo = deterministic_actor_loss(Tensor(np.ones((2, 3))), _linear_actor(w), lambda o, a: ops.sum(a, axis=-1))
    hi = deterministic_actor_loss(Tensor(np.ones((2, 3))), _linear_actor(w), lambda o, a: ops.sum(a, axis=-1) + 1.0)
    assert hi.item() < lo.item()


def test_td3_target_examples():
    batch = {"rewards": np.array([0.5]), "dones": np.array([0.0]), "next_obs": np.zeros((1, 1))}
    actor = lambda o: Tensor(np.array([[0.3]]))
    q1 = lambda o, a: Tensor(np.array([[1.0]]))
    q3 = lambda o, a: Tensor(np.array([[3.0]]))
    rng = np.random.default_rng(0)
    assert td3_smoothed_target(batch, actor, [q1, q3], 0.9, 0.0, 0.5, rng)[0] == pytest.approx(1.4)
    assert td3_smoothed_target(batch, actor, [q3, q3], 0.9, 0.0, 0.5, rng)[0] == pytest.approx(
        td3_smoothed_target(batch, actor, [q3], 0.9, 0.0, 0.5, rng)[0])


def test_td3_noise_clipped():
    batch = {"rewards": np.zeros(2000), "dones": np.zeros(2000), "next_obs": np.zeros((2000, 1))}
    seen = []

    def critic(o, a):
        seen.append(np.array(a))
        return Tensor(np.zeros((2000, 1)))

    td3_smoothed_target(batch, lambda o: Tensor(np.zeros((2000, 1))), [critic], 0.9, 5.0, 0.5,
                        np.random.default_rng(0))
    a = seen[0]
    assert np.abs(a).max() == pytest.approx(0.5)


def test_alpha_gradient_sign():
    # log pi above -H_target: descending the loss must raise log alpha
    log_pi, h_target = np.array([1.5, 2.0]), -1.0
    f = lambda la: sac_alpha_loss(la, log_pi, h_target)
    la = Tensor([0.0], requires_grad=True)
    backward(f(la))
    assert la.grad[0] < 0
    assert finite_diff_check(f, np.array([0.3])) < 1e-3


def test_soft_update_examples():
    t, o = Tensor([0.0]), Tensor([2.0])
    soft_update([t], [o], 0.5)
    assert t.data[0] == 1.0
    soft_update([t], [o], 1.0)
    assert t.data[0] == 2.0
    t2 = Tensor([7.0])
    soft_update([t2], [o], 0.0)
    assert t2.data[0] == 7.0
    with pytest.raises(ShapeMismatch):
        soft_update([Tensor([0.0, 1.0])], [o], 0.5)


# ---- agents ----

def test_registry_has_eleven_entries():
    assert len(ALGORITHMS) == 11


def test_unknown_and_bad_hyperparams():
    env = build_env("GridWorld-5x5", "toy")
    with pytest.raises(UnknownKey):
        DQN(env.observation_space, env.action_space, gama=0.9)
    with pytest.raises(BadHyperParam):
        DQN(env.observation_space, env.action_space, gamma=1.5)


def test_warmup_means_no_updates():
    env = build_env("Pendulum-v0", "classic_control")
    agent = TD3(env.observation_space, env.action_space)
    for _ in range(50):
        assert train_step(agent, env, {"warmup_steps": 100})["updates"] == 0


def test_ppo_update_count():
    env = build_env("CartPole-v0", "classic_control")
    agent = PPO(env.observation_space, env.action_space)
    counts = [train_step(agent, env)["updates"] for _ in range(128)]
    assert counts[:127] == [0] * 127 and counts[127] == 10 * (128 // 64)
    assert len(agent.rollout) == 0


def test_runs_are_deterministic():
    def run():
        env = build_env("CartPole-v0", "classic_control")
        agent = PPO(env.observation_space, env.action_space, seed=4)
        agent.learn(env, max_episodes=6, seed=4)
        return [m["reward"] for m in (train_step(agent, env, {"horizon": 16}) for _ in range(40))], \
            [p.data.copy() for p in agent.parameters()]

    (ra, pa), (rb, pb) = run(), run()
    assert ra == rb and all(np.array_equal(x, y) for x, y in zip(pa, pb))
