"""On-policy actor-critic family: VPG, A2C, PPO and the DPPO agent front end."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from ..ndiff import ops
from ..ndiff.optim import Adam
from ..ndiff.tensor import no_grad
from ..nets.networks import to_input
from .base import Agent, minimize
from .buffers import RolloutBuffer
from .losses import compute_gae, mse, policy_gradient_loss, ppo_clip_loss


def index_obs(obs, idx):
    if isinstance(obs, dict):
        return OrderedDict((k, v[idx]) for k, v in obs.items())
    return obs[idx]


class OnPolicyAgent(Agent):
    """Rollout collection and minibatch updates shared by VPG, A2C and PPO.

    ``collect_step`` and ``update_from_rollout`` are public because the
    distributed runtime runs them in separate actor and learner processes.
    """

    DEFAULTS = {
        "gamma": 0.99,
        "lam": 1.0,
        "lr": 3e-4,
        "value_coef": 0.5,
        "entropy_coef": 0.01,
        "max_grad_norm": 0.5,
        "normalize_advantages": False,
    }
    LEARN_DEFAULTS = {"horizon": 128, "epochs": 1, "minibatch_size": None}

    def _setup(self):
        self.policy = self.nets["policy"]
        self.value = self.nets["value"]
        self.opt = Adam(self.policy.parameters() + self.value.parameters(), lr=self.hp["lr"])
        self.rollout = RolloutBuffer(self.observation_space, self.action_space, self.lp["horizon"])

    def _on_learn_start(self, env):
        self.rollout = RolloutBuffer(self.observation_space, self.action_space, self.lp["horizon"])

    def dist(self, obs_batch):
        return self.actions.dist(self.policy(to_input(obs_batch)))

    def state_value(self, obs) -> float:
        with no_grad():
            return float(self.value(to_input(self.batch1(obs))).data[0, 0])

    def _act(self, obs, explore):
        with no_grad():
            d = self.dist(self.batch1(obs))
            a = d.sample(self.rng) if explore else d.mode()
        return self.actions.to_env(a[0])

    def _sample_action(self, obs, rng):
        with no_grad():
            a = self.dist(self.batch1(obs)).sample(rng)
        return self.actions.to_env(a[0])

    def collect_step(self, env):
        """Act once and store the transition; returns (reward, done, rollout batch or None).

        Time-limit truncation bootstraps through the reward: ``r + gamma * V(s')``
        is stored and the GAE recursion is cut there, as for a terminal state.
        """
        obs = self._obs
        # train_step may have changed the horizon between calls
        self.rollout.horizon = self.lp["horizon"]
        with no_grad():
            x = to_input(self.batch1(obs))
            d = self.actions.dist(self.policy(x))
            a = d.sample(self.rng)
            logp = float(d.log_prob(a).data[0])
            v = float(self.value(x).data[0, 0])
        action = a[0]
        reward, next_obs, done, terminal, _ = self.env_step(env, self.actions.to_env(action))
        stored = reward
        if done and not terminal:
            stored += self.hp["gamma"] * self.state_value(next_obs)
        self.rollout.add(obs, action, stored, done, logp, v)
        self._obs = next_obs
        batch = None
        if self.rollout.full:
            last = 0.0 if done else self.state_value(next_obs)
            batch = self.rollout.batch(last)
            self.rollout.clear()
        return reward, done, batch

    def _step(self, env):
        reward, done, batch = self.collect_step(env)
        losses, n = {}, 0
        if batch is not None:
            losses, n = self.update_from_rollout(batch)
        return {"reward": reward, "done": done, "losses": losses, "updates": n, "extras": {}}

    def minibatches(self, n: int):
        mb = self.lp["minibatch_size"] or n
        for _ in range(self.lp["epochs"]):
            idx = self.minibatch_rng.permutation(n) if mb < n else np.arange(n)
            for start in range(0, n, mb):
                yield idx[start:start + mb]

    def update_from_rollout(self, batch, grad_hook=None, step_hook=None):
        """Gradient steps on one rollout; returns (mean losses, number of steps).

        ``grad_hook(params)`` may rewrite gradients before clipping (gradient
        all-reduce); ``step_hook()`` runs after every optimizer step.
        """
        hp = self.hp
        adv, ret = compute_gae(batch["rewards"], batch["values"], batch["dones"], hp["gamma"], hp["lam"])
        if hp["normalize_advantages"] and len(adv) > 1:
            adv = ((adv - adv.mean()) / (adv.std() + 1e-8)).astype(np.float32)
        sums: dict[str, float] = {}
        steps = 0
        for j in self.minibatches(len(adv)):
            d = self.dist(index_obs(batch["obs"], j))
            logp = d.log_prob(batch["actions"][j])
            ent = d.entropy()
            v = ops.reshape(self.value(to_input(index_obs(batch["obs"], j))), (-1,))
            loss, parts = self.loss(logp, batch["log_probs"][j], adv[j], v, ret[j], ent)
            parts["total"] = minimize(loss, self.opt, hp["max_grad_norm"], grad_hook=grad_hook)
            if step_hook is not None:
                step_hook()
            for k, val in parts.items():
                sums[k] = sums.get(k, 0.0) + val
            steps += 1
        self.updates += steps
        return {k: v / steps for k, v in sums.items()}, steps

    def loss(self, logp, old_logp, adv, v, ret, ent):
        hp = self.hp
        loss = policy_gradient_loss(logp, adv, v, ret, ent, hp["value_coef"], hp["entropy_coef"])
        return loss, {"value": mse(v, ret).item(), "entropy": float(ent.data.mean())}


class VPG(OnPolicyAgent):
    """REINFORCE with a learned state-value baseline: A = G_t - V(s_t)."""

    name = "VPG"


class A2C(OnPolicyAgent):
    name = "A2C"
    LEARN_DEFAULTS = {"horizon": 32, "epochs": 1, "minibatch_size": None}


class PPO(OnPolicyAgent):
    name = "PPO"
    DEFAULTS = {**OnPolicyAgent.DEFAULTS, "lam": 0.95, "clip_eps": 0.2, "normalize_advantages": True}
    LEARN_DEFAULTS = {"horizon": 128, "epochs": 10, "minibatch_size": 64}

    def loss(self, logp, old_logp, adv, v, ret, ent):
        hp = self.hp
        ratio = ops.exp(logp - old_logp)
        policy_loss = ppo_clip_loss(ratio, adv, hp["clip_eps"])
        value_loss = mse(v, ret)
        loss = policy_loss + hp["value_coef"] * value_loss - hp["entropy_coef"] * ops.mean(ent)
        return loss, {"policy": policy_loss.item(), "value": value_loss.item(),
                      "entropy": float(ent.data.mean())}


class DPPO(PPO):
    """PPO whose ``learn`` runs actors and learners on the distributed runtime.

    ``train_step`` (used for single-process smoke runs) is plain PPO.
    """

    name = "DPPO"
    LEARN_DEFAULTS = {**PPO.LEARN_DEFAULTS, "actors": 1, "learners": 1, "transport": "inproc"}

    def learn(self, env, mode: str = "train", render: bool = False, clock=None, **learn_params):
        if mode != "train":
            return super().learn(env, mode, render, clock, **learn_params)
        from ..dist.dppo import dppo_learn
        return dppo_learn(self, env, clock=clock, **learn_params)
