"""Soft actor-critic with twin critics and automatic temperature tuning.

Continuous actions use a tanh-squashed Gaussian in [-1, 1]; discrete actions
use a categorical policy with per-action Q tables, where expectations over
actions are computed exactly instead of sampled.
"""

from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np

from ..envs.spaces import Discrete
from ..ndiff import ops
from ..ndiff.optim import Adam
from ..ndiff.tensor import Tensor, no_grad
from ..nets.distributions import Categorical
from ..nets.networks import to_input
from .base import Agent, minimize
from .buffers import ReplayBuffer
from .losses import mse, sac_alpha_loss, soft_update


class SAC(Agent):
    name = "SAC"
    squash = True
    DEFAULTS = {
        "gamma": 0.99,
        "actor_lr": 3e-4,
        "critic_lr": 3e-4,
        "alpha_lr": 3e-4,
        "tau": 0.005,
        "buffer_capacity": 100_000,
        "alpha": 0.2,
        "auto_alpha": True,
        "target_entropy": None,
    }
    LEARN_DEFAULTS = {"batch_size": 64, "warmup_steps": 500, "update_every": 1}

    def _setup(self):
        hp = self.hp
        self.discrete = isinstance(self.action_space, Discrete)
        self.policy = self.nets["policy"]
        self.critics = self.graph.critics
        self.critic_slots = self.graph.head.critic_slots
        self.targets = {s: self.nets[s].clone() for s in self.critic_slots}
        self.log_alpha = Tensor(np.array([math.log(hp["alpha"])], dtype=np.float32), requires_grad=True)
        if hp["target_entropy"] is not None:
            self.target_entropy = float(hp["target_entropy"])
        elif self.discrete:
            self.target_entropy = 0.5 * math.log(self.action_space.n)
        else:
            self.target_entropy = -float(self.action_space.shape[0])
        self.policy_opt = Adam(self.policy.parameters(), lr=hp["actor_lr"])
        self.critic_params = [p for c in self.critics for p in c.parameters()]
        self.critic_opt = Adam(self.critic_params, lr=hp["critic_lr"])
        self.alpha_opt = Adam([self.log_alpha], lr=hp["alpha_lr"])
        self.buffer = ReplayBuffer(self.observation_space, self.action_space, hp["buffer_capacity"])

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha.data[0]))

    def _extra_tensors(self):
        return OrderedDict([("temperature/log_alpha", self.log_alpha)])

    # ---- policy evaluation ----

    def _squashed(self, obs_t):
        """Reparameterised action in [-1, 1] and its log-density (continuous case)."""
        d = self.actions.dist(self.policy(obs_t))
        u = d.rsample(self.rng)
        a, correction = self.actions.squash_sample(u)
        return a, d.log_prob(u) + correction

    def _probs(self, obs_t):
        c = Categorical(self.policy(obs_t))
        return c.probs, c.log_probs

    def _act(self, obs, explore):
        with no_grad():
            out = self.policy(to_input(self.batch1(obs)))
            if self.discrete:
                c = Categorical(out)
                return int((c.sample(self.rng) if explore else c.mode())[0])
            d = self.actions.dist(out)
            u = d.sample(self.rng) if explore else d.mode()
        return self.actions.to_env(np.tanh(u[0]))

    def _sample_action(self, obs, rng):
        with no_grad():
            out = self.policy(to_input(self.batch1(obs)))
            if self.discrete:
                return int(Categorical(out).sample(rng)[0])
            u = self.actions.dist(out).sample(rng)
        return self.actions.to_env(np.tanh(u[0]))

    def _step(self, env):
        lp = self.lp
        if self.total_steps < lp["warmup_steps"]:
            if self.discrete:
                stored = int(self.rng.integers(self.action_space.n))
            else:
                stored = self.rng.uniform(-1.0, 1.0, size=self.action_space.shape).astype(np.float32)
        else:
            with no_grad():
                out = self.policy(to_input(self.batch1(self._obs)))
                if self.discrete:
                    stored = int(Categorical(out).sample(self.rng)[0])
                else:
                    stored = np.tanh(self.actions.dist(out).sample(self.rng)[0]).astype(np.float32)
        env_action = stored if self.discrete else self.actions.to_env(stored)
        reward, next_obs, done, terminal, _ = self.env_step(env, env_action)
        self.buffer.add(self._obs, stored, reward, next_obs, terminal)
        self._obs = next_obs
        losses, n = {}, 0
        if (self.total_steps + 1 >= lp["warmup_steps"] and len(self.buffer) >= lp["batch_size"]
                and (self.total_steps + 1) % lp["update_every"] == 0):
            losses = self.update(self.buffer.sample(lp["batch_size"], self.replay_rng))
            n = 1
        return {"reward": reward, "done": done, "losses": losses, "updates": n,
                "extras": {"alpha": self.alpha}}

    # ---- updates ----

    def soft_target(self, batch) -> np.ndarray:
        """r + gamma (1 - done) (min_i Q_i'(s', a') - alpha log pi(a'|s'))."""
        alpha = np.float32(self.alpha)
        r = np.asarray(batch["rewards"], dtype=np.float32)
        d = np.asarray(batch["dones"], dtype=np.float32)
        targets = [self.targets[s] for s in self.critic_slots]
        with no_grad():
            nxt = to_input(batch["next_obs"])
            if self.discrete:
                probs, logp = self._probs(nxt)
                q = np.minimum.reduce([t(nxt).data for t in targets])
                v = (probs.data * (q - alpha * logp.data)).sum(axis=-1)
            else:
                a, logp = self._squashed(nxt)
                q = np.minimum.reduce([t(nxt, a.data).data.reshape(-1) for t in targets])
                v = q - alpha * logp.data
        return (r + np.float32(self.hp["gamma"]) * (1.0 - d) * v).astype(np.float32)

    def critic_loss(self, batch, y):
        obs = to_input(batch["obs"])
        loss = None
        for c in self.critics:
            if self.discrete:
                q = ops.gather(c(obs), batch["actions"])
            else:
                q = c(obs, batch["actions"])
            term = mse(q, y)
            loss = term if loss is None else loss + term
        return loss

    def policy_loss(self, obs_t):
        """Policy loss and the (detached) log-probabilities used for the temperature."""
        alpha = np.float32(self.alpha)
        if self.discrete:
            probs, logp = self._probs(obs_t)
            q = self.critics[0](obs_t)
            for c in self.critics[1:]:
                q = ops.minimum(q, c(obs_t))
            q = ops.stop_gradient(q)
            loss = ops.mean(ops.sum(probs * (alpha * logp - q), axis=-1))
            entropy_term = (probs.data * logp.data).sum(axis=-1)
            return loss, entropy_term
        a, logp = self._squashed(obs_t)
        q = self.critics[0](obs_t, a)
        for c in self.critics[1:]:
            q = ops.minimum(q, c(obs_t, a))
        loss = ops.mean(alpha * logp - ops.reshape(q, (-1,)))
        return loss, logp.data

    def update(self, batch) -> dict:
        hp = self.hp
        y = self.soft_target(batch)
        out = {"critic": minimize(self.critic_loss(batch, y), self.critic_opt)}
        loss, logp = self.policy_loss(to_input(batch["obs"]))
        out["policy"] = minimize(loss, self.policy_opt, others=self.critic_params)
        if hp["auto_alpha"]:
            out["alpha"] = minimize(sac_alpha_loss(self.log_alpha, logp, self.target_entropy), self.alpha_opt)
        for s in self.critic_slots:
            soft_update(self.targets[s].parameters(), self.nets[s].parameters(), hp["tau"])
        self.updates += 1
        return out

    def schedule_extras(self):
        return {"alpha": self.alpha}


def sac_update(agent: SAC, batch) -> dict:
    return agent.update(batch)
