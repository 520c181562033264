"""Deep Q-learning with optional double targets, dueling heads and prioritised replay."""

from __future__ import annotations

import numpy as np

from ..ndiff import ops
from ..ndiff.optim import Adam
from ..ndiff.tensor import no_grad
from ..nets.networks import to_input
from .base import Agent, minimize
from .buffers import ReplayBuffer
from .losses import soft_update, td_target, weighted_mse


class DQN(Agent):
    name = "DQN"
    double = False
    prioritized = False
    DEFAULTS = {
        "gamma": 0.99,
        "lr": 3e-4,
        "tau": 0.005,
        "buffer_capacity": 100_000,
        "epsilon_start": 1.0,
        "epsilon_end": 0.05,
        "max_grad_norm": 10.0,
        "per_alpha": 0.6,
        "per_beta_start": 0.4,
        "per_beta_end": 1.0,
        "per_eps": 1e-5,
    }
    LEARN_DEFAULTS = {
        "batch_size": 64,
        "warmup_steps": 500,
        "update_every": 1,
        "explore_fraction": 0.1,
        "total_steps": None,
    }

    def _setup(self):
        hp = self.hp
        self.q = self.nets["q"]
        self.targets = {"q": self.q.clone()}
        self.opt = Adam(self.q.parameters(), lr=hp["lr"])
        self.buffer = ReplayBuffer(self.observation_space, self.action_space, hp["buffer_capacity"],
                                   prioritized=self.prioritized, alpha=hp["per_alpha"], eps=hp["per_eps"])
        self._horizon_hint = 200

    def _on_learn_start(self, env):
        self._horizon_hint = getattr(env, "horizon", 200)

    def _anneal_steps(self) -> int:
        total = self.lp["total_steps"]
        if total is None:
            total = max(1, self.lp["max_episodes"]) * self._horizon_hint
        return max(1, int(total))

    @property
    def epsilon(self) -> float:
        hp = self.hp
        span = max(1.0, self.lp["explore_fraction"] * self._anneal_steps())
        frac = min(1.0, self.total_steps / span)
        return hp["epsilon_start"] + frac * (hp["epsilon_end"] - hp["epsilon_start"])

    @property
    def beta(self) -> float:
        hp = self.hp
        frac = min(1.0, self.total_steps / self._anneal_steps())
        return hp["per_beta_start"] + frac * (hp["per_beta_end"] - hp["per_beta_start"])

    def q_values(self, obs) -> np.ndarray:
        with no_grad():
            return self.q(to_input(self.batch1(obs))).data[0]

    def _act(self, obs, explore):
        if explore:
            return self.actions.select(self.q_values(obs), self.epsilon, self.rng)
        return int(np.argmax(self.q_values(obs)))

    def _step(self, env):
        eps = self.epsilon
        action = self._act(self._obs, explore=True)
        reward, next_obs, done, terminal, _ = self.env_step(env, action)
        self.buffer.add(self._obs, action, reward, next_obs, terminal)
        self._obs = next_obs
        losses, n = {}, 0
        lp = self.lp
        if (self.total_steps + 1 >= lp["warmup_steps"] and len(self.buffer) >= lp["batch_size"]
                and (self.total_steps + 1) % lp["update_every"] == 0):
            losses = self.update(self.buffer.sample(lp["batch_size"], self.replay_rng, self.beta))
            n = 1
        return {"reward": reward, "done": done, "losses": losses, "updates": n,
                "extras": {"epsilon": eps}}

    def update(self, batch) -> dict:
        hp = self.hp
        y = td_target(batch, self.targets["q"], self.q, hp["gamma"], "double" if self.double else "dqn")
        q_a = ops.gather(self.q(to_input(batch["obs"])), batch["actions"])
        td = q_a.data - y
        loss = minimize(weighted_mse(q_a, y, batch["weights"]), self.opt, hp["max_grad_norm"])
        if self.prioritized:
            self.buffer.update_priorities(batch["indices"], td)
        soft_update(self.targets["q"].parameters(), self.q.parameters(), hp["tau"])
        self.updates += 1
        return {"q": loss}

    def schedule_extras(self):
        out = {"epsilon": self.epsilon}
        if self.prioritized:
            out["beta"] = self.beta
        return out


class DoubleDQN(DQN):
    name = "DoubleDQN"
    double = True


class DuelingDQN(DQN):
    name = "DuelingDQN"
    dueling = True


class PrioritizedDQN(DQN):
    name = "PrioritizedDQN"
    prioritized = True
