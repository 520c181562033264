"""Deterministic actor-critic: DDPG and TD3.

The actor emits actions in [-1, 1]; critics consume the same normalised
actions and the environment receives them rescaled to its Box.
"""

from __future__ import annotations

import numpy as np

from ..ndiff import ops
from ..ndiff.optim import Adam
from ..ndiff.tensor import no_grad
from ..nets.networks import to_input
from .base import Agent, minimize
from .buffers import ReplayBuffer
from .losses import deterministic_actor_loss, mse, soft_update, td3_smoothed_target


class DDPG(Agent):
    name = "DDPG"
    DEFAULTS = {
        "gamma": 0.99,
        "actor_lr": 3e-4,
        "critic_lr": 3e-4,
        "tau": 0.005,
        "buffer_capacity": 100_000,
        "explore_noise": 0.1,
        "policy_delay": 1,
        "target_noise": 0.0,
        "noise_clip": 0.5,
    }
    LEARN_DEFAULTS = {"batch_size": 64, "warmup_steps": 500, "update_every": 1}

    def _setup(self):
        hp = self.hp
        self.actor = self.nets["actor"]
        self.critics = self.graph.critics
        self.critic_slots = self.graph.head.critic_slots
        self.targets = {slot: net.clone() for slot, net in self.nets.items()}
        self.actions.noise_fraction = hp["explore_noise"]
        self.actor_opt = Adam(self.actor.parameters(), lr=hp["actor_lr"])
        self.critic_params = [p for c in self.critics for p in c.parameters()]
        self.critic_opt = Adam(self.critic_params, lr=hp["critic_lr"])
        self.buffer = ReplayBuffer(self.observation_space, self.action_space, hp["buffer_capacity"])
        self.critic_steps = 0

    def unit_action(self, obs) -> np.ndarray:
        with no_grad():
            return self.actor(to_input(self.batch1(obs))).data[0]

    def _act(self, obs, explore):
        a = self.unit_action(obs)
        if explore:
            a = self.actions.explore(a, self.rng)
        return self.actions.to_env(a)

    def _step(self, env):
        lp = self.lp
        if self.total_steps < lp["warmup_steps"]:
            unit = self.rng.uniform(-1.0, 1.0, size=self.action_space.shape).astype(np.float32)
        else:
            unit = self.actions.explore(self.unit_action(self._obs), self.rng)
        reward, next_obs, done, terminal, _ = self.env_step(env, self.actions.to_env(unit))
        self.buffer.add(self._obs, unit, reward, next_obs, terminal)
        self._obs = next_obs
        losses, n = {}, 0
        if (self.total_steps + 1 >= lp["warmup_steps"] and len(self.buffer) >= lp["batch_size"]
                and (self.total_steps + 1) % lp["update_every"] == 0):
            losses = self.update(self.buffer.sample(lp["batch_size"], self.replay_rng))
            n = 1
        return {"reward": reward, "done": done, "losses": losses, "updates": n, "extras": {}}

    def update(self, batch) -> dict:
        hp = self.hp
        target_critics = [self.targets[s] for s in self.critic_slots]
        y = td3_smoothed_target(batch, self.targets["actor"], target_critics, hp["gamma"],
                                hp["target_noise"], hp["noise_clip"], self.noise_rng)
        obs = to_input(batch["obs"])
        loss = None
        for c in self.critics:
            term = mse(c(obs, batch["actions"]), y)
            loss = term if loss is None else loss + term
        out = {"critic": minimize(loss, self.critic_opt)}
        self.critic_steps += 1
        if self.critic_steps % hp["policy_delay"] == 0:
            actor_loss = deterministic_actor_loss(obs, self.actor, self.critics[0])
            out["actor"] = minimize(actor_loss, self.actor_opt, others=self.critic_params)
            for slot, net in self.nets.items():
                soft_update(self.targets[slot].parameters(), net.parameters(), hp["tau"])
        self.updates += 1
        return out


class TD3(DDPG):
    name = "TD3"
    DEFAULTS = {**DDPG.DEFAULTS, "policy_delay": 2, "target_noise": 0.2}
