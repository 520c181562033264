"""Shared agent lifecycle: construction, the episode loop, evaluation and parameter naming."""

from __future__ import annotations

import os
from collections import OrderedDict

import numpy as np

from ..construct import construct_graph
from ..envs.spaces import DictSpace
from ..ndiff.optim import clip_grad_norm
from ..ndiff.rng import seeded_rng
from ..ndiff.tensor import Tensor
from ..tracking import Tracker
from .buffers import single_obs


class UnknownKey(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class BadHyperParam(ValueError):
    pass


COMMON_LEARN = {
    "max_episodes": 100,
    "max_steps": None,
    "seed": 0,
    "metrics_dir": None,
    "obs_norm": False,
    "test_greedy": True,
    "stop_reward": None,
    "stop_window": 20,
}


def check_keys(given, allowed, what: str) -> None:
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise UnknownKey(f"unknown {what} key(s) {', '.join(map(repr, unknown))}; "
                         f"valid keys: {', '.join(sorted(allowed))}")


def validate_hyperparams(hp: dict) -> None:
    def need(cond, msg):
        if not cond:
            raise BadHyperParam(msg)

    if "gamma" in hp:
        need(0.0 < hp["gamma"] <= 1.0, f"gamma must be in (0, 1], got {hp['gamma']}")
    if "lam" in hp:
        need(0.0 <= hp["lam"] <= 1.0, f"lam must be in [0, 1], got {hp['lam']}")
    if "tau" in hp:
        need(0.0 < hp["tau"] <= 1.0, f"tau must be in (0, 1], got {hp['tau']}")
    if "clip_eps" in hp:
        need(hp["clip_eps"] > 0.0, f"clip_eps must be positive, got {hp['clip_eps']}")
    for key in ("lr", "actor_lr", "critic_lr", "alpha_lr"):
        if key in hp:
            need(hp[key] > 0.0, f"{key} must be positive, got {hp[key]}")


class RunningNorm:
    """Running mean/variance of observations (parallel-update form)."""

    def __init__(self, shape):
        self.mean = np.zeros(shape, dtype=np.float64)
        self.var = np.ones(shape, dtype=np.float64)
        self.count = 1e-4

    def update(self, x) -> None:
        x = np.asarray(x, dtype=np.float64)[None]
        b_mean, b_var, n = x.mean(0), x.var(0), x.shape[0]
        delta = b_mean - self.mean
        total = self.count + n
        self.mean = self.mean + delta * n / total
        self.var = (self.var * self.count + b_var * n + delta ** 2 * self.count * n / total) / total
        self.count = total

    def __call__(self, x) -> np.ndarray:
        out = (np.asarray(x, dtype=np.float64) - self.mean) / np.sqrt(self.var + 1e-8)
        return np.clip(out, -10.0, 10.0).astype(np.float32)


def minimize(loss, opt, max_grad_norm=None, others=(), grad_hook=None) -> float:
    """Backprop ``loss`` and step ``opt``; gradients reaching ``others`` are discarded."""
    opt.zero_grad()
    for p in others:
        p.grad = None
    loss.backward()
    for p in others:
        p.grad = None
    if grad_hook is not None:
        grad_hook(opt.params)
    if max_grad_norm:
        clip_grad_norm(opt.params, max_grad_norm)
    opt.step()
    return loss.item()


class Agent:
    """Base class of every zoo algorithm.

    Subclasses define ``DEFAULTS`` (algorithm constants accepted as keyword
    arguments), ``LEARN_DEFAULTS`` (schedule keys accepted by ``learn``),
    ``_setup`` and ``_step``.
    """

    name = "agent"
    DEFAULTS: dict = {}
    LEARN_DEFAULTS: dict = {}
    dueling = False
    squash: bool | None = None

    def __init__(self, observation_space, action_space, net_list=None, seed: int = 0,
                 hidden=None, activation=None, **hyperparams):
        check_keys(hyperparams, self.DEFAULTS, f"{self.name} alg_params")
        self.hp = {**self.DEFAULTS, **hyperparams}
        validate_hyperparams(self.hp)
        self.observation_space = observation_space
        self.action_space = action_space
        self.seed = int(seed)
        nets = [net.clone() for net in net_list] if net_list is not None else None
        self.graph = construct_graph(observation_space, action_space, self.nature_name, nets,
                                     hidden, activation, self.dueling, self.seed, self.squash)
        self.nets = self.graph.nets
        self.actions = self.graph.actions
        self.lp = {**COMMON_LEARN, **self.LEARN_DEFAULTS}
        self.total_steps = 0
        self.updates = 0
        self.obs_norm = None
        self._obs = None
        self.halted = False
        self._reset_seed = self.seed
        self.reseed(self.seed)
        self._setup()

    @property
    def nature_name(self) -> str:
        return self.name

    # ---- randomness ----

    def reseed(self, seed: int) -> None:
        self.rng = seeded_rng(seed, "sampling")
        self.replay_rng = seeded_rng(seed, "replay")
        self.minibatch_rng = seeded_rng(seed, "minibatch")
        self.noise_rng = seeded_rng(seed, "target_noise")
        self._reset_seed = seed

    # ---- observations ----

    def _enable_obs_norm(self) -> None:
        space = self.observation_space
        if isinstance(space, DictSpace):
            self.obs_norm = OrderedDict((k, RunningNorm(s.shape)) for k, s in space.entries.items())
        else:
            self.obs_norm = RunningNorm(space.shape)

    def observe(self, obs, update: bool = False):
        """Apply observation normalisation (when enabled) to one raw observation."""
        if self.obs_norm is None:
            return obs
        if isinstance(self.obs_norm, dict):
            if update:
                for k, n in self.obs_norm.items():
                    n.update(obs[k])
            return OrderedDict((k, n(obs[k])) for k, n in self.obs_norm.items())
        if update:
            self.obs_norm.update(obs)
        return self.obs_norm(obs)

    def batch1(self, obs):
        return single_obs(obs, self.observation_space)

    # ---- interaction ----

    def act(self, obs, explore: bool = False):
        """Environment action for one raw observation."""
        return self._act(self.observe(obs), explore)

    def _act(self, obs, explore: bool):
        raise NotImplementedError

    def begin_episode(self, env):
        seed, self._reset_seed = self._reset_seed, None
        self._obs = self.observe(env.reset(seed=seed), update=True)
        self._ep_return = 0.0
        self._ep_len = 0

    def train_step(self, env, hp: dict | None = None) -> dict:
        """One environment interaction plus any updates that fall due.

        Returns ``{reward, done, losses, updates, extras}``; ``episode_return``
        is added on the step that ends an episode.
        """
        if hp:
            check_keys(hp, self.lp, f"{self.name} learn_params")
            self.lp.update(hp)
        if self._obs is None:
            self.begin_episode(env)
        m = self._step(env)
        self.total_steps += 1
        self._ep_return += m["reward"]
        self._ep_len += 1
        if m["done"]:
            m["episode_return"] = self._ep_return
            m["episode_length"] = self._ep_len
            self._obs = None
        return m

    def env_step(self, env, env_action):
        """Step ``env``; returns (raw reward, next obs processed, done, terminal, info)."""
        res = env.step(env_action)
        next_obs = self.observe(res.observation, update=True)
        terminal = res.done and res.info.get("truncated") != "true"
        return float(res.reward), next_obs, res.done, terminal, res.info

    def _setup(self) -> None:
        pass

    def _step(self, env) -> dict:
        raise NotImplementedError

    def schedule_extras(self) -> dict:
        return {}

    # ---- training / evaluation loops ----

    def config(self, env=None) -> dict:
        from ..facade.params import describe_net_list
        return {
            "alg": self.name,
            "env": None if env is None else {"name": env.name, "env_type": env.env_type},
            "alg_params": {**self.hp, "seed": self.seed, "net_list": describe_net_list(self.graph.net_list)},
            "learn_params": dict(self.lp),
        }

    def learn(self, env, mode: str = "train", render: bool = False, clock=None, **learn_params):
        """Run ``max_episodes`` training or evaluation episodes and record them."""
        check_keys(learn_params, self.lp, f"{self.name} learn_params")
        if mode not in ("train", "test"):
            raise ValueError(f"mode must be 'train' or 'test', got {mode!r}")
        self.lp.update(learn_params)
        lp = self.lp
        if lp["metrics_dir"] is not None:
            lp["metrics_dir"] = os.fspath(lp["metrics_dir"])
        if lp["obs_norm"] and self.obs_norm is None:
            self._enable_obs_norm()
        self.reseed(lp["seed"])
        self._obs = None
        self.halted = False
        self._on_learn_start(env)
        kwargs = {} if clock is None else {"clock": clock}
        tracker = Tracker(self.name, env.name, self.config(env), lp["metrics_dir"], mode, **kwargs)
        try:
            if mode == "train":
                self._train_loop(env, tracker)
            else:
                self._test_loop(env, tracker)
        finally:
            tracker.close()
        return tracker.record

    def _on_learn_start(self, env) -> None:
        pass

    def _train_loop(self, env, tracker) -> None:
        lp = self.lp
        budget = lp["max_steps"]
        for episode in range(lp["max_episodes"]):
            losses: dict[str, list] = {}
            n_updates = 0
            while True:
                m = self.train_step(env)
                if self.halted:
                    return
                n_updates += m["updates"]
                for k, v in m["losses"].items():
                    losses.setdefault(k, []).append(v)
                if m["done"]:
                    break
            extras = {"length": m["episode_length"], "updates": n_updates, **self.schedule_extras()}
            tracker.log(self.total_steps, episode, m["episode_return"],
                        {k: float(np.mean(v)) for k, v in losses.items()}, extras)
            if self._should_stop(tracker.record):
                break
            if budget is not None and self.total_steps >= budget:
                break

    def _should_stop(self, record) -> bool:
        target = self.lp["stop_reward"]
        window = self.lp["stop_window"]
        return target is not None and len(record) >= window and record.trailing_mean(window) >= target

    def _test_loop(self, env, tracker) -> None:
        rng = seeded_rng(self.lp["seed"], "test")
        greedy = self.lp["test_greedy"]
        step = 0
        for episode in range(self.lp["max_episodes"]):
            obs = self.observe(env.reset(seed=self.lp["seed"] if episode == 0 else None))
            total, length, done = 0.0, 0, False
            while not done:
                action = self._act(obs, explore=False) if greedy else self._sample_action(obs, rng)
                res = env.step(action)
                obs = self.observe(res.observation)
                total += res.reward
                length += 1
                done = res.done
            step += length
            tracker.log(step, episode, total, {}, {"length": length})

    def _sample_action(self, obs, rng):
        """Stochastic evaluation action; deterministic agents fall back to greedy."""
        return self._act(obs, explore=False)

    # ---- parameters ----

    def named_tensors(self) -> OrderedDict:
        """Every persistent tensor, named ``<scope>/<layer>/<param>``."""
        out = OrderedDict()
        for slot, net in self.nets.items():
            for pname, p in net.named_parameters().items():
                out[f"{slot}/{pname}"] = p
        for slot, net in getattr(self, "targets", {}).items():
            for pname, p in net.named_parameters().items():
                out[f"{slot}_target/{pname}"] = p
        out.update(self._extra_tensors())
        if self.obs_norm is not None:
            norms = self.obs_norm.items() if isinstance(self.obs_norm, dict) else [("obs", self.obs_norm)]
            for key, n in norms:
                out[f"obs_norm/{key}/mean"] = _NormView(n, "mean")
                out[f"obs_norm/{key}/var"] = _NormView(n, "var")
        return out

    def _extra_tensors(self) -> OrderedDict:
        return OrderedDict()

    def parameters(self) -> list[Tensor]:
        return [p for net in self.nets.values() for p in net.parameters()]

    @property
    def net_list(self):
        return self.graph.net_list

    def __repr__(self):
        return f"<{type(self).__name__} slots={list(self.nets)}>"


class _NormView:
    """Tensor-like view onto a RunningNorm statistic so checkpoints can carry it."""

    def __init__(self, norm: RunningNorm, attr: str):
        self.norm, self.attr = norm, attr

    @property
    def data(self) -> np.ndarray:
        return getattr(self.norm, self.attr).astype(np.float32)

    @data.setter
    def data(self, value) -> None:
        setattr(self.norm, self.attr, np.asarray(value, dtype=np.float64))

    @property
    def shape(self):
        return getattr(self.norm, self.attr).shape
