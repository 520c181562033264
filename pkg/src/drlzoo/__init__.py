"""drlzoo: a small deep reinforcement learning framework on a numpy autodiff engine.

Typical use::

    env = build_env("Pendulum-v0", "classic_control")
    alg_params, learn_params = call_default_params(env, "classic_control", "TD3")
    agent = TD3(**alg_params)
    agent.learn(env, "train", **learn_params)
"""

from .construct import construct_agent
from .envs import build_env, list_envs
from .facade import (
    agent_learn,
    call_default_params,
    checkpoint_load,
    checkpoint_save,
    compare_runs,
    override_params,
)
from .zoo import A2C, DDPG, DPPO, DQN, PPO, SAC, TD3, VPG, DoubleDQN, DuelingDQN, PrioritizedDQN

__version__ = "0.1.0"

__all__ = [
    "A2C", "DDPG", "DPPO", "DQN", "DoubleDQN", "DuelingDQN", "PPO", "PrioritizedDQN", "SAC", "TD3",
    "VPG", "agent_learn", "build_env", "call_default_params", "checkpoint_load", "checkpoint_save",
    "compare_runs", "construct_agent", "list_envs", "override_params",
]
