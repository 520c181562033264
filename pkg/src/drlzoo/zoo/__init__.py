from .base import Agent, BadHyperParam, UnknownKey, minimize
from .buffers import (
    BadIndex,
    BufferTooSmall,
    ReplayBuffer,
    RolloutBuffer,
    SumTree,
    per_update_priorities,
    replay_sample,
)
from .ddpg import DDPG, TD3
from .dqn import DQN, DoubleDQN, DuelingDQN, PrioritizedDQN
from .losses import (
    LengthMismatch,
    compute_gae,
    deterministic_actor_loss,
    dueling_combine,
    mse,
    policy_gradient_loss,
    ppo_clip_loss,
    sac_alpha_loss,
    soft_update,
    td3_smoothed_target,
    td_target,
    weighted_mse,
)
from .onpolicy import A2C, DPPO, PPO, VPG, OnPolicyAgent
from .registry import ALGORITHMS, get_algorithm, list_algorithms
from .sac import SAC, sac_update


def train_step(agent, env, hp=None) -> dict:
    return agent.train_step(env, hp)


__all__ = [
    "A2C", "ALGORITHMS", "Agent", "BadHyperParam", "BadIndex", "BufferTooSmall", "DDPG", "DPPO",
    "DQN", "DoubleDQN", "DuelingDQN", "LengthMismatch", "OnPolicyAgent", "PPO", "PrioritizedDQN",
    "ReplayBuffer", "RolloutBuffer", "SAC", "SumTree", "TD3", "UnknownKey", "VPG", "compute_gae",
    "deterministic_actor_loss", "dueling_combine", "get_algorithm", "list_algorithms", "minimize",
    "mse", "per_update_priorities", "policy_gradient_loss", "ppo_clip_loss", "replay_sample",
    "sac_alpha_loss", "sac_update", "soft_update", "td3_smoothed_target", "td_target",
    "train_step", "weighted_mse",
]
