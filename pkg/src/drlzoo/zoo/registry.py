"""Name -> agent class lookup for the model zoo."""

from __future__ import annotations

from ..construct import UnknownAlgorithm
from .ddpg import DDPG, TD3
from .dqn import DQN, DoubleDQN, DuelingDQN, PrioritizedDQN
from .onpolicy import A2C, DPPO, PPO, VPG
from .sac import SAC

ALGORITHMS = {cls.name: cls for cls in (
    DQN, DoubleDQN, DuelingDQN, PrioritizedDQN, VPG, A2C, PPO, DPPO, DDPG, TD3, SAC)}


def get_algorithm(name: str):
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise UnknownAlgorithm(
            f"unknown algorithm {name!r}; available: {', '.join(ALGORITHMS)}") from None


def list_algorithms() -> list[str]:
    return list(ALGORITHMS)
