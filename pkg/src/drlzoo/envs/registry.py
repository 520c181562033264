from __future__ import annotations

from typing import Callable

from .classic import CartPole, Pendulum
from .core import Environment, UnknownEnvironment
from .toy import GridWorld, HybridReach, PixelGrid

_REGISTRY: dict[tuple[str, str], Callable[[], Environment]] = {
    ("CartPole-v0", "classic_control"): CartPole,
    ("Pendulum-v0", "classic_control"): Pendulum,
    ("GridWorld-5x5", "toy"): GridWorld,
    ("PixelGrid-8x8", "toy"): PixelGrid,
    ("HybridReach", "toy"): HybridReach,
}


def register_env(name: str, env_type: str, factory: Callable[[], Environment]) -> None:
    """Make ``build_env(name, env_type)`` return ``factory()``."""
    _REGISTRY[(name, env_type)] = factory


def list_envs() -> list[tuple[str, str]]:
    return sorted(_REGISTRY, key=lambda k: (k[1], k[0]))


def build_env(name: str, env_type: str) -> Environment:
    try:
        factory = _REGISTRY[(name, env_type)]
    except KeyError:
        available = ", ".join(f"{n} ({t})" for n, t in list_envs())
        raise UnknownEnvironment(
            f"unknown environment {name!r} of type {env_type!r}; available: {available}") from None
    env = factory()
    env.name, env.env_type = name, env_type
    return env
