from .classic import CartPole, Pendulum, pendulum_reward, wrap_angle
from .core import EnvError, Environment, EpisodeFinished, InvalidAction, StepResult, UnknownEnvironment
from .registry import build_env, list_envs, register_env
from .spaces import Box, DictSpace, Discrete, Space, space_contains, space_from_description, space_sample
from .toy import GridWorld, HybridReach, PixelGrid

__all__ = [
    "Box", "CartPole", "DictSpace", "Discrete", "EnvError", "Environment", "EpisodeFinished",
    "GridWorld", "HybridReach", "InvalidAction", "Pendulum", "PixelGrid", "Space", "StepResult",
    "UnknownEnvironment", "build_env", "list_envs", "pendulum_reward", "register_env",
    "space_contains", "space_from_description", "space_sample", "wrap_angle",
]
