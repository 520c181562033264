from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..ndiff.rng import seeded_rng
from .spaces import Box, Discrete, Space


class EnvError(Exception):
    pass


class UnknownEnvironment(EnvError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InvalidAction(EnvError, ValueError):
    pass


class EpisodeFinished(EnvError, RuntimeError):
    pass


class StepResult(NamedTuple):
    observation: object
    reward: float
    done: bool
    info: dict


class Environment:
    """Single-threaded episodic state machine.

    Subclasses implement ``_reset()`` and ``_step(action)`` returning
    ``(observation, reward, terminated)``; the base class owns seeding, action
    validation, the episode horizon and the done/reset protocol.
    """

    name = "env"
    env_type = "toy"
    horizon = 200
    observation_space: Space
    action_space: Space

    def __init__(self):
        self.rng = seeded_rng(0, "env")
        self._done = True
        self._t = 0

    def reset(self, seed: int | None = None):
        if seed is not None:
            self.rng = seeded_rng(seed, "env")
        self._t = 0
        self._done = False
        return self._reset()

    def step(self, action) -> StepResult:
        if self._done:
            raise EpisodeFinished(f"{self.name}: episode is over; call reset() first")
        info = {}
        space = self.action_space
        if isinstance(space, Discrete):
            if not space.contains(action):
                raise InvalidAction(f"{self.name}: action {action!r} not in {space!r}")
            action = int(action)
        elif isinstance(space, Box):
            arr = np.asarray(action, dtype=np.float32)
            if arr.shape != space.shape:
                if arr.size == int(np.prod(space.shape)):
                    arr = arr.reshape(space.shape)
                else:
                    raise InvalidAction(f"{self.name}: action shape {arr.shape} != {space.shape}")
            if not np.all(np.isfinite(arr)):
                raise InvalidAction(f"{self.name}: non-finite action {arr!r}")
            clipped = space.clip(arr)
            if not np.array_equal(clipped, arr):
                info["clipped"] = "true"
            action = clipped
        obs, reward, terminated = self._step(action)
        self._t += 1
        done = bool(terminated)
        if not done and self._t >= self.horizon:
            done = True
            info["truncated"] = "true"
        self._done = done
        return StepResult(obs, float(reward), done, info)

    def _reset(self):
        raise NotImplementedError

    def _step(self, action):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r} ({self.env_type})>"
