"""Small environments with exact oracles, plus image and dictionary variants."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .core import Environment
from .spaces import Box, DictSpace, Discrete

# action id -> (d_row, d_col)
MOVES = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1)}


class GridWorld(Environment):
    """Walk from the top-left corner to the bottom-right one.

    Actions 0..3 are up, down, left, right; bumping into a wall is a no-op.
    Entering the goal pays 1 and ends the episode.  Observations are one-hot
    vectors over cells in row-major order.
    """

    name = "GridWorld-5x5"
    env_type = "toy"
    horizon = 100

    def __init__(self, size: int = 5):
        super().__init__()
        self.size = size
        self.start = (0, 0)
        self.goal = (size - 1, size - 1)
        self.action_space = Discrete(4)
        self.observation_space = Box(0.0, 1.0, (size * size,))
        self.pos = self.start

    def cell_index(self, pos) -> int:
        return pos[0] * self.size + pos[1]

    def transition(self, pos, action):
        dr, dc = MOVES[action]
        r, c = pos[0] + dr, pos[1] + dc
        if 0 <= r < self.size and 0 <= c < self.size:
            return (r, c)
        return pos

    def encode(self, pos):
        obs = np.zeros(self.size * self.size, dtype=np.float32)
        obs[self.cell_index(pos)] = 1.0
        return obs

    def _reset(self):
        self.pos = self.start
        return self.encode(self.pos)

    def _step(self, action):
        self.pos = self.transition(self.pos, action)
        reached = self.pos == self.goal
        return self.encode(self.pos), 1.0 if reached else 0.0, reached


class PixelGrid(GridWorld):
    """GridWorld on an 8x8 board observed as a 8x8x1 gray image.

    Pixel values: agent 1.0, goal 0.5, empty 0.0.
    """

    name = "PixelGrid-8x8"

    def __init__(self):
        super().__init__(size=8)
        self.observation_space = Box(0.0, 1.0, (8, 8, 1))

    def encode(self, pos):
        img = np.zeros((self.size, self.size, 1), dtype=np.float32)
        img[self.goal[0], self.goal[1], 0] = 0.5
        img[pos[0], pos[1], 0] = 1.0
        return img


class HybridReach(Environment):
    """Move a point toward a target in the unit square.

    Observations are a dictionary with a 4-vector ``state`` (agent xy, target
    xy) and an 8x8x1 ``image`` marking the agent (1.0) and target (0.5).
    Actions are 2-D velocities in [-1, 1]; reward is minus the distance to the
    target after the move.
    """

    name = "HybridReach"
    env_type = "toy"
    horizon = 50
    speed = 0.1

    def __init__(self):
        super().__init__()
        self.observation_space = DictSpace(OrderedDict([
            ("state", Box(-1.0, 1.0, (4,))),
            ("image", Box(0.0, 1.0, (8, 8, 1))),
        ]))
        self.action_space = Box(-1.0, 1.0, (2,))
        self.agent = np.zeros(2)
        self.target = np.zeros(2)

    @staticmethod
    def _pixel(p):
        return tuple(np.clip(((p + 1.0) / 2.0 * 8).astype(int), 0, 7))

    def _obs(self):
        img = np.zeros((8, 8, 1), dtype=np.float32)
        tr, tc = self._pixel(self.target)
        img[tr, tc, 0] = 0.5
        ar, ac = self._pixel(self.agent)
        img[ar, ac, 0] = 1.0
        state = np.concatenate([self.agent, self.target]).astype(np.float32)
        return OrderedDict([("state", state), ("image", img)])

    def _reset(self):
        self.agent = self.rng.uniform(-1.0, 1.0, size=2)
        self.target = self.rng.uniform(-1.0, 1.0, size=2)
        return self._obs()

    def _step(self, action):
        self.agent = np.clip(self.agent + self.speed * np.asarray(action, dtype=np.float64), -1.0, 1.0)
        reward = -float(np.linalg.norm(self.agent - self.target))
        return self._obs(), reward, False
