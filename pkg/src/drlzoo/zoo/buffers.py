"""Replay and rollout storage."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from ..envs.spaces import Box, DictSpace, Discrete, Space


class BufferTooSmall(ValueError):
    pass


class BadIndex(IndexError):
    pass


class ObsArray:
    """Preallocated storage for observations of one space (dict spaces split per key)."""

    def __init__(self, space: Space, capacity: int):
        self.space = space
        if isinstance(space, DictSpace):
            self.arrays = OrderedDict((k, np.zeros((capacity,) + s.shape, dtype=np.float32))
                                      for k, s in space.entries.items())
        else:
            self.arrays = np.zeros((capacity,) + tuple(space.shape), dtype=np.float32)

    def __setitem__(self, i, obs):
        if isinstance(self.arrays, dict):
            for k, arr in self.arrays.items():
                arr[i] = obs[k]
        else:
            self.arrays[i] = obs

    def __getitem__(self, idx):
        if isinstance(self.arrays, dict):
            return OrderedDict((k, arr[idx]) for k, arr in self.arrays.items())
        return self.arrays[idx]


def batch_obs(obs_list, space: Space):
    if isinstance(space, DictSpace):
        return OrderedDict((k, np.stack([o[k] for o in obs_list]).astype(np.float32)) for k in space.keys())
    return np.stack(obs_list).astype(np.float32)


def single_obs(obs, space: Space):
    """Add a leading batch axis of 1."""
    if isinstance(space, DictSpace):
        return OrderedDict((k, np.asarray(obs[k], dtype=np.float32)[None]) for k in space.keys())
    return np.asarray(obs, dtype=np.float32)[None]


def _action_store(space: Space, capacity: int) -> np.ndarray:
    if isinstance(space, Discrete):
        return np.zeros(capacity, dtype=np.int64)
    return np.zeros((capacity,) + space.shape, dtype=np.float32)


class SumTree:
    """Binary tree of partial sums over ``capacity`` leaves (array layout, root at 1)."""

    def __init__(self, capacity: int):
        size = 1
        while size < capacity:
            size *= 2
        self.capacity = capacity
        self.size = size
        self.tree = np.zeros(2 * size, dtype=np.float64)

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def leaf(self, i: int) -> float:
        return float(self.tree[self.size + i])

    def leaves(self, n: int | None = None) -> np.ndarray:
        return self.tree[self.size:self.size + (self.capacity if n is None else n)]

    def update(self, i: int, value: float) -> None:
        if not 0 <= i < self.capacity:
            raise BadIndex(f"leaf {i} outside [0, {self.capacity})")
        j = self.size + i
        delta = value - self.tree[j]
        while j >= 1:
            self.tree[j] += delta
            j //= 2

    def find(self, mass: float) -> int:
        """Leaf whose cumulative-sum interval contains ``mass``."""
        j = 1
        while j < self.size:
            left = self.tree[2 * j]
            if mass < left:
                j = 2 * j
            else:
                mass -= left
                j = 2 * j + 1
        return j - self.size


class ReplayBuffer:
    """Ring buffer of transitions with optional proportional prioritisation."""

    def __init__(self, observation_space: Space, action_space: Space, capacity: int = 100_000,
                 prioritized: bool = False, alpha: float = 0.6, eps: float = 1e-5):
        self.capacity = int(capacity)
        self.obs = ObsArray(observation_space, self.capacity)
        self.next_obs = ObsArray(observation_space, self.capacity)
        self.actions = _action_store(action_space, self.capacity)
        self.rewards = np.zeros(self.capacity, dtype=np.float32)
        self.dones = np.zeros(self.capacity, dtype=np.float32)
        self.prioritized = prioritized
        self.alpha = alpha
        self.eps = eps
        self.tree = SumTree(self.capacity) if prioritized else None
        self.max_priority = 1.0
        self.pos = 0
        self.n = 0

    def __len__(self) -> int:
        return self.n

    def add(self, obs, action, reward, next_obs, done) -> int:
        i = self.pos
        self.obs[i] = obs
        self.next_obs[i] = next_obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.dones[i] = float(done)
        if self.prioritized:
            self.tree.update(i, self.max_priority ** self.alpha)
        self.pos = (self.pos + 1) % self.capacity
        self.n = min(self.n + 1, self.capacity)
        return i

    def _gather(self, idx):
        return {
            "obs": self.obs[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_obs": self.next_obs[idx],
            "dones": self.dones[idx],
            "indices": idx,
        }

    def sample(self, batch_size: int, rng, beta: float = 0.4) -> dict:
        if self.n < batch_size:
            raise BufferTooSmall(f"buffer holds {self.n} transitions, batch needs {batch_size}")
        if not self.prioritized:
            idx = rng.integers(0, self.n, size=batch_size)
            batch = self._gather(idx)
            batch["weights"] = np.ones(batch_size, dtype=np.float32)
            return batch
        total = self.tree.total
        # stratified: one draw per equal-mass segment
        bounds = np.linspace(0.0, total, batch_size + 1)
        u = rng.uniform(bounds[:-1], bounds[1:])
        idx = np.array([min(self.tree.find(m), self.n - 1) for m in u], dtype=np.int64)
        probs = np.array([self.tree.leaf(i) for i in idx]) / total
        w = (self.n * probs) ** (-beta)
        batch = self._gather(idx)
        batch["weights"] = (w / w.max()).astype(np.float32)
        return batch

    def sample_index(self, rng) -> int:
        """Single proportional draw; used by frequency tests."""
        if self.n == 0:
            raise BufferTooSmall("empty buffer")
        if not self.prioritized:
            return int(rng.integers(0, self.n))
        return min(self.tree.find(rng.uniform(0.0, self.tree.total)), self.n - 1)

    def update_priorities(self, indices, td_errors) -> None:
        if not self.prioritized:
            return
        for i, delta in zip(np.asarray(indices).reshape(-1), np.asarray(td_errors).reshape(-1)):
            i = int(i)
            if not 0 <= i < self.n:
                raise BadIndex(f"index {i} outside the {self.n} stored transitions")
            p = abs(float(delta)) + self.eps
            self.max_priority = max(self.max_priority, p)
            self.tree.update(i, p ** self.alpha)

    def set_priority(self, i: int, priority: float) -> None:
        if not 0 <= i < self.n:
            raise BadIndex(f"index {i} outside the {self.n} stored transitions")
        self.max_priority = max(self.max_priority, priority)
        self.tree.update(i, priority ** self.alpha)


def replay_sample(buffer: ReplayBuffer, batch_size: int, rng, beta: float = 0.4) -> dict:
    return buffer.sample(batch_size, rng, beta)


def per_update_priorities(buffer: ReplayBuffer, indices, td_errors) -> None:
    buffer.update_priorities(indices, td_errors)


class RolloutBuffer:
    """On-policy trajectory segment of fixed length."""

    FIELDS = ("actions", "rewards", "dones", "log_probs", "values")

    def __init__(self, observation_space: Space, action_space: Space, horizon: int):
        self.observation_space = observation_space
        self.action_space = action_space
        self.horizon = horizon
        self.clear()

    def clear(self) -> None:
        self.obs = []
        self.actions = []
        self.rewards = []
        self.dones = []
        self.log_probs = []
        self.values = []

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def full(self) -> bool:
        return len(self) >= self.horizon

    def add(self, obs, action, reward, done, log_prob, value) -> None:
        self.obs.append(obs)
        self.actions.append(action)
        self.rewards.append(reward)
        self.dones.append(float(done))
        self.log_probs.append(log_prob)
        self.values.append(value)

    def batch(self, last_value: float) -> dict:
        discrete = isinstance(self.action_space, Discrete)
        return {
            "obs": batch_obs(self.obs, self.observation_space),
            "actions": np.asarray(self.actions, dtype=np.int64 if discrete else np.float32),
            "rewards": np.asarray(self.rewards, dtype=np.float32),
            "dones": np.asarray(self.dones, dtype=np.float32),
            "log_probs": np.asarray(self.log_probs, dtype=np.float32),
            "values": np.asarray(self.values + [last_value], dtype=np.float32),
        }


def rollout_to_arrays(batch: dict, observation_space: Space) -> list[np.ndarray]:
    """Flatten a rollout batch into an ordered list of float32 arrays (wire form)."""
    out = []
    if isinstance(observation_space, DictSpace):
        out += [batch["obs"][k] for k in observation_space.keys()]
    else:
        out.append(batch["obs"])
    out += [np.asarray(batch["actions"], dtype=np.float32), batch["rewards"], batch["dones"],
            batch["log_probs"], batch["values"]]
    return [np.asarray(a, dtype=np.float32) for a in out]


def rollout_from_arrays(arrays, observation_space: Space, action_space: Space) -> dict:
    arrays = [a.data if hasattr(a, "data") and not isinstance(a, np.ndarray) else a for a in arrays]
    if isinstance(observation_space, DictSpace):
        keys = observation_space.keys()
        obs = OrderedDict(zip(keys, arrays[:len(keys)]))
        rest = arrays[len(keys):]
    else:
        obs, rest = arrays[0], arrays[1:]
    actions, rewards, dones, log_probs, values = rest
    if isinstance(action_space, Discrete):
        actions = actions.astype(np.int64)
    return {"obs": obs, "actions": actions, "rewards": rewards, "dones": dones,
            "log_probs": log_probs, "values": values}
