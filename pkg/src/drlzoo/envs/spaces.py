"""Observation and action domains."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np


class Space:
    def sample(self, rng: np.random.Generator):
        raise NotImplementedError

    def contains(self, value) -> bool:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class Discrete(Space):
    def __init__(self, n: int):
        if int(n) != n or n < 1:
            raise ValueError(f"Discrete needs n >= 1, got {n}")
        self.n = int(n)

    def sample(self, rng):
        return int(rng.integers(self.n))

    def contains(self, value) -> bool:
        if isinstance(value, (bool, np.bool_)):
            return False
        if isinstance(value, np.ndarray):
            if value.shape != () or not np.issubdtype(value.dtype, np.integer):
                return False
            value = int(value)
        if not isinstance(value, (int, np.integer)):
            return False
        return 0 <= int(value) < self.n

    def describe(self) -> dict:
        return {"type": "Discrete", "n": self.n}

    def __eq__(self, other):
        return isinstance(other, Discrete) and other.n == self.n

    def __hash__(self):
        return hash(("Discrete", self.n))

    def __repr__(self):
        return f"Discrete({self.n})"


class Box(Space):
    """Axis-aligned box of float32 values; bounds may be infinite."""

    def __init__(self, low, high, shape=None):
        if shape is None:
            shape = np.broadcast_shapes(np.shape(low), np.shape(high))
        self.shape = tuple(int(s) for s in shape)
        self.low = np.broadcast_to(np.asarray(low, dtype=np.float32), self.shape).copy()
        self.high = np.broadcast_to(np.asarray(high, dtype=np.float32), self.shape).copy()
        if np.any(self.low > self.high):
            raise ValueError("Box needs low <= high elementwise")

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.low)) and np.all(np.isfinite(self.high)))

    def sample(self, rng):
        finite = np.isfinite(self.low) & np.isfinite(self.high)
        u = rng.uniform(size=self.shape)
        out = np.where(finite, self.low + u * np.where(finite, self.high - self.low, 0.0), 0.0)
        if not finite.all():
            # unbounded dimensions: standard normal clipped into whatever bound exists
            z = rng.standard_normal(self.shape)
            out = np.where(finite, out, np.clip(z, self.low, self.high))
        return np.clip(out.astype(np.float32), self.low, self.high)

    def contains(self, value) -> bool:
        try:
            arr = np.asarray(value, dtype=np.float32)
        except (TypeError, ValueError):
            return False
        if arr.shape != self.shape or not np.all(np.isfinite(arr)):
            return False
        return bool(np.all(arr >= self.low) and np.all(arr <= self.high))

    def clip(self, value) -> np.ndarray:
        return np.clip(np.asarray(value, dtype=np.float32), self.low, self.high)

    def describe(self) -> dict:
        return {"type": "Box", "shape": list(self.shape),
                "low": [float(v) for v in self.low.reshape(-1)],
                "high": [float(v) for v in self.high.reshape(-1)]}

    def __eq__(self, other):
        return (isinstance(other, Box) and other.shape == self.shape
                and np.array_equal(other.low, self.low) and np.array_equal(other.high, self.high))

    def __hash__(self):
        return hash(("Box", self.shape))

    def __repr__(self):
        if np.all(self.low == self.low.flat[0]) and np.all(self.high == self.high.flat[0]):
            return f"Box({self.low.flat[0]}, {self.high.flat[0]}, {self.shape})"
        return f"Box(shape={self.shape})"


class DictSpace(Space):
    """One level of named sub-spaces, kept in insertion order."""

    def __init__(self, entries):
        entries = OrderedDict(entries)
        if not entries:
            raise ValueError("DictSpace needs at least one entry")
        for k, v in entries.items():
            if isinstance(v, DictSpace):
                raise ValueError(f"DictSpace entry {k!r} is itself a DictSpace; nesting is not supported")
            if not isinstance(v, Space):
                raise TypeError(f"DictSpace entry {k!r} is not a Space")
        self.entries = entries

    def keys(self):
        return list(self.entries)

    def __getitem__(self, key):
        return self.entries[key]

    def sample(self, rng):
        return OrderedDict((k, s.sample(rng)) for k, s in self.entries.items())

    def contains(self, value) -> bool:
        if not isinstance(value, dict) or set(value) != set(self.entries):
            return False
        return all(s.contains(value[k]) for k, s in self.entries.items())

    def describe(self) -> dict:
        return {"type": "Dict", "entries": {k: s.describe() for k, s in self.entries.items()}}

    def __eq__(self, other):
        return isinstance(other, DictSpace) and list(other.entries.items()) == list(self.entries.items())

    def __hash__(self):
        return hash(tuple(self.entries))

    def __repr__(self):
        inner = ", ".join(f"{k}: {v!r}" for k, v in self.entries.items())
        return f"DictSpace({{{inner}}})"


def space_sample(space: Space, rng: np.random.Generator):
    return space.sample(rng)


def space_contains(space: Space, value) -> bool:
    return space.contains(value)


def space_from_description(desc: dict) -> Space:
    kind = desc["type"]
    if kind == "Discrete":
        return Discrete(desc["n"])
    if kind == "Box":
        shape = tuple(desc["shape"])
        return Box(np.asarray(desc["low"], dtype=np.float32).reshape(shape),
                   np.asarray(desc["high"], dtype=np.float32).reshape(shape), shape)
    if kind == "Dict":
        return DictSpace((k, space_from_description(v)) for k, v in desc["entries"].items())
    raise ValueError(f"unknown space type {kind!r}")
