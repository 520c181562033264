from __future__ import annotations

import zlib

import numpy as np


def seeded_rng(seed: int, tag: str = "") -> np.random.Generator:
    """Deterministic generator for ``seed``, split by a domain tag.

    Components draw from distinct tags ("env", "init", "sampling", ...) so that
    adding draws in one place never shifts another component's stream.
    """
    key = (zlib.crc32(tag.encode("utf-8")),) if tag else ()
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def derive_seed(seed: int, *parts) -> int:
    """A 31-bit integer seed derived from ``seed`` and arbitrary labels."""
    label = "/".join(str(p) for p in parts).encode("utf-8")
    return int(np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(label),)).generate_state(1)[0] >> 1)
