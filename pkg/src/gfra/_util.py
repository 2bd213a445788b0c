"""Small shared helpers: deterministic rounding and reproducible RNG streams."""

from __future__ import annotations

import math

import numpy as np


def round_half_up(x: float) -> int:
    """Round to the nearest integer with .5 going up (not banker's rounding)."""
    return int(math.floor(x + 0.5))


def philox_stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for the stream addressed by (seed, *path).

    Distinct paths yield statistically independent streams, so trials and
    cycles can be simulated in any order (or concurrently) and still replay
    bit-exactly.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng: int | np.random.Generator, *path: int) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return philox_stream(int(rng), *path)
