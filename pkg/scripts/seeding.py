#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Seeded Random Streams

Named random substreams derived from a single 64-bit master seed.

A substream is identified by (master seed, stream name, integer index...).
Each one is an independent Philox generator keyed through numpy's
SeedSequence spawn keys, so draws for iteration t never depend on how many
other iterations, instances or trials were requested.

Author: Bilinear Toolkit
Date: October 2025
"""

import zlib
from typing import Iterable

import numpy as np

from errors import ConfigError

MAX_SEED = 2 ** 64 - 1

# Stream names used across the toolkit
INSTANCE = "instance"
ROUNDING = "rounding"
SEPARATION = "separation"
CHERNOFF = "chernoff"
FORMULA = "formula"


def check_seed(seed: int) -> int:
    """Return seed as int, rejecting values outside the unsigned 64-bit range."""
    try:
        value = int(seed)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Seed must be an integer, got {seed!r}") from e
    if value < 0 or value > MAX_SEED:
        raise ConfigError(f"Seed {value} outside the unsigned 64-bit range")
    return value


def stream_key(name: str) -> int:
    """Stable integer key for a stream name."""
    return zlib.crc32(name.encode("utf-8"))


def substream(seed: int, name: str, *index: int) -> np.random.Generator:
    """
    Build the generator for one named substream.

    Args:
        seed: Master seed (unsigned 64-bit)
        name: Stream name, e.g. ``"rounding"``
        *index: Non-negative integers locating the draw inside the stream
            (iteration number, attempt number, ...)

    Returns:
        A numpy Generator backed by Philox
    """
    spawn_key = (stream_key(name),) + tuple(int(i) for i in index)
    sequence = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(sequence))


def seed_list(values: Iterable[int]) -> list:
    """Validate a list of seeds, preserving order."""
    seeds = [check_seed(v) for v in values]
    if not seeds:
        raise ConfigError("Seed list must not be empty")
    return seeds
