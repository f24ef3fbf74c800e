"""Deterministic seed derivation.

Seeds are plain tuples of non-negative integers. A child seed is formed by
appending keys, so every random stream is a pure function of the master seed
and its position in the computation (bag index, run, fold, ...), never of the
order in which work is scheduled.
"""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

Seed = Union[int, tuple]


def _flatten(parts: Iterable) -> list[int]:
    out: list[int] = []
    for p in parts:
        if isinstance(p, (tuple, list)):
            out.extend(_flatten(p))
        else:
            value = int(p)
            if value < 0:
                raise ValueError(f"seed components must be non-negative, got {value}")
            out.append(value)
    return out


def child_seed(seed: Seed, *keys: int) -> tuple:
    return tuple(_flatten((seed, keys)))


def make_rng(seed: Seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_flatten((seed,))))
