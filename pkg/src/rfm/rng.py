"""Seeded random streams.

All randomness goes through numpy's Philox counter-based generator keyed by
a ``SeedSequence`` built from a master seed and integer keys, so a stream
such as "replicate 3, subsample 17" is reproducible on its own.
"""
import numpy as np


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def derive_seed(seed: int, *keys: int) -> int:
    ss = np.random.SeedSequence([int(seed), *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0])
