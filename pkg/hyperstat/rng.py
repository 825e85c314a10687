# SPDX-License-Identifier: BSD-3-Clause

"""Seeded random streams.

All randomness goes through numpy's `SFC64` generator (256-bit state), seeded via
`SeedSequence`. Per-run streams are derived from a base seed by xor-ing in the run
index times the 64-bit golden-ratio constant, so run `k` of an experiment is
reproducible on its own.
"""

import numpy as np


GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1


def derive_seed(seed: int, run_index: int) -> int:
    return (int(seed) ^ ((run_index * GOLDEN_GAMMA) & MASK64)) & MASK64


def make_rng(seed: int, run_index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence(derive_seed(seed, run_index))))


def substream(rng: np.random.Generator) -> np.random.Generator:
    """An independent child stream; does not consume values from `rng`."""
    return rng.spawn(1)[0]
