"""Deterministic random-stream derivation from a single user seed.

Every seeded operation in the package draws from its own substream, keyed by
a fixed stage tag, so one integer seed reproduces the whole pipeline and
replications can run in any order (or in parallel) without coordinating.
"""

from __future__ import annotations

import numpy as np

# Stage tags. Each seeded operation owns one so that passing the same seed to
# different operations never reuses a stream.
STREAM_CENTER = 0
STREAM_FOLDS = 1
STREAM_ROTATION = 2
STREAM_CLEAN = 3
STREAM_CONTAM = 4
STREAM_ORACLE = 5
STREAM_VALIDATE = 6


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream (seed, key...).

    The same (seed, key) always yields the same stream; distinct keys give
    statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def derive_seed(seed: int, *key: int) -> int:
    """Collapse (seed, key...) into a single integer sub-seed.

    Used where an operation's signature takes a seed rather than a Generator,
    e.g. per-replication seeds in the benchmark loop.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
