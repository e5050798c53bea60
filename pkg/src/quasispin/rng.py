"""Counter-based random numbers for the hidden-variable engine.

Every draw is a pure function of (seed, purpose, counters...), so a
molecule's stream depends only on its index and how many updates it has
absorbed, never on how molecules are batched across threads or in what
order other molecules were processed. That makes ensemble runs
reproducible bit for bit at any thread count.

The hash is a chain of splitmix64 finalizer rounds, one per input word.
"""

from __future__ import annotations

import numpy as np

# stream separators for independent per-molecule draws
PURPOSE_DIRECTIONS = 1  # roulette-wheel direction-tuple draw
PURPOSE_LAMBDAS = 2  # per-qubit threshold variable draw
PURPOSE_UPDATE_COIN = 3  # quasicontinuous per-step update decision

_GOLDEN = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB

_U64_MASK = (1 << 64) - 1


def _mix(x: np.ndarray) -> np.ndarray:
    """One splitmix64 finalizer round on uint64 input (wraps mod 2^64)."""
    with np.errstate(over="ignore"):  # wraparound is the whole point
        z = x + np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_2)
        return z ^ (z >> np.uint64(31))


def _as_u64(word) -> np.ndarray:
    arr = np.asarray(word)
    if arr.dtype.kind in "ui":
        return arr.astype(np.uint64, copy=False)
    # plain python ints arrive as object/int64; reduce mod 2^64 first
    return np.asarray(int(word) & _U64_MASK, dtype=np.uint64)


def counter_hash(seed: int, purpose: int, *counters) -> np.ndarray:
    """Hash of (seed, purpose, counters...), broadcast over array-valued
    counters. Returns uint64 with the broadcast shape."""
    h = _mix(_as_u64(seed))
    h = _mix(h ^ _as_u64(purpose))
    for word in counters:
        h = _mix(h ^ _as_u64(word))
    return h


def counter_uniform(seed: int, purpose: int, *counters) -> np.ndarray:
    """Uniform float64 draws in [0, 1), one per broadcast element: the
    top 53 bits of the hash scaled down."""
    h = counter_hash(seed, purpose, *counters)
    return (h >> np.uint64(11)) * 2.0**-53
