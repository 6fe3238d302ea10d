"""Fixed 64-bit mixing primitives.

Everything random in this library bottoms out in the splitmix64 finalizer,
used either as a counter-based stream (seed + i*GAMMA, then mix) or as a
keyed mixing hash.  The constants are frozen; identical seeds produce
identical output on every platform.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

_U64_MAX = np.uint64(MASK64)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)


def mix64(x: int) -> int:
    """splitmix64 finalizer on a single 64-bit value."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _C1
    z = z ^ (z >> np.uint64(27))
    z = z * _C2
    return z ^ (z >> np.uint64(31))


def stream(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Counter-based stream: word i is mix64(seed + (offset+i+1)*GAMMA)."""
    base = np.uint64(seed & MASK64)
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    return _mix64_array(base + idx * np.uint64(GAMMA))


def hash2(seed: int, x: int) -> int:
    """Keyed mixing hash of a (seed, value) pair."""
    return mix64((mix64(seed) ^ ((x + 1) * GAMMA)) & MASK64)


def hash2_array(seed: int, xs: np.ndarray) -> np.ndarray:
    """Vectorized hash2 over an integer array."""
    mixed_seed = np.uint64(mix64(seed))
    z = (xs.astype(np.uint64) + np.uint64(1)) * np.uint64(GAMMA)
    return _mix64_array(mixed_seed ^ z)


def bounded_draws(seed: int, bounds: np.ndarray) -> np.ndarray:
    """One unbiased draw in [0, bounds[i]) per entry, by rejection.

    bounds must be uint64 with every entry >= 1.  Rejection keeps the
    draws exactly uniform; with bounds far below 2**64 a retry almost
    never happens, but the loop is there for correctness.
    """
    n = len(bounds)
    r = stream(seed, n)
    # accept r <= 2**64 - 1 - (2**64 mod bound); no wraparound since bound >= 1
    m = (_U64_MAX % bounds + np.uint64(1)) % bounds
    limit = _U64_MAX - m
    offset = n
    bad = np.flatnonzero(r > limit)
    while bad.size:
        r[bad] = stream(seed, bad.size, offset)
        offset += bad.size
        bad = bad[r[bad] > limit[bad]]
    return r % bounds
