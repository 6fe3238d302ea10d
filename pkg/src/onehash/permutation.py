"""Seeded permutations of the feature space {0, ..., D-1}.

Two modes:

* explicit -- a materialized permutation vector produced by a Fisher-Yates
  shuffle driven by the counter-based splitmix64 stream in ``_bits``.  Same
  seed, same permutation, on every platform.
* universal -- the 2-universal map x -> ((a*x + b) mod p) mod D with p the
  smallest prime >= D.  This is only an approximation to a permutation
  (it need not be a bijection onto [0, D)) and is intended for spaces too
  large to materialize; no accuracy guarantees are made.
"""

from __future__ import annotations

import numpy as np

from . import _bits


def smallest_prime_at_least(n: int) -> int:
    """Smallest prime >= n, by deterministic trial division."""
    if n <= 2:
        return 2
    c = n | 1  # first odd candidate
    while not _is_prime(c):
        c += 2
    return c


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class Permutation:
    """A permutation of [0, D), explicit or universal-hash approximated."""

    __slots__ = ("mode", "d", "seed", "vector", "a", "b", "p")

    def __init__(self, mode, d, seed=None, vector=None, a=None, b=None, p=None):
        self.mode = mode
        self.d = d
        self.seed = seed
        self.vector = vector
        self.a = a
        self.b = b
        self.p = p

    # -- construction ---------------------------------------------------

    @classmethod
    def generate(cls, seed: int, d: int) -> "Permutation":
        """Fisher-Yates shuffle of [0, d) from a 64-bit seed."""
        if d < 1:
            raise ValueError("d must be >= 1")
        arr = list(range(d))
        if d > 1:
            bounds = np.arange(d, 1, -1, dtype=np.uint64)
            js = _bits.bounded_draws(seed, bounds).tolist()
            for t, j in enumerate(js):
                i = d - 1 - t
                arr[i], arr[j] = arr[j], arr[i]
        return cls("explicit", d, seed=seed,
                   vector=np.asarray(arr, dtype=np.int64))

    @classmethod
    def from_vector(cls, vector, seed=None) -> "Permutation":
        """Wrap an explicit permutation vector (validated)."""
        vec = np.asarray(vector, dtype=np.int64)
        d = len(vec)
        if d == 0:
            raise ValueError("empty permutation vector")
        seen = np.zeros(d, dtype=bool)
        if vec.min() < 0 or vec.max() >= d:
            raise ValueError("vector entries out of range")
        seen[vec] = True
        if not seen.all():
            raise ValueError("vector is not a bijection on [0, d)")
        return cls("explicit", d, seed=seed, vector=vec)

    @classmethod
    def universal(cls, seed: int, d: int, a=None, b=None, p=None) -> "Permutation":
        """Universal-hash mode; (a, b, p) derived from seed unless given."""
        if d < 1:
            raise ValueError("d must be >= 1")
        if p is None:
            p = smallest_prime_at_least(d)
        if p < d:
            raise ValueError("p must be >= d")
        if a is None:
            a = 1 + _bits.hash2(seed, 0) % (p - 1) if p > 1 else 1
        if b is None:
            b = _bits.hash2(seed, 1) % p
        if not (1 <= a < p and 0 <= b < p):
            raise ValueError("require a in [1, p) and b in [0, p)")
        return cls("universal", d, seed=seed, a=a, b=b, p=p)

    # -- evaluation -----------------------------------------------------

    def apply(self, i: int) -> int:
        """Image of a single index."""
        if not 0 <= i < self.d:
            raise ValueError(f"index {i} out of range [0, {self.d})")
        if self.mode == "explicit":
            return int(self.vector[i])
        return ((self.a * i + self.b) % self.p) % self.d

    def apply_array(self, idx: np.ndarray) -> np.ndarray:
        """Vectorized image of an index array."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.d):
            raise ValueError("index out of range")
        if self.mode == "explicit":
            return self.vector[idx]
        if self.p <= 2**31:  # a*i fits in int64
            return ((self.a * idx + self.b) % self.p) % self.d
        out = [((self.a * int(i) + self.b) % self.p) % self.d for i in idx]
        return np.asarray(out, dtype=np.int64)

    def inverse(self) -> "Permutation":
        """Inverse permutation (explicit mode only)."""
        if self.mode != "explicit":
            raise ValueError("universal mode has no inverse")
        inv = np.empty(self.d, dtype=np.int64)
        inv[self.vector] = np.arange(self.d, dtype=np.int64)
        return Permutation("explicit", self.d, vector=inv)

    # -- serialization --------------------------------------------------

    def save(self, path) -> None:
        """Write the explicit vector as flat little-endian uint32 entries."""
        if self.mode != "explicit":
            raise ValueError("only explicit permutations are serializable")
        if self.d > 2**32:
            raise ValueError("d too large for the 32-bit file format")
        self.vector.astype("<u4").tofile(path)

    @classmethod
    def load(cls, path) -> "Permutation":
        vec = np.fromfile(path, dtype="<u4").astype(np.int64)
        return cls.from_vector(vec)

    def __repr__(self):
        return f"Permutation(mode={self.mode!r}, d={self.d}, seed={self.seed!r})"
