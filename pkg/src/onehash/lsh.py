"""Signature construction and an L-table bucket index for near-neighbor
search.

Each table sketches a vector with its own one-permutation sketch, keeps
b bits per bin, and concatenates the k bin values MSB-first into a
B = b*k bit bucket address (B <= 64).  Empty bins contribute b zero
bits, which slightly inflates collisions between vectors that are empty
in the same bin; callers verify candidates against the exact
resemblance.  A query is the deduplicated union of its bucket in every
table.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _bits
from .data import BinarySet
from .encoding import bbit
from .permutation import Permutation
from .sketch import pad_dim, sketch_fixed

_DIRECT_ADDRESS_LIMIT = 2**20


def table_seed(master_seed: int, table: int) -> int:
    """Deterministic per-table permutation seed."""
    return _bits.hash2(master_seed, table)


def build_signature(s: BinarySet, seed: int, b: int, k: int,
                    dim: int | None = None) -> int:
    """b*k-bit signature of one vector under one table's permutation."""
    if b * k > 64:
        raise ValueError("signature must fit in 64 bits (b*k <= 64)")
    d_eff = pad_dim(dim if dim is not None else s.dim, k)
    perm = Permutation.generate(seed, d_eff)
    sk = sketch_fixed(s, perm, k)
    truncated = bbit(sk, b)
    sig = 0
    for v, occ in zip(truncated.values, truncated.occupied):
        sig = (sig << b) | (int(v) if occ else 0)
    return sig


def pack_signature(bin_values: list, b: int) -> int:
    """Concatenate per-bin b-bit values MSB-first; None packs as zero."""
    sig = 0
    for v in bin_values:
        sig = (sig << b) | (0 if v is None else int(v) & ((1 << b) - 1))
    return sig


@dataclass
class LshIndex:
    """L hash tables mapping bucket numbers to data-point ids."""

    n_tables: int
    b: int
    k: int
    dim: int
    master_seed: int
    seeds: list
    tables: list  # one dict {bucket: [ids]} per table
    size: int = 0

    def __post_init__(self):
        self._perms = [None] * self.n_tables

    @property
    def n_buckets(self) -> int:
        return 1 << (self.b * self.k)

    def _perm(self, table: int) -> Permutation:
        if self._perms[table] is None:
            self._perms[table] = Permutation.generate(
                self.seeds[table], pad_dim(self.dim, self.k))
        return self._perms[table]

    def signature(self, s: BinarySet, table: int) -> int:
        sk = bbit(sketch_fixed(s, self._perm(table), self.k), self.b)
        return pack_signature(sk.slots, self.b)


def build_index(dataset: list[BinarySet], n_tables: int, b: int, k: int,
                master_seed: int) -> LshIndex:
    """Index every vector into its signature bucket in every table.

    Tables are cheap dicts; with b*k <= 20 a direct-addressed array
    would also fit, but the dict keeps memory proportional to occupancy
    either way.
    """
    if not dataset:
        raise ValueError("empty dataset")
    if b * k > 64:
        raise ValueError("signature must fit in 64 bits (b*k <= 64)")
    dim = dataset[0].dim
    if any(s.dim != dim for s in dataset):
        raise ValueError("dataset vectors must share one dimension")
    seeds = [table_seed(master_seed, t) for t in range(n_tables)]
    index = LshIndex(n_tables, b, k, dim, master_seed, seeds,
                     tables=[{} for _ in range(n_tables)], size=len(dataset))
    for t in range(n_tables):
        buckets = index.tables[t]
        for i, s in enumerate(dataset):
            buckets.setdefault(index.signature(s, t), []).append(i)
    return index


def query(index: LshIndex, q: BinarySet) -> set[int]:
    """Union of the query's bucket across all tables, deduplicated."""
    if len(q) == 0:
        raise ValueError("empty query")
    out: set[int] = set()
    for t in range(index.n_tables):
        sig = index.signature(q, t)
        out.update(index.tables[t].get(sig, ()))
    return out


def union_buckets(bucket_lists) -> set[int]:
    """Deduplicated union of per-table candidate lists."""
    out: set[int] = set()
    for ids in bucket_lists:
        out.update(ids)
    return out


# -- serialization ---------------------------------------------------------
#
# Layout (little-endian): magic "OPHL", version u8, L u32, b u8, k u8,
# dim u64, master_seed i64, per-table seed u64; then per table the
# number of occupied buckets followed by (bucket u64, count u32,
# ids u32...) records.

_MAGIC = b"OPHL"


def save_index(path, index: LshIndex) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BIBBQ", 1, index.n_tables, index.b, index.k,
                             index.dim))
        fh.write(struct.pack("<q", index.master_seed))
        for seed in index.seeds:
            fh.write(struct.pack("<Q", seed))
        fh.write(struct.pack("<I", index.size))
        for buckets in index.tables:
            fh.write(struct.pack("<I", len(buckets)))
            for sig in sorted(buckets):
                ids = buckets[sig]
                fh.write(struct.pack("<QI", sig, len(ids)))
                fh.write(np.asarray(ids, dtype="<u4").tobytes())


def load_index(path) -> LshIndex:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not an index file")
        version, n_tables, b, k, dim = struct.unpack("<BIBBQ", fh.read(15))
        if version != 1:
            raise ValueError(f"unsupported version {version}")
        (master_seed,) = struct.unpack("<q", fh.read(8))
        seeds = [struct.unpack("<Q", fh.read(8))[0] for _ in range(n_tables)]
        (size,) = struct.unpack("<I", fh.read(4))
        tables = []
        for _ in range(n_tables):
            (n_buckets,) = struct.unpack("<I", fh.read(4))
            buckets: dict[int, list[int]] = {}
            for _ in range(n_buckets):
                sig, count = struct.unpack("<QI", fh.read(12))
                ids = np.frombuffer(fh.read(4 * count), dtype="<u4")
                buckets[sig] = [int(i) for i in ids]
            tables.append(buckets)
        return LshIndex(n_tables, b, k, dim, master_seed, seeds, tables,
                        size=size)
