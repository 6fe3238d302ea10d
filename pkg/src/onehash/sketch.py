"""Sketch construction.

Four schemes:

* fixed    -- permute once, split [0, D_eff) into k equal bins, keep the
              smallest permuted nonzero per bin, re-indexed to the bin
              offset so stored values live in [0, D_eff/k).
* variable -- assign each element to a bin by a mixing hash, keep the
              smallest raw permuted value per bin (bin sizes are random,
              so there is no fixed capacity to re-index against).
* mperm    -- concatenation of m independent fixed sketches with k/m bins
              each, to suppress empty bins.
* kperm    -- the classical baseline: k independent permutations, one
              minimum each, never empty.

Empty slots are represented by an explicit occupancy mask, never by an
in-band magic value.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import _bits
from .data import BinarySet
from .permutation import Permutation

_SCHEMES = ("fixed", "variable", "mperm")


@dataclass(frozen=True, eq=False)
class OphSketch:
    """One-permutation sketch: k slots, each empty or a bin minimum."""

    scheme: str
    k: int
    d_eff: int
    values: np.ndarray   # int64, entries meaningful only where occupied
    occupied: np.ndarray  # bool
    seeds: tuple
    m: int = 1

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if len(self.values) != self.k or len(self.occupied) != self.k:
            raise ValueError("slot arrays must have length k")

    @property
    def slot_capacity(self) -> int:
        """Upper bound (exclusive) on stored slot values."""
        if self.scheme == "fixed":
            return self.d_eff // self.k
        if self.scheme == "mperm":
            return self.d_eff // (self.k // self.m)
        return self.d_eff  # variable: raw permuted values

    @property
    def n_empty(self) -> int:
        return int(self.k - self.occupied.sum())

    @property
    def slots(self) -> list:
        """Slots as a list with None for empty bins."""
        return [int(v) if o else None
                for v, o in zip(self.values, self.occupied)]

    def params(self) -> tuple:
        return (self.scheme, self.k, self.d_eff, self.m, self.seeds)


@dataclass(frozen=True, eq=False)
class MinwiseVector:
    """k-permutation minwise values; one minimum per permutation."""

    values: np.ndarray
    dim: int
    seeds: tuple

    @property
    def k(self) -> int:
        return len(self.values)

    def params(self) -> tuple:
        return ("kperm", self.k, self.dim, 1, self.seeds)


def _check_input(s: BinarySet, perm: Permutation):
    if len(s) == 0:
        raise ValueError("cannot sketch an empty set")
    if s.dim > perm.d:
        raise ValueError(f"set dimension {s.dim} exceeds permutation size {perm.d}")


def _bin_minima(img: np.ndarray, bins: np.ndarray):
    """Minimum of img per bin; returns (occupied bins, their minima)."""
    order = np.lexsort((img, bins))
    sb = bins[order]
    sv = img[order]
    first = np.empty(len(sb), dtype=bool)
    first[0] = True
    np.not_equal(sb[1:], sb[:-1], out=first[1:])
    return sb[first], sv[first]


def sketch_fixed(s: BinarySet, perm: Permutation, k: int) -> OphSketch:
    """Fixed-length scheme: k even bins over [0, perm.d), re-indexed minima."""
    _check_input(s, perm)
    d_eff = perm.d
    if d_eff % k != 0:
        raise ValueError(f"k={k} must divide the effective space size {d_eff}; "
                         "pad the space first (see pad_dim)")
    cell = d_eff // k
    img = perm.apply_array(s.indices)
    bins = img // cell
    occ_bins, minima = _bin_minima(img, bins)
    values = np.zeros(k, dtype=np.int64)
    occupied = np.zeros(k, dtype=bool)
    occupied[occ_bins] = True
    values[occ_bins] = minima - occ_bins * cell
    return OphSketch("fixed", k, d_eff, values, occupied,
                     seeds=(perm.seed,))


def sketch_variable(s: BinarySet, bin_seed: int, perm: Permutation,
                    k: int) -> OphSketch:
    """Variable-length scheme: hash-assigned bins, raw permuted minima."""
    _check_input(s, perm)
    img = perm.apply_array(s.indices)
    bins = (_bits.hash2_array(bin_seed, s.indices) % np.uint64(k)).astype(np.int64)
    occ_bins, minima = _bin_minima(img, bins)
    values = np.zeros(k, dtype=np.int64)
    occupied = np.zeros(k, dtype=bool)
    occupied[occ_bins] = True
    values[occ_bins] = minima
    return OphSketch("variable", k, perm.d, values, occupied,
                     seeds=(perm.seed, bin_seed))


def sketch_m_perm(s: BinarySet, perms: list, k: int) -> OphSketch:
    """m independent fixed sketches with k/m bins each, concatenated."""
    m = len(perms)
    if m < 1:
        raise ValueError("need at least one permutation")
    if k % m != 0:
        raise ValueError(f"m={m} must divide k={k}")
    d_eff = perms[0].d
    if any(p.d != d_eff for p in perms):
        raise ValueError("all permutations must share the same space size")
    sub_k = k // m
    parts = [sketch_fixed(s, p, sub_k) for p in perms]
    values = np.concatenate([p.values for p in parts])
    occupied = np.concatenate([p.occupied for p in parts])
    return OphSketch("mperm", k, d_eff, values, occupied,
                     seeds=tuple(p.seed for p in perms), m=m)


def sketch_kperm_minwise(s: BinarySet, perms: list) -> MinwiseVector:
    """Classical minwise hashing: one minimum per independent permutation."""
    if len(perms) < 1:
        raise ValueError("need at least one permutation")
    if len(s) == 0:
        raise ValueError("cannot sketch an empty set")
    dim = perms[0].d
    if any(p.d != dim for p in perms):
        raise ValueError("all permutations must share the same space size")
    if s.dim > dim:
        raise ValueError("set dimension exceeds permutation size")
    values = np.asarray([int(p.apply_array(s.indices).min()) for p in perms],
                        dtype=np.int64)
    return MinwiseVector(values, dim, seeds=tuple(p.seed for p in perms))


def pad_dim(d: int, k: int) -> int:
    """Smallest multiple of k that is >= d (padded indices never occupied)."""
    return ((d + k - 1) // k) * k


# -- serialization --------------------------------------------------------
#
# File layout (little-endian):
#   magic "OPHS", version u8, scheme u8, b u8 (0 = raw, no truncation),
#   k u32, d_eff u64, m u32, n_seeds u32, seeds as i64 (-1 encodes None),
#   n_sketches u32, then per sketch: presence bitmap of ceil(k/8) bytes
#   followed by one u32 per occupied slot.

_MAGIC = b"OPHS"
_SCHEME_CODES = {"fixed": 0, "variable": 1, "mperm": 2, "kperm": 3}
_SCHEME_NAMES = {v: n for n, v in _SCHEME_CODES.items()}


def save_sketches(path, sketches: list, b: int = 0) -> None:
    """Write a homogeneous batch of sketches to a binary file."""
    if not sketches:
        raise ValueError("nothing to save")
    first = sketches[0]
    params = first.params()
    for sk in sketches[1:]:
        if sk.params() != params:
            raise ValueError("sketches have mismatched parameters")
    scheme, k, d_eff, m, seeds = params
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BBB", 1, _SCHEME_CODES[scheme], b))
        fh.write(struct.pack("<IQI", k, d_eff, m))
        fh.write(struct.pack("<I", len(seeds)))
        for sd in seeds:
            fh.write(struct.pack("<q", -1 if sd is None else sd))
        fh.write(struct.pack("<I", len(sketches)))
        for sk in sketches:
            if scheme == "kperm":
                occupied = np.ones(k, dtype=bool)
                values = sk.values
            else:
                occupied, values = sk.occupied, sk.values
            fh.write(np.packbits(occupied, bitorder="little").tobytes())
            fh.write(values[occupied].astype("<u4").tobytes())


def load_sketches(path):
    """Read a sketch batch; returns (sketches, b)."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a sketch file")
        version, scheme_code, b = struct.unpack("<BBB", fh.read(3))
        if version != 1:
            raise ValueError(f"unsupported version {version}")
        scheme = _SCHEME_NAMES[scheme_code]
        k, d_eff, m = struct.unpack("<IQI", fh.read(16))
        (n_seeds,) = struct.unpack("<I", fh.read(4))
        seeds = tuple(None if v == -1 else v
                      for (v,) in struct.iter_unpack("<q", fh.read(8 * n_seeds)))
        (count,) = struct.unpack("<I", fh.read(4))
        nbytes = (k + 7) // 8
        out = []
        for _ in range(count):
            bitmap = np.frombuffer(fh.read(nbytes), dtype=np.uint8)
            occupied = np.unpackbits(bitmap, bitorder="little")[:k].astype(bool)
            n_occ = int(occupied.sum())
            vals = np.frombuffer(fh.read(4 * n_occ), dtype="<u4").astype(np.int64)
            values = np.zeros(k, dtype=np.int64)
            values[occupied] = vals
            if scheme == "kperm":
                out.append(MinwiseVector(values, d_eff, seeds))
            else:
                out.append(OphSketch(scheme, k, d_eff, values, occupied,
                                     seeds, m=m))
        return out, b
