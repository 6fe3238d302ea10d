"""b-bit truncation and sparse expansion for linear learning.

A sketch slot holding value v is truncated to its lowest b bits, then
expanded one-hot into a block of 2^b positions: bin j with truncated
value v sets position j*2^b + (2^b - 1 - v).  Empty bins are either left
as an all-zero block (zero coding, weight 1/sqrt(k - empties)) or filled
with a uniform value first (random coding, weight 1/sqrt(k)).  Under
zero coding the inner product of two expanded vectors equals the
zero-coding resemblance estimate whenever b is wide enough that distinct
slot values stay distinct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _bits
from .data import BinarySet, FormatError
from .sketch import MinwiseVector, OphSketch


@dataclass(frozen=True, eq=False)
class BBitSketch:
    """Sketch slots reduced to b-bit values."""

    k: int
    b: int
    values: np.ndarray
    occupied: np.ndarray
    params: tuple = ()

    @property
    def n_empty(self) -> int:
        return int(self.k - self.occupied.sum())

    @property
    def slots(self) -> list:
        return [int(v) if o else None
                for v, o in zip(self.values, self.occupied)]


@dataclass(frozen=True, eq=False)
class ExpandedVector:
    """Sparse one-hot-per-bin vector with a scalar weight on every nonzero."""

    dim: int
    positions: np.ndarray  # strictly increasing
    weight: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        object.__setattr__(self, "positions", pos)
        if pos.size:
            if pos[0] < 0 or pos[-1] >= self.dim:
                raise ValueError("positions out of range")
            if np.any(np.diff(pos) <= 0):
                raise ValueError("positions must be strictly increasing")

    @property
    def nnz(self) -> int:
        return int(self.positions.size)


def bbit(sk: OphSketch | MinwiseVector, b: int) -> BBitSketch:
    """Keep the lowest b bits of every slot value; empties stay empty."""
    if not 1 <= b <= 32:
        raise ValueError("need 1 <= b <= 32")
    mask = (1 << b) - 1
    if isinstance(sk, MinwiseVector):
        values = sk.values & mask
        occupied = np.ones(sk.k, dtype=bool)
        return BBitSketch(sk.k, b, values, occupied, params=sk.params())
    values = np.where(sk.occupied, sk.values & mask, 0)
    return BBitSketch(sk.k, b, values, sk.occupied.copy(), params=sk.params())


def expand(bsk: BBitSketch, coding: str = "zero",
           rng_seed: int = 0) -> ExpandedVector:
    """Expand a b-bit sketch into a sparse 2^b * k vector.

    ``coding="zero"`` leaves empty bins as all-zero blocks and sets the
    weight to 1/sqrt(k - empties); ``coding="random"`` first fills each
    empty bin with a uniform b-bit value drawn from (rng_seed, bin), so
    the result has exactly k nonzeros and weight 1/sqrt(k).
    """
    block = 1 << bsk.b
    k = bsk.k
    if coding == "zero":
        occupied = bsk.occupied
        values = bsk.values
        n_occ = int(occupied.sum())
        weight = 1.0 / math.sqrt(n_occ)
    elif coding == "random":
        values = bsk.values.copy()
        empty = np.flatnonzero(~bsk.occupied)
        if empty.size:
            fills = _bits.hash2_array(rng_seed, empty) & np.uint64(block - 1)
            values[empty] = fills.astype(np.int64)
        occupied = np.ones(k, dtype=bool)
        weight = 1.0 / math.sqrt(k)
    else:
        raise ValueError(f"unknown coding {coding!r}")
    bins = np.flatnonzero(occupied)
    positions = bins * block + (block - 1 - values[bins])
    return ExpandedVector(block * k, np.sort(positions), weight)


def decode_positions(v: ExpandedVector, k: int, b: int) -> BBitSketch:
    """Invert the expansion back to a b-bit sketch (zero-coded input)."""
    block = 1 << b
    if v.dim != block * k:
        raise ValueError("dimension does not match (k, b)")
    bins = v.positions // block
    vals = (block - 1) - (v.positions - bins * block)
    values = np.zeros(k, dtype=np.int64)
    occupied = np.zeros(k, dtype=bool)
    occupied[bins] = True
    values[bins] = vals
    return BBitSketch(k, b, values, occupied)


def inner_product(u: ExpandedVector, v: ExpandedVector) -> float:
    """weight_u * weight_v * (number of shared nonzero positions)."""
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    shared = np.intersect1d(u.positions, v.positions, assume_unique=True)
    return u.weight * v.weight * shared.size


def export_libsvm(vectors: list[ExpandedVector], labels=None) -> str:
    """Render expanded vectors as libsvm text.

    Indices are 1-based; the value of every nonzero is the vector's
    weight, written as its shortest round-trip decimal.  Without labels,
    rows are exported with label 0.
    """
    if labels is not None and len(labels) not in (0, len(vectors)):
        raise ValueError("labels must be empty or match vectors")
    dim = vectors[0].dim if vectors else 0
    rows = []
    for i, v in enumerate(vectors):
        if v.dim != dim:
            raise ValueError("vectors have inconsistent dimensions")
        label = labels[i] if labels else 0
        head = f"+{label}" if isinstance(label, int) and label > 0 else str(label)
        wtext = repr(v.weight)
        feats = " ".join(f"{int(p) + 1}:{wtext}" for p in v.positions)
        rows.append(f"{head} {feats}".rstrip())
    return "\n".join(rows) + ("\n" if rows else "")


def parse_expanded_libsvm(text: str, dim: int | None = None):
    """Parse libsvm text produced by export_libsvm back into vectors."""
    vectors = []
    labels = []
    max_pos = -1
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.strip()
        if not body:
            continue
        parts = body.split()
        try:
            label = float(parts[0])
        except ValueError:
            raise FormatError(f"bad label {parts[0]!r}", lineno) from None
        positions = []
        weight = None
        for tok in parts[1:]:
            try:
                stext, vtext = tok.split(":", 1)
                pos = int(stext) - 1
                val = float(vtext)
            except ValueError:
                raise FormatError(f"bad feature token {tok!r}", lineno) from None
            positions.append(pos)
            weight = val
        max_pos = max(max_pos, positions[-1] if positions else -1)
        rows.append((label, positions, weight if weight is not None else 0.0))
    d = dim if dim is not None else max_pos + 1
    for label, positions, weight in rows:
        vectors.append(ExpandedVector(d, np.asarray(positions, dtype=np.int64),
                                      weight))
        labels.append(int(label) if label.is_integer() else label)
    return vectors, labels


def raw_feature_vector(s: BinarySet) -> ExpandedVector:
    """A binary set as a unit-norm sparse vector over its own space.

    Lets the same linear learner run on raw features for baselines.
    """
    if len(s) == 0:
        raise ValueError("empty set has no direction")
    return ExpandedVector(s.dim, s.indices.copy(), 1.0 / math.sqrt(len(s)))
