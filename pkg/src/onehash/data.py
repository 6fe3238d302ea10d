"""Binary data vectors as sorted index sets, plus text-format ingestion.

A data vector over a feature space of size D is stored as the sorted
list of its nonzero locations.  Indices are 0-based internally; the
libsvm/svmlight text format is 1-based at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, TextIO

import numpy as np


class FormatError(ValueError):
    """Malformed input text; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, eq=False)
class BinarySet:
    """A binary vector in [0, dim) given by its sorted nonzero indices."""

    indices: np.ndarray
    dim: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise ValueError("indices out of range [0, dim)")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")

    @classmethod
    def from_iterable(cls, items: Iterable[int], dim: int) -> "BinarySet":
        return cls(np.asarray(sorted(set(items)), dtype=np.int64), dim)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __eq__(self, other) -> bool:
        return (isinstance(other, BinarySet) and self.dim == other.dim
                and np.array_equal(self.indices, other.indices))

    def __repr__(self):
        return f"BinarySet({self.indices.tolist()}, dim={self.dim})"


@dataclass(frozen=True)
class PairSpec:
    """Sizes (f1, f2), intersection a and space size D for a set pair."""

    f1: int
    f2: int
    a: int
    dim: int

    def __post_init__(self):
        if not (0 <= self.a <= min(self.f1, self.f2)):
            raise ValueError("need 0 <= a <= min(f1, f2)")
        if self.f1 + self.f2 - self.a > self.dim:
            raise ValueError("union exceeds the space size")

    @property
    def f(self) -> int:
        """Union size f1 + f2 - a."""
        return self.f1 + self.f2 - self.a

    @property
    def r(self) -> float:
        """Resemblance a / (f1 + f2 - a)."""
        return self.a / self.f if self.f else 0.0

    @property
    def r_exact(self) -> Fraction:
        return Fraction(self.a, self.f) if self.f else Fraction(0)

    def swapped(self) -> "PairSpec":
        return PairSpec(self.f2, self.f1, self.a, self.dim)


def intersect_stats(s1: BinarySet, s2: BinarySet) -> PairSpec:
    """Exact pair statistics; the ground-truth resemblance oracle."""
    if s1.dim != s2.dim:
        raise ValueError("dimension mismatch")
    a = np.intersect1d(s1.indices, s2.indices, assume_unique=True).size
    return PairSpec(len(s1), len(s2), int(a), s1.dim)


# -- libsvm / svmlight text format ---------------------------------------


def parse_libsvm(stream: TextIO | str, treat_nonzero_as_one: bool = True,
                 dim: int | None = None):
    """Parse libsvm/svmlight text into (sets, labels).

    Each line is ``label idx:val ...`` with 1-based ascending indices.
    With ``treat_nonzero_as_one`` any nonzero value becomes membership;
    otherwise values must be exactly 0 or 1.  D is inferred as the max
    index + 1 unless ``dim`` overrides it.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()

    raw: list[tuple[float, list[int]]] = []
    max_idx = -1
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        try:
            label = float(parts[0])
        except ValueError:
            raise FormatError(f"bad label {parts[0]!r}", lineno) from None
        idxs: list[int] = []
        prev = 0
        for tok in parts[1:]:
            try:
                stext, vtext = tok.split(":", 1)
                sidx = int(stext)
                val = float(vtext)
            except ValueError:
                raise FormatError(f"bad feature token {tok!r}", lineno) from None
            if sidx < 1:
                raise FormatError(f"index {sidx} is not 1-based", lineno)
            if sidx <= prev:
                raise FormatError("indices not strictly ascending", lineno)
            prev = sidx
            if val == 0:
                continue
            if not treat_nonzero_as_one and val != 1:
                raise FormatError(f"non-binary value {val}", lineno)
            idxs.append(sidx - 1)
            max_idx = max(max_idx, sidx - 1)
        raw.append((label, idxs))

    d = dim if dim is not None else max_idx + 1
    sets = [BinarySet(np.asarray(idxs, dtype=np.int64), d) for _, idxs in raw]
    labels = [int(lab) if lab.is_integer() else lab for lab, _ in raw]
    return sets, labels


def write_libsvm(sets: list[BinarySet], labels=None) -> str:
    """Render binary sets as libsvm text (value 1, 1-based indices)."""
    out = []
    for i, s in enumerate(sets):
        label = labels[i] if labels else 0
        feats = " ".join(f"{int(j) + 1}:1" for j in s.indices)
        out.append(f"{_format_label(label)} {feats}".rstrip())
    return "\n".join(out) + ("\n" if out else "")


def _format_label(label) -> str:
    if isinstance(label, float) and not label.is_integer():
        return repr(label)
    n = int(label)
    return f"+{n}" if n > 0 else str(n)


# -- plain set format: "id: i1 i2 i3 ..." ---------------------------------


def parse_sets(stream: TextIO | str, dim: int | None = None):
    """Parse the plain set format, one ``id: i1 i2 ...`` vector per line."""
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()
    entries: list[tuple[str, list[int]]] = []
    max_idx = -1
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if ":" not in body:
            raise FormatError("expected 'id: i1 i2 ...'", lineno)
        name, rest = body.split(":", 1)
        try:
            idxs = sorted({int(tok) for tok in rest.split()})
        except ValueError:
            raise FormatError("non-integer index", lineno) from None
        if idxs and idxs[0] < 0:
            raise FormatError("negative index", lineno)
        if idxs:
            max_idx = max(max_idx, idxs[-1])
        entries.append((name.strip(), idxs))
    d = dim if dim is not None else max_idx + 1
    ids = [name for name, _ in entries]
    sets = [BinarySet(np.asarray(idxs, dtype=np.int64), d) for _, idxs in entries]
    return sets, ids


def write_sets(sets: list[BinarySet], ids=None) -> str:
    out = []
    for i, s in enumerate(sets):
        name = ids[i] if ids else str(i)
        out.append(f"{name}: " + " ".join(str(int(j)) for j in s.indices))
    return "\n".join(out) + ("\n" if out else "")
