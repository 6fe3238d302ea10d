"""Pair statistics and resemblance estimators.

For two sketches built with identical parameters, a bin is *jointly
empty* when neither sketch occupies it, and *matched* when both occupy
it with equal values.  The matched-bin ratio n_mat / (k - n_emp) is an
unbiased estimator of the resemblance; the zero-coding variant divides
by the geometric mean of the per-sketch occupied counts instead, which
is what the expanded inner product realizes without ever seeing the
joint emptiness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _bits
from .sketch import MinwiseVector, OphSketch


@dataclass(frozen=True)
class PairStats:
    """Bin-level counts for a sketch pair."""

    n_emp: int    # jointly empty bins
    n_mat: int    # bins occupied by both with equal values
    n_emp1: int   # empty bins of the first sketch
    n_emp2: int   # empty bins of the second sketch
    k: int

    def __post_init__(self):
        if self.n_mat > self.k - self.n_emp:
            raise ValueError("more matches than mutually occupied bins")
        if self.n_emp > min(self.n_emp1, self.n_emp2):
            raise ValueError("joint empties exceed a per-sketch empty count")


def pair_stats(a: OphSketch, b: OphSketch) -> PairStats:
    """Count jointly empty, matched, and per-sketch empty bins."""
    if a.params() != b.params():
        raise ValueError("sketch parameters differ; sketches are not comparable")
    both = a.occupied & b.occupied
    n_mat = int((both & (a.values == b.values)).sum())
    n_emp = int((~a.occupied & ~b.occupied).sum())
    return PairStats(n_emp=n_emp, n_mat=n_mat,
                     n_emp1=a.n_empty, n_emp2=b.n_empty, k=a.k)


def estimate_r_mat(st: PairStats) -> float:
    """Matched-bin estimate n_mat / (k - n_emp); unbiased."""
    return st.n_mat / (st.k - st.n_emp)


def estimate_r_zero(st: PairStats) -> float:
    """Zero-coding estimate n_mat / sqrt((k - n_emp1)(k - n_emp2))."""
    return st.n_mat / math.sqrt((st.k - st.n_emp1) * (st.k - st.n_emp2))


def estimate_r_kperm(v1: MinwiseVector, v2: MinwiseVector) -> float:
    """Classical minwise estimate: fraction of equal coordinates."""
    if v1.params() != v2.params():
        raise ValueError("minwise parameters differ; vectors are not comparable")
    return float(np.mean(v1.values == v2.values))


def fill_empty_random(sk: OphSketch, seed: int) -> OphSketch:
    """Random coding at sketch level: fill each empty slot uniformly.

    Fill values are drawn in the slot's value domain by a per-(seed, bin)
    mixing hash, so repeated fills are deterministic.  Estimating from
    filled sketches makes the effective denominator k.
    """
    if sk.occupied.all():
        return sk
    cap = sk.slot_capacity
    empty = np.flatnonzero(~sk.occupied)
    draws = (_bits.hash2_array(seed, empty) % np.uint64(cap)).astype(np.int64)
    values = sk.values.copy()
    values[empty] = draws
    return OphSketch(sk.scheme, sk.k, sk.d_eff, values,
                     np.ones(sk.k, dtype=bool), sk.seeds, m=sk.m)
