"""Independent enumeration oracles for the closed-form moments.

Nothing here touches the library's formulas: expectations are computed
by explicitly averaging over random-placement outcomes with exact
rational weights, so these values can arbitrate the implementation.

Two levels:

* pair_moments            -- averages over all C(d, f) placements of the
                             union, handling the per-bin minimum labels
                             by counting (the label of each bin minimum
                             is an exchangeable draw from the label pool).
* pair_moments_label_enum -- additionally enumerates every assignment of
                             the a/f1-a/f2-a label multiset to the chosen
                             positions, assumption-free but much slower.
                             Used on tiny cases to validate the fast one.
"""

from fractions import Fraction
from itertools import combinations, permutations

import numpy as np


def _bins_of(positions, d, k):
    cell = d // k
    return [p // cell for p in positions]


def pair_moments(d: int, k: int, f: int, a: int) -> dict:
    """Exact moments by enumerating all C(d, f) union placements."""
    assert d % k == 0 and 1 <= f <= d and 0 <= a <= f
    fa = Fraction(a, f)
    faa = Fraction(a * (a - 1), f * (f - 1)) if f > 1 else Fraction(0)

    total = 0
    s_emp = Fraction(0)
    s_emp2 = Fraction(0)
    s_mat = Fraction(0)
    s_mat2 = Fraction(0)
    s_cross = Fraction(0)
    s_rhat2 = Fraction(0)
    dist_counts = [0] * k
    s_inv_occ = Fraction(0)

    for subset in combinations(range(d), f):
        total += 1
        occupied = len(set(_bins_of(subset, d, k)))
        n_emp = k - occupied
        dist_counts[n_emp] += 1
        # labels of the per-bin minima: an exchangeable without-replacement
        # sample of size `occupied` from the a-in-f label pool
        e_mat = occupied * fa
        e_mat2 = occupied * fa + occupied * (occupied - 1) * faa
        s_emp += n_emp
        s_emp2 += n_emp * n_emp
        s_mat += e_mat
        s_mat2 += e_mat2
        s_cross += n_emp * e_mat
        s_rhat2 += e_mat2 / (occupied * occupied)
        s_inv_occ += Fraction(1, occupied)

    n = Fraction(total)
    e_emp = s_emp / n
    e_mat = s_mat / n
    out = {
        "e_nemp": e_emp,
        "var_nemp": s_emp2 / n - e_emp**2,
        "e_nmat": e_mat,
        "var_nmat": s_mat2 / n - e_mat**2,
        "cov": s_cross / n - e_emp * e_mat,
        "dist": [Fraction(c, total) for c in dist_counts],
        "e_rhat": fa,  # E[n_mat | occupied] / occupied = a/f for every subset
        "var_rhat": s_rhat2 / n - fa**2,
        "e_inv_occupied": s_inv_occ / n,
    }
    return out


def pair_moments_label_enum(d: int, k: int, f1: int, f2: int, a: int) -> dict:
    """Assumption-free oracle: enumerate placements x label assignments."""
    f = f1 + f2 - a
    assert d % k == 0 and 1 <= f <= d
    # label codes: 0 = shared, 1 = only first set, 2 = only second set
    pool = [0] * a + [1] * (f1 - a) + [2] * (f2 - a)
    label_perms = sorted(set(permutations(pool)))

    total = 0
    s_emp = 0
    s_emp2 = 0
    s_mat = 0
    s_mat2 = 0
    s_cross = 0
    s_emp1 = 0
    s_emp2nd = 0
    cell = d // k
    for subset in combinations(range(d), f):
        bins = [p // cell for p in subset]
        # position of the minimum per bin: positions are ascending, so the
        # first element seen in a bin is its minimum
        min_slot = {}
        for slot, b in enumerate(bins):
            if b not in min_slot:
                min_slot[b] = slot
        occupied_bins = set(bins)
        n_emp = k - len(occupied_bins)
        for labels in label_perms:
            total += 1
            n_mat = sum(labels[slot] == 0 for slot in min_slot.values())
            occ1 = {b for b, lab in zip(bins, labels) if lab in (0, 1)}
            occ2 = {b for b, lab in zip(bins, labels) if lab in (0, 2)}
            s_emp += n_emp
            s_emp2 += n_emp * n_emp
            s_mat += n_mat
            s_mat2 += n_mat * n_mat
            s_cross += n_emp * n_mat
            s_emp1 += k - len(occ1)
            s_emp2nd += k - len(occ2)

    n = Fraction(total)
    e_emp = Fraction(s_emp) / n
    e_mat = Fraction(s_mat) / n
    return {
        "e_nemp": e_emp,
        "var_nemp": Fraction(s_emp2) / n - e_emp**2,
        "e_nmat": e_mat,
        "var_nmat": Fraction(s_mat2) / n - e_mat**2,
        "cov": Fraction(s_cross) / n - e_emp * e_mat,
        "e_nemp1": Fraction(s_emp1) / n,
        "e_nemp2": Fraction(s_emp2nd) / n,
    }


def grid_cells(max_d=10, ks=(2, 5), max_f=6):
    """Every (d, k, f, a) with k | d, d <= max_d, f <= max_f, a <= f."""
    for k in ks:
        for d in range(k, max_d + 1, k):
            for f in range(1, min(max_f, d) + 1):
                for a in range(f + 1):
                    yield d, k, f, a


def sample_variance(values) -> float:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.var(ddof=1))
