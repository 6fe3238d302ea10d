"""Closed-form moments for the bin statistics of one-permutation sketches.

Everything here is a deterministic function of the space size d, the bin
count k, the union size f = f1 + f2 - a and the intersection size a.  All
quantities come in two arithmetic flavors:

* float (default) -- products are evaluated in log space via ``lgamma``
  so they neither overflow nor underflow prematurely at f ~ 1e4+;
* exact (``exact=True``) -- arbitrary-precision rationals, for identity
  checks and as the reference the float path is tested against.

The recurring building block is the probability that the union avoids a
given fraction m/k of the space,

    ratio(m) = prod_{j=0}^{f-1} (d*(1 - m/k) - j) / (d - j),

clamped to 0 when d*(1 - m/k) < f (the union cannot fit in the remaining
slots).  d*(1 - m/k) is evaluated as written even when k does not divide
d; the sketching layer reports a padded d_eff so that validation always
runs on the divisible case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import lgamma

import numpy as np

# Resource guard for exact-rational distribution work.
EXACT_MAX_D = 2**14
EXACT_MAX_F = 2**10

# Alternating sums whose largest term exceeds the result by this factor
# are flagged as numerically untrustworthy.
CANCELLATION_LIMIT = 1e12


def _check_dkf(d: int, k: int, f: int):
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    if not 0 <= f <= d:
        raise ValueError("need 0 <= f <= d")


def _log_ratio(d: int, k: int, m: int, f: int) -> float:
    """log of ratio(m), or -inf when clamped to zero."""
    if f == 0:
        return 0.0
    dm = d * (k - m) / k
    if dm < f:
        return -math.inf
    return (lgamma(dm + 1.0) - lgamma(dm - f + 1.0)
            - lgamma(d + 1.0) + lgamma(d - f + 1.0))


def _exact_ratio(d: int, k: int, m: int, f: int) -> Fraction:
    """ratio(m) in exact rational arithmetic."""
    if f == 0:
        return Fraction(1)
    if Fraction(d * (k - m), k) < f:
        return Fraction(0)
    num = math.prod(d * (k - m) - j * k for j in range(f))
    den = k**f * math.prod(d - j for j in range(f))
    return Fraction(num, den)


# -- jointly empty bins ----------------------------------------------------


def expected_empty(d: int, k: int, f: int, exact: bool = False):
    """E[number of jointly empty bins] for a union of size f."""
    _check_dkf(d, k, f)
    if exact:
        return k * _exact_ratio(d, k, 1, f)
    return k * math.exp(_log_ratio(d, k, 1, f))


def variance_empty(d: int, k: int, f: int, exact: bool = False):
    """Var[number of jointly empty bins].

    One expression covers all regimes: the pairwise term ratio(2) clamps
    to zero where two bins cannot be jointly avoided, which reproduces
    the boundary form Var = E - E^2 automatically.
    """
    _check_dkf(d, k, f)
    if exact:
        e1 = _exact_ratio(d, k, 1, f)
        e2 = _exact_ratio(d, k, 2, f)
        ratio = Fraction(1, k) * e1 * (1 - e1) - Fraction(k - 1, k) * (e1 * e1 - e2)
        return k**2 * ratio
    l1 = _log_ratio(d, k, 1, f)
    l2 = _log_ratio(d, k, 2, f)
    e1 = math.exp(l1)
    one_minus_e1 = -math.expm1(l1)
    var_ratio = (e1 * one_minus_e1 / k
                 - (1.0 - 1.0 / k) * _pair_excess(l1, l2))
    return max(var_ratio, 0.0) * k * k


def _pair_excess(l1: float, l2: float) -> float:
    """ratio(1)^2 - ratio(2) from the log values, without cancellation.

    Nonnegative: avoiding two bins is always less likely than avoiding
    one bin twice independently.
    """
    if math.isinf(l1):
        return 0.0
    if math.isinf(l2):
        return math.exp(2.0 * l1)
    return math.exp(l2) * math.expm1(2.0 * l1 - l2)


def sparse_empty_approx(k: int, f: int) -> tuple[float, float]:
    """Leading-order (f << d) approximations to the empty-bin moments.

    Returns (mean ratio, variance ratio), i.e. E/k and Var/k^2 with the
    O(f^2/(k d)) correction dropped.
    """
    if k < 1 or f < 0:
        raise ValueError("need k >= 1 and f >= 0")
    if k == 1:
        return (1.0 if f == 0 else 0.0), 0.0
    q = math.exp(f * math.log1p(-1.0 / k))
    q_alt = math.exp(f * math.log1p(-1.0 / (k - 1)))
    mean = q
    var = q * (1.0 - q) / k - q * (1.0 - 1.0 / k) * (q - q_alt)
    return mean, max(var, 0.0)


@dataclass(frozen=True)
class EmptyCountDistribution:
    """Distribution of the jointly-empty-bin count over j = 0..k-1.

    In float mode ``cancellation[j]`` is the ratio of the largest
    alternating-sum term to the result; entries above
    CANCELLATION_LIMIT are unreliable and flagged.
    """

    probs: tuple
    exact: bool
    cancellation: np.ndarray | None = None

    @property
    def k(self) -> int:
        return len(self.probs)

    def total(self):
        if self.exact:
            return sum(self.probs, Fraction(0))
        return math.fsum(self.probs)

    def mean(self):
        if self.exact:
            return sum((j * p for j, p in enumerate(self.probs)), Fraction(0))
        return math.fsum(j * p for j, p in enumerate(self.probs))

    @property
    def unreliable(self) -> np.ndarray:
        if self.cancellation is None:
            return np.zeros(self.k, dtype=bool)
        return self.cancellation > CANCELLATION_LIMIT


def empty_distribution(d: int, k: int, f: int,
                       exact: bool = False) -> EmptyCountDistribution:
    """Full pmf of the jointly-empty-bin count, by inclusion-exclusion.

    Exact mode is guarded to d <= 2**14 and f <= 2**10; beyond that,
    use float mode, which works in log magnitudes with sign-tracked
    compensated summation and reports a cancellation estimate.
    """
    _check_dkf(d, k, f)
    if exact:
        if d > EXACT_MAX_D or f > EXACT_MAX_F:
            raise ValueError(
                f"exact mode is guarded to d <= {EXACT_MAX_D} and "
                f"f <= {EXACT_MAX_F}; use exact=False")
        return _empty_distribution_exact(d, k, f)
    return _empty_distribution_float(d, k, f)


def _empty_distribution_exact(d, k, f):
    den = k**f * math.prod(d - j for j in range(f))
    nums = []
    for m in range(k + 1):
        if Fraction(d * (k - m), k) < f:
            nums.append(0)
        else:
            nums.append(math.prod(d * (k - m) - j * k for j in range(f)))
    probs = []
    for j in range(k):
        acc = 0
        cjk = math.comb(k, j)
        for s in range(k - j + 1):
            term = cjk * math.comb(k - j, s) * nums[j + s]
            acc = acc + term if s % 2 == 0 else acc - term
        probs.append(Fraction(acc, den))
    return EmptyCountDistribution(tuple(probs), exact=True)


def _empty_distribution_float(d, k, f):
    log_ratio = [_log_ratio(d, k, m, f) for m in range(k + 1)]
    lg_k = lgamma(k + 1.0)
    probs = []
    cancel = np.zeros(k)
    for j in range(k):
        logs = []
        signs = []
        lg_j = lgamma(j + 1.0)
        for s in range(k - j + 1):
            lr = log_ratio[j + s]
            if math.isinf(lr):
                continue
            logmag = (lg_k - lg_j - lgamma(s + 1.0)
                      - lgamma(k - j - s + 1.0) + lr)
            logs.append(logmag)
            signs.append(1.0 if s % 2 == 0 else -1.0)
        if not logs:
            probs.append(0.0)
            continue
        lmax = max(logs)
        scaled = math.fsum(sg * math.exp(lg - lmax)
                           for sg, lg in zip(signs, logs))
        if scaled <= 0.0:
            # cancellation consumed every significant digit
            probs.append(0.0)
            cancel[j] = math.inf
            continue
        logp = lmax + math.log(scaled)
        p = math.exp(min(logp, 0.0))
        probs.append(p)
        cancel[j] = 1.0 / scaled
    return EmptyCountDistribution(tuple(probs), exact=False, cancellation=cancel)


# -- matched bins ----------------------------------------------------------


def _matched_mean(r, e1, k):
    return k * r * (1 - e1)


def _matched_var_ratio_exact(r, r_adj, e1, e2, k):
    em = r * (1 - e1)
    return (em * (1 - em) / k
            + Fraction(k - 1, k) * r * r_adj * (1 - 2 * e1 + e2)
            - Fraction(k - 1, k) * r * r * (1 - e1) ** 2)


def _matched_var_ratio_float(r, r_adj, f, e1, one_minus_e1, excess, k):
    """Stable regrouping of the matched-bin variance ratio.

    Uses 1 - 2*e1 + e2 = (1 - e1)^2 - (e1^2 - e2) and
    r*r_adj - r^2 = -r(1-r)/(f-1) to keep every term individually small.
    """
    em = r * one_minus_e1
    one_minus_em = (1.0 - r) + r * e1
    out = em * one_minus_em / k
    if f > 1:
        out -= (1.0 - 1.0 / k) * r * (1.0 - r) / (f - 1) * one_minus_e1**2
        out -= (1.0 - 1.0 / k) * r * r_adj * excess
    else:
        out -= (1.0 - 1.0 / k) * r * r * one_minus_e1**2
    return out


def expected_matched(d: int, k: int, f: int, a: int, exact: bool = False):
    """E[number of matched bins] for union f and intersection a."""
    _check_dkf(d, k, f)
    _check_a(f, a)
    if exact:
        return _matched_mean(Fraction(a, f), _exact_ratio(d, k, 1, f), k)
    return _matched_mean(a / f, math.exp(_log_ratio(d, k, 1, f)), k)


def variance_matched(d: int, k: int, f: int, a: int, exact: bool = False):
    """Var[number of matched bins]; same clamping convention as above."""
    _check_dkf(d, k, f)
    _check_a(f, a)
    if exact:
        r = Fraction(a, f)
        r_adj = Fraction(a - 1, f - 1) if f > 1 else Fraction(0)
        e1 = _exact_ratio(d, k, 1, f)
        e2 = _exact_ratio(d, k, 2, f)
        return k**2 * _matched_var_ratio_exact(r, r_adj, e1, e2, k)
    r = a / f
    r_adj = (a - 1) / (f - 1) if f > 1 else 0.0
    l1 = _log_ratio(d, k, 1, f)
    l2 = _log_ratio(d, k, 2, f)
    ratio = _matched_var_ratio_float(r, r_adj, f, math.exp(l1),
                                     -math.expm1(l1), _pair_excess(l1, l2), k)
    return max(ratio, 0.0) * k * k


def covariance_matched_empty(d: int, k: int, f: int, a: int,
                             exact: bool = False):
    """Cov(matched bins, jointly empty bins); always <= 0."""
    _check_dkf(d, k, f)
    _check_a(f, a)
    if exact:
        e1 = _exact_ratio(d, k, 1, f)
        if e1 == 0:
            return Fraction(0)
        q = _exact_ratio(d, k, 2, f) / e1  # Pr(second bin avoided | first is)
        r = Fraction(a, f)
        ratio = r * e1 * (e1 - q) - Fraction(1, k) * r * (1 - q) * e1
        return k**2 * ratio
    l1 = _log_ratio(d, k, 1, f)
    if math.isinf(l1):
        return 0.0
    l2 = _log_ratio(d, k, 2, f)
    e1 = math.exp(l1)
    # e1*(e1 - q) = e1^2 - e2 and 1 - q with q = e2/e1, both kept stable
    one_minus_q = 1.0 if math.isinf(l2) else -math.expm1(l2 - l1)
    r = a / f
    ratio = r * _pair_excess(l1, l2) - (r / k) * one_minus_q * e1
    return min(ratio, 0.0) * k * k


def _check_a(f, a):
    if f < 1:
        raise ValueError("matched-bin moments need a nonempty union (f >= 1)")
    if not 0 <= a <= f:
        raise ValueError("need 0 <= a <= f")


# -- the matched-bin resemblance estimator ---------------------------------


def expected_inverse_occupied(d: int, k: int, f: int,
                              method: str = "approx"):
    """E[1 / (number of occupied bins)] for the union.

    ``method="dist"`` sums the exact pmf (guarded as in
    empty_distribution); ``method="approx"`` substitutes
    1/(k - E[empty]), a lower bound that is typically very tight.
    """
    _check_dkf(d, k, f)
    if method == "dist":
        dist = empty_distribution(d, k, f, exact=True)
        return float(sum((p / (k - j) for j, p in enumerate(dist.probs)),
                         Fraction(0)))
    if method == "approx":
        return 1.0 / (k - expected_empty(d, k, f))
    raise ValueError(f"unknown method {method!r}")


def variance_r_matched(d: int, k: int, f: int, a: int,
                       method: str = "approx") -> float:
    """Variance of the matched-bin resemblance estimator."""
    _check_dkf(d, k, f)
    _check_a(f, a)
    r = a / f
    if r == 0.0 or r == 1.0:
        return 0.0
    einv = expected_inverse_occupied(d, k, f, method=method)
    return r * (1.0 - r) * (einv * (1.0 + 1.0 / (f - 1)) - 1.0 / (f - 1))


def variance_ratio_vs_kperm(f: int, k: int) -> float:
    """Approximate Var(matched-bin estimate) / (R(1-R)/k); always <= 1.

    The gap below 1 is the sample-without-replacement advantage of
    binning one permutation over k independent ones.
    """
    if f < 2:
        raise ValueError("the ratio needs f >= 2")
    if k < 1:
        raise ValueError("need k >= 1")
    if k == 1:
        return 1.0
    occupied = -math.expm1(f * math.log1p(-1.0 / k))  # 1 - (1-1/k)^f
    return (1.0 + 1.0 / (f - 1)) / occupied - k / (f - 1)


# -- variable-length scheme -------------------------------------------------


def variable_empty_moments(k: int, f: int, exact: bool = False):
    """(mean ratio, variance ratio) of jointly empty bins when elements
    are binned by independent uniform hashing instead of an even split.

    The mean (1 - 1/k)^f upper-bounds the even-split value for every
    (d, k, f); these moments do not depend on d.
    """
    if k < 1 or f < 0:
        raise ValueError("need k >= 1 and f >= 0")
    if exact:
        q1 = Fraction(k - 1, k) ** f
        q2 = Fraction(k - 2, k) ** f if k >= 2 else (Fraction(1) if f == 0 else Fraction(0))
        var = Fraction(1, k) * q1 * (1 - q1) - Fraction(k - 1, k) * (q1 * q1 - q2)
        return q1, var
    lq1, lq2 = _variable_logs(k, f)
    q1 = math.exp(lq1)
    var = (q1 * -math.expm1(lq1) / k
           - (1.0 - 1.0 / k) * _pair_excess(lq1, lq2))
    return q1, max(var, 0.0)


def _variable_logs(k: int, f: int) -> tuple[float, float]:
    """(log q1, log q2) for the d-free avoidance probabilities."""
    lq1 = f * math.log1p(-1.0 / k) if k > 1 else (-math.inf if f else 0.0)
    lq2 = f * math.log(1.0 - 2.0 / k) if k > 2 else (-math.inf if f else 0.0)
    return lq1, lq2


def variable_matched_moments(k: int, f: int, a: int) -> tuple[float, float]:
    """(E/k, Var/k^2) of matched bins under uniform-hash binning.

    Same structure as the even-split formulas with the avoidance
    probabilities replaced by (1 - 1/k)^f and (1 - 2/k)^f.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    _check_a(f, a)
    lq1, lq2 = _variable_logs(k, f)
    r = a / f
    r_adj = (a - 1) / (f - 1) if f > 1 else 0.0
    mean_ratio = r * -math.expm1(lq1)
    var_ratio = _matched_var_ratio_float(r, r_adj, f, math.exp(lq1),
                                         -math.expm1(lq1),
                                         _pair_excess(lq1, lq2), k)
    return mean_ratio, max(var_ratio, 0.0)


def variable_covariance_ratio(k: int, f: int, a: int) -> float:
    """Cov(matched, jointly empty)/k^2 under uniform-hash binning."""
    if k < 1:
        raise ValueError("need k >= 1")
    _check_a(f, a)
    lq1, lq2 = _variable_logs(k, f)
    if math.isinf(lq1):
        return 0.0
    q1 = math.exp(lq1)
    one_minus_qc = 1.0 if math.isinf(lq2) else -math.expm1(lq2 - lq1)
    r = a / f
    return min(r * _pair_excess(lq1, lq2) - (r / k) * one_minus_qc * q1, 0.0)
