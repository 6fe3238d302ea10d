"""Monte Carlo validation of the closed-form moments.

For a pair with union size f and intersection a, the bin statistics of a
fresh random permutation depend only on (i) how the f union elements
spread over the k bins and (ii) which elements end up as per-bin minima.
Conditional on the spread, the minima labels are a uniform
without-replacement sample of size (number of occupied bins) from the
label pool (a shared, f - a unshared).  The default engine samples that
decomposition directly:

* fixed scheme    -- bin spread ~ multivariate hypergeometric over k
                     cells of d_eff/k slots each;
* variable scheme -- bin spread ~ multinomial(f, 1/k, ..., 1/k);
* both            -- matched bins | occupied ~ hypergeometric(a, f-a, occupied).

This reproduces the exact joint law of (jointly empty, matched) at a
fraction of the cost of materializing permutations; the "direct" engine
really sketches both sets through the full pipeline and is used to
cross-check the decomposition.  The classical k-permutation baseline has
i.i.d. Bernoulli(R) coordinate matches, sampled as one binomial draw.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import moments
from .data import BinarySet, PairSpec
from .estimation import estimate_r_kperm, estimate_r_mat, pair_stats
from .permutation import Permutation
from .sketch import (pad_dim, sketch_fixed, sketch_kperm_minwise,
                     sketch_variable)

SCHEMES = ("fixed", "variable", "kperm")

# Benchmark word-occurrence pairs (f1, f2, intersection) over d = 2**16
# web pages.  Two rows in the commonly printed table are internally
# inconsistent and are repaired here to match their printed union sizes
# and resemblances: SEARCH's count is 14023 (not 1402), and the TEST
# row's third printed number is the intersection, not the union.
WORD_PAIRS: tuple[tuple[str, int, int, int], ...] = (
    ("RIGHTS-RESERVED", 12234, 11272, 10980),
    ("OF-AND", 37339, 36289, 32056),
    ("THIS-HAVE", 27695, 17522, 13570),
    ("ALL-MORE", 26668, 17909, 12939),
    ("CONTACT-INFORMATION", 16836, 16339, 8201),
    ("MAY-ONLY", 12067, 11006, 5120),
    ("CREDIT-CARD", 2999, 2697, 1263),
    ("SEARCH-WEB", 14023, 12718, 4971),
    ("RESEARCH-UNIVERSITY", 4353, 4241, 1577),
    ("FREE-USE", 12406, 11744, 4368),
    ("TOP-BUSINESS", 9151, 8284, 2443),
    ("BOOK-TRAVEL", 5153, 4608, 1219),
    ("TIME-JOB", 12386, 3263, 1775),
    ("REVIEW-PAPER", 3197, 1944, 372),
    ("A-TEST", 39063, 2278, 2060),
)

WORD_PAIR_DIM = 2**16


def word_pair_specs(dim: int = WORD_PAIR_DIM) -> list[tuple[str, PairSpec]]:
    """The benchmark rows as (name, PairSpec) at the given space size."""
    return [(name, PairSpec(f1, f2, a, dim))
            for name, f1, f2, a in WORD_PAIRS]


def synth_pair(spec: PairSpec, seed: int) -> tuple[BinarySet, BinarySet]:
    """Materialize a pair with exactly the requested sizes.

    Chooses f distinct indices uniformly, assigns a of them to both
    sets and splits the remainder f1-a / f2-a.
    """
    rng = np.random.default_rng([_nonneg(seed), 0x5E75])
    f = spec.f
    pos = rng.choice(spec.dim, size=f, replace=False)
    s1 = np.sort(np.concatenate([pos[:spec.a], pos[spec.a:spec.f1]]))
    s2 = np.sort(np.concatenate([pos[:spec.a], pos[spec.f1:]]))
    return (BinarySet(s1.astype(np.int64), spec.dim),
            BinarySet(s2.astype(np.int64), spec.dim))


def _nonneg(seed: int) -> int:
    return seed & ((1 << 64) - 1)


# -- streaming moment accumulation ------------------------------------------


class _Kahan:
    """Compensated scalar accumulator; merge order changes results only
    at floating tolerance."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, value: float):
        y = value - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t

    def merge(self, other: "_Kahan"):
        self.add(other.total)
        self.add(-other.comp)


class PairMoments:
    """One-pass moment sums for a statistic pair, shifted by anchors.

    Tracks enough powers (up to 4th, and mixed up to (2,2)) to report
    distribution-free standard errors for the mean, the variance and
    the covariance.  Chunks may be added in any order and partial
    accumulators merged associatively.
    """

    _KEYS = ("x", "y", "x2", "y2", "x3", "y3", "x4", "y4",
             "xy", "x2y", "xy2", "x2y2")

    def __init__(self, anchor_x: float = 0.0, anchor_y: float = 0.0):
        self.n = 0
        self.anchor_x = anchor_x
        self.anchor_y = anchor_y
        self.sums = {key: _Kahan() for key in self._KEYS}

    def add_chunk(self, x: np.ndarray, y: np.ndarray):
        u = x - self.anchor_x
        v = y - self.anchor_y
        u2 = u * u
        v2 = v * v
        parts = {
            "x": u, "y": v, "x2": u2, "y2": v2,
            "x3": u2 * u, "y3": v2 * v, "x4": u2 * u2, "y4": v2 * v2,
            "xy": u * v, "x2y": u2 * v, "xy2": u * v2, "x2y2": u2 * v2,
        }
        for key, arr in parts.items():
            self.sums[key].add(float(np.sum(arr)))
        self.n += len(u)

    def merge(self, other: "PairMoments"):
        if (other.anchor_x != self.anchor_x or other.anchor_y != self.anchor_y):
            raise ValueError("cannot merge accumulators with different anchors")
        for key in self._KEYS:
            self.sums[key].merge(other.sums[key])
        self.n += other.n

    # central moments about the sample mean, per axis

    def _raw(self, key: str) -> float:
        return self.sums[key].total / self.n

    def mean(self, axis: str = "x") -> float:
        anchor = self.anchor_x if axis == "x" else self.anchor_y
        return anchor + self._raw(axis)

    def _central2(self, axis: str) -> float:
        m = self._raw(axis)
        return max(self._raw(axis + "2") - m * m, 0.0)

    def _central4(self, axis: str) -> float:
        m = self._raw(axis)
        return max(self._raw(axis + "4") - 4 * m * self._raw(axis + "3")
                   + 6 * m * m * self._raw(axis + "2") - 3 * m**4, 0.0)

    def variance(self, axis: str = "x") -> float:
        if self.n < 2:
            return 0.0
        return self._central2(axis) * self.n / (self.n - 1)

    def se_mean(self, axis: str = "x") -> float:
        if self.n < 2:
            return 0.0
        return math.sqrt(self.variance(axis) / self.n)

    def se_variance(self, axis: str = "x") -> float:
        """Asymptotic distribution-free SE of the sample variance."""
        if self.n < 2:
            return 0.0
        m2 = self._central2(axis)
        m4 = self._central4(axis)
        return math.sqrt(max(m4 - m2 * m2, 0.0) / self.n)

    def covariance(self) -> float:
        if self.n < 2:
            return 0.0
        c11 = self._raw("xy") - self._raw("x") * self._raw("y")
        return c11 * self.n / (self.n - 1)

    def se_covariance(self) -> float:
        """Asymptotic SE of the sample covariance via the (2,2) moment."""
        if self.n < 2:
            return 0.0
        mx = self._raw("x")
        my = self._raw("y")
        c11 = self._raw("xy") - mx * my
        c22 = (self._raw("x2y2")
               - 2 * my * self._raw("x2y") - 2 * mx * self._raw("xy2")
               + my * my * self._raw("x2") + mx * mx * self._raw("y2")
               + 4 * mx * my * self._raw("xy") - 3 * mx * mx * my * my)
        return math.sqrt(max(c22 - c11 * c11, 0.0) / self.n)


# -- configuration and report ------------------------------------------------


@dataclass(frozen=True)
class McConfig:
    """One validation cell family: a pair swept over k values."""

    pair: PairSpec
    ks: tuple
    replicates: int
    scheme: str = "fixed"
    master_seed: int = 0
    name: str = "pair"
    engine: str = "decomposed"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.engine not in ("decomposed", "direct"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not self.ks:
            raise ValueError("need at least one k value")
        if self.replicates * max(self.ks) > 2**34:
            raise ValueError("replicates * k exceeds the resource guard")
        for k in self.ks:
            if k < 1 or k > self.pair.dim:
                raise ValueError(f"k={k} out of range for dim={self.pair.dim}")


@dataclass(frozen=True)
class McRow:
    pair: str
    k: int
    scheme: str
    stat: str
    empirical: float
    theory: float
    std_err: float
    replicates: int
    seed: int


@dataclass
class McReport:
    rows: list = field(default_factory=list)

    def get(self, pair: str, k: int, stat: str) -> McRow:
        for row in self.rows:
            if row.pair == pair and row.k == k and row.stat == stat:
                return row
        raise KeyError((pair, k, stat))

    def to_csv(self, stream=None) -> str:
        own = stream is None
        if own:
            stream = io.StringIO()
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["pair", "k", "scheme", "stat", "empirical",
                         "theory", "std_err", "replicates", "seed"])
        for r in self.rows:
            writer.writerow([r.pair, r.k, r.scheme, r.stat,
                             repr(r.empirical), repr(r.theory),
                             repr(r.std_err), r.replicates, r.seed])
        return stream.getvalue() if own else ""


_CHUNK_BUDGET = 4_000_000  # elements per (chunk x k) block


def _chunk_size(k: int, replicates: int) -> int:
    return max(64, min(replicates, 65536, _CHUNK_BUDGET // max(k, 1)))


def run_validation(cfg: McConfig) -> McReport:
    """Simulate every (k, stat) cell and pair it with its closed form."""
    report = McReport()
    for k in cfg.ks:
        if cfg.engine == "direct":
            bins, rmat = _accumulate_direct(cfg, k)
        else:
            bins, rmat = _accumulate_decomposed(cfg, k)
        report.rows.extend(_rows_for_cell(cfg, k, bins, rmat))
    return report


def _theory_columns(cfg: McConfig, k: int) -> dict:
    spec = cfg.pair
    d, f, a = spec.dim, spec.f, spec.a
    r = spec.r
    if cfg.scheme == "fixed":
        d_eff = pad_dim(d, k)
        return {
            "empty_mean": moments.expected_empty(d_eff, k, f) / k,
            "empty_var": moments.variance_empty(d_eff, k, f) / k**2,
            "matched_mean": moments.expected_matched(d_eff, k, f, a) / k,
            "matched_var": moments.variance_matched(d_eff, k, f, a) / k**2,
            "cov": moments.covariance_matched_empty(d_eff, k, f, a) / k**2,
            "r_bias": 0.0,
            "r_mse": moments.variance_r_matched(d_eff, k, f, a),
        }
    if cfg.scheme == "variable":
        mean_ratio, var_ratio = moments.variable_empty_moments(k, f)
        mat_mean, mat_var = moments.variable_matched_moments(k, f, a)
        if r in (0.0, 1.0):
            r_var = 0.0
        else:
            einv = 1.0 / (k * (1.0 - mean_ratio))
            r_var = r * (1 - r) * (einv * (1 + 1 / (f - 1)) - 1 / (f - 1))
        return {
            "empty_mean": mean_ratio,
            "empty_var": var_ratio,
            "matched_mean": mat_mean,
            "matched_var": mat_var,
            "cov": moments.variable_covariance_ratio(k, f, a),
            "r_bias": 0.0,
            "r_mse": r_var,
        }
    return {  # kperm baseline
        "matched_mean": r,
        "matched_var": r * (1 - r) / k,
        "r_bias": 0.0,
        "r_mse": r * (1 - r) / k,
    }


def _rows_for_cell(cfg, k, bins: PairMoments, rmat: PairMoments) -> list:
    theory = _theory_columns(cfg, k)
    out = []

    def row(stat, empirical, std_err):
        out.append(McRow(cfg.name, k, cfg.scheme, stat, empirical,
                         theory[stat], std_err, cfg.replicates,
                         cfg.master_seed))

    if cfg.scheme != "kperm":
        row("empty_mean", bins.mean("x"), bins.se_mean("x"))
        row("empty_var", bins.variance("x"), bins.se_variance("x"))
    row("matched_mean", bins.mean("y"), bins.se_mean("y"))
    row("matched_var", bins.variance("y"), bins.se_variance("y"))
    if cfg.scheme != "kperm":
        row("cov", bins.covariance(), bins.se_covariance())
    row("r_bias", rmat.mean("x"), rmat.se_mean("x"))
    row("r_mse", rmat.mean("y"), rmat.se_mean("y"))
    return out


def _cell_rngs(cfg: McConfig, k: int, n_chunks: int):
    base = [_nonneg(cfg.master_seed), SCHEMES.index(cfg.scheme), k]
    return [np.random.default_rng(base + [c]) for c in range(n_chunks)]


def _new_accumulators(cfg: McConfig, k: int):
    theory = _theory_columns(cfg, k)
    bins = PairMoments(anchor_x=theory.get("empty_mean", 0.0),
                       anchor_y=theory["matched_mean"])
    rmat = PairMoments(anchor_x=0.0, anchor_y=0.0)  # x: r - R, y: (r - R)^2
    return bins, rmat


def _accumulate_decomposed(cfg: McConfig, k: int):
    spec = cfg.pair
    f, a, r = spec.f, spec.a, spec.r
    bins, rmat = _new_accumulators(cfg, k)
    chunk = _chunk_size(k, cfg.replicates)
    n_chunks = (cfg.replicates + chunk - 1) // chunk
    rngs = _cell_rngs(cfg, k, n_chunks)
    if cfg.scheme == "fixed":
        cell = pad_dim(spec.dim, k) // k
        colors = np.full(k, cell, dtype=np.int64)
    done = 0
    for rng in rngs:
        m = min(chunk, cfg.replicates - done)
        done += m
        if cfg.scheme == "kperm":
            n_mat = rng.binomial(k, r, size=m).astype(np.float64)
            occupied = np.full(m, k, dtype=np.float64)
        else:
            if cfg.scheme == "fixed":
                counts = rng.multivariate_hypergeometric(colors, f, size=m)
            else:
                counts = rng.multinomial(f, np.full(k, 1.0 / k), size=m)
            occupied = (counts > 0).sum(axis=1).astype(np.int64)
            if a == 0:
                n_mat = np.zeros(m)
            elif a == f:
                n_mat = occupied.astype(np.float64)
            else:
                n_mat = rng.hypergeometric(a, f - a, occupied).astype(np.float64)
            occupied = occupied.astype(np.float64)
        x = (k - occupied) / k
        y = n_mat / k
        dev = n_mat / occupied - r
        bins.add_chunk(x, y)
        rmat.add_chunk(dev, dev * dev)
    return bins, rmat


def _accumulate_direct(cfg: McConfig, k: int):
    """Reference engine: really sketch both sets, every replicate."""
    spec = cfg.pair
    r = spec.r
    bins, rmat = _new_accumulators(cfg, k)
    s1, s2 = synth_pair(spec, cfg.master_seed)
    d_eff = pad_dim(spec.dim, k)
    base = (_nonneg(cfg.master_seed) << 8) ^ SCHEMES.index(cfg.scheme)
    xs = np.empty(cfg.replicates)
    ys = np.empty(cfg.replicates)
    devs = np.empty(cfg.replicates)
    for rep in range(cfg.replicates):
        seed = base + 1000003 * rep
        if cfg.scheme == "kperm":
            perms = [Permutation.generate(seed + 7919 * j, d_eff)
                     for j in range(k)]
            r_hat = estimate_r_kperm(sketch_kperm_minwise(s1, perms),
                                     sketch_kperm_minwise(s2, perms))
            n_emp, n_mat = 0, round(r_hat * k)
        else:
            perm = Permutation.generate(seed, d_eff)
            if cfg.scheme == "fixed":
                a_sk = sketch_fixed(s1, perm, k)
                b_sk = sketch_fixed(s2, perm, k)
            else:
                a_sk = sketch_variable(s1, seed + 1, perm, k)
                b_sk = sketch_variable(s2, seed + 1, perm, k)
            st = pair_stats(a_sk, b_sk)
            n_emp, n_mat = st.n_emp, st.n_mat
            r_hat = estimate_r_mat(st)
        xs[rep] = n_emp / k
        ys[rep] = n_mat / k
        devs[rep] = r_hat - r
    bins.add_chunk(xs, ys)
    rmat.add_chunk(devs, devs * devs)
    return bins, rmat


# -- plot script emission ----------------------------------------------------

PLOT_SCRIPT = """\
#!/usr/bin/env python3
# Render empirical-vs-theory curves from a validation CSV.
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
rows = list(csv.DictReader(open(path)))
stats = sorted({{r["stat"] for r in rows}})
pairs = sorted({{r["pair"] for r in rows}})
fig, axes = plt.subplots(len(stats), 1, figsize=(7, 3 * len(stats)),
                         squeeze=False)
for ax, stat in zip(axes[:, 0], stats):
    for pair in pairs:
        sel = sorted((int(r["k"]), float(r["empirical"]), float(r["theory"]))
                     for r in rows if r["stat"] == stat and r["pair"] == pair)
        ks = [s[0] for s in sel]
        ax.plot(ks, [s[1] for s in sel], "o-", label=f"{{pair}} empirical")
        ax.plot(ks, [s[2] for s in sel], "k--", alpha=0.6)
    ax.set_xscale("log", base=2)
    ax.set_title(stat)
    ax.set_xlabel("k")
if pairs and len(pairs) <= 6:
    axes[0, 0].legend(fontsize=7)
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
"""


def emit_plot_script(csv_path: str) -> str:
    """A standalone matplotlib script bound to the given CSV path."""
    return PLOT_SCRIPT.format(csv_path=csv_path)
