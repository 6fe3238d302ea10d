"""Command-line surface: one subcommand per pipeline stage.

All randomized subcommands take an explicit --seed; when omitted, a seed
is drawn from the OS and printed to stderr so the run can be reproduced.
Primary outputs are byte-identical across runs with identical flags.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import encoding, learner, lsh, moments, montecarlo
from .data import (intersect_stats, parse_libsvm, parse_sets, write_sets)
from .estimation import (estimate_r_kperm, estimate_r_mat, estimate_r_zero,
                         fill_empty_random, pair_stats)
from .montecarlo import McConfig, run_validation, word_pair_specs
from .permutation import Permutation
from .sketch import (load_sketches, pad_dim, save_sketches, sketch_fixed,
                     sketch_kperm_minwise, sketch_m_perm, sketch_variable)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _resolved_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int.from_bytes(os.urandom(8), "little") >> 1
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _read_sets(args):
    with open(args.input) as fh:
        if args.format == "libsvm":
            sets, labels = parse_libsvm(fh, dim=args.dim)
            return sets, [str(i) for i in range(len(sets))], labels
        sets, ids = parse_sets(fh, dim=args.dim)
        return sets, ids, None


def _out_stream(args):
    return open(args.output, "w", newline="") if args.output else sys.stdout


# -- subcommands -------------------------------------------------------------


def _cmd_sketch(args) -> int:
    seed = _resolved_seed(args)
    sets, _ids, _ = _read_sets(args)
    if not sets:
        raise ValueError("no input vectors")
    dim = sets[0].dim
    k = args.k
    if args.scheme == "kperm":
        d_eff = dim
        perms = [Permutation.generate(lsh.table_seed(seed, j), d_eff)
                 for j in range(k)]
        sketches = [sketch_kperm_minwise(s, perms) for s in sets]
    elif args.scheme == "mperm":
        sub_k = k // args.m
        d_eff = pad_dim(dim, sub_k)
        perms = [Permutation.generate(lsh.table_seed(seed, j), d_eff)
                 for j in range(args.m)]
        sketches = [sketch_m_perm(s, perms, k) for s in sets]
    else:
        d_eff = pad_dim(dim, k)
        perm = Permutation.generate(seed, d_eff)
        if args.scheme == "fixed":
            sketches = [sketch_fixed(s, perm, k) for s in sets]
        else:
            sketches = [sketch_variable(s, lsh.table_seed(seed, 1), perm, k)
                        for s in sets]
    if d_eff != dim:
        print(f"d_eff: {d_eff} (padded from {dim})", file=sys.stderr)
    save_sketches(args.output, sketches)
    return 0


def _cmd_estimate(args) -> int:
    seed = _resolved_seed(args)
    sets, ids, _ = _read_sets(args)
    if len(sets) < 2:
        raise ValueError("need at least two vectors")
    dim = sets[0].dim
    k = args.k
    kperm = args.scheme == "kperm"
    if kperm:
        perms = [Permutation.generate(lsh.table_seed(seed, j), dim)
                 for j in range(k)]
        sketches = [sketch_kperm_minwise(s, perms) for s in sets]
    else:
        d_eff = pad_dim(dim, k)
        perm = Permutation.generate(seed, d_eff)
        if args.scheme == "fixed":
            sketches = [sketch_fixed(s, perm, k) for s in sets]
        else:
            sketches = [sketch_variable(s, lsh.table_seed(seed, 1), perm, k)
                        for s in sets]
        if args.coding == "random":
            sketches = [fill_empty_random(sk, lsh.table_seed(seed, 2 + i))
                        for i, sk in enumerate(sketches)]
    stream = _out_stream(args)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["pair_id", "k", "scheme", "n_emp", "n_mat",
                     "r_hat", "r_true"])
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            r_true = intersect_stats(sets[i], sets[j]).r
            if kperm:
                r_hat = estimate_r_kperm(sketches[i], sketches[j])
                n_emp = n_mat = ""
            else:
                st = pair_stats(sketches[i], sketches[j])
                n_emp, n_mat = st.n_emp, st.n_mat
                r_hat = (estimate_r_zero(st) if args.estimator == "zero"
                         else estimate_r_mat(st))
            writer.writerow([f"{ids[i]}-{ids[j]}", k, args.scheme,
                             n_emp, n_mat, repr(r_hat), repr(r_true)])
    if stream is not sys.stdout:
        stream.close()
    return 0


_QUANTITIES = ("e_nemp", "var_nemp", "e_nmat", "var_nmat", "cov",
               "var_rmat", "g", "dist", "e_nemp_variable",
               "var_nemp_variable", "approx_e_nemp", "approx_var_nemp")


def _theory_value(args, q: str):
    d, k, f, a = args.dim, args.k, args.f, args.a
    if q == "e_nemp":
        v = moments.expected_empty(d, k, f)
        return v, v / k
    if q == "var_nemp":
        v = moments.variance_empty(d, k, f)
        return v, v / k**2
    if q == "e_nmat":
        v = moments.expected_matched(d, k, f, _need_a(a))
        return v, v / k
    if q == "var_nmat":
        v = moments.variance_matched(d, k, f, _need_a(a))
        return v, v / k**2
    if q == "cov":
        v = moments.covariance_matched_empty(d, k, f, _need_a(a))
        return v, v / k**2
    if q == "var_rmat":
        v = moments.variance_r_matched(d, k, f, _need_a(a), method=args.method)
        return v, v
    if q == "g":
        v = moments.variance_ratio_vs_kperm(f, k)
        return v, v
    if q == "e_nemp_variable":
        mean, _ = moments.variable_empty_moments(k, f)
        return mean * k, mean
    if q == "var_nemp_variable":
        _, var = moments.variable_empty_moments(k, f)
        return var * k**2, var
    if q == "approx_e_nemp":
        mean, _ = moments.sparse_empty_approx(k, f)
        return mean * k, mean
    if q == "approx_var_nemp":
        _, var = moments.sparse_empty_approx(k, f)
        return var * k**2, var
    raise ValueError(f"unknown quantity {q!r}")


def _need_a(a):
    if a is None:
        raise ValueError("this quantity requires --a (intersection size)")
    return a


def _cmd_theory(args) -> int:
    stream = _out_stream(args)
    writer = csv.writer(stream, lineterminator="\n")
    if args.quantity == "dist":
        dist = moments.empty_distribution(args.dim, args.k, args.f,
                                          exact=args.exact)
        writer.writerow(["quantity", "D", "k", "f", "j", "probability"])
        for j, p in enumerate(dist.probs):
            writer.writerow(["dist", args.dim, args.k, args.f, j,
                             repr(float(p))])
    else:
        writer.writerow(["quantity", "D", "k", "f", "a", "absolute", "ratio"])
        absolute, ratio = _theory_value(args, args.quantity)
        writer.writerow([args.quantity, args.dim, args.k, args.f,
                         "" if args.a is None else args.a,
                         repr(float(absolute)), repr(float(ratio))])
    if stream is not sys.stdout:
        stream.close()
    return 0


def _parse_pairs_csv(path):
    out = []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            out.append((row["name"], int(row["f1"]), int(row["f2"]),
                        int(row["a"]), int(row.get("D") or 0) or None))
    return out


def _cmd_validate(args) -> int:
    seed = _resolved_seed(args)
    ks = tuple(int(tok) for tok in args.k.split(","))
    dim = args.dim or montecarlo.WORD_PAIR_DIM
    if args.pairs == "builtin":
        pairs = [(name, spec) for name, spec in word_pair_specs(dim)]
    else:
        from .data import PairSpec
        pairs = [(name, PairSpec(f1, f2, a, d or dim))
                 for name, f1, f2, a, d in _parse_pairs_csv(args.pairs)]
    stream = _out_stream(args)
    for idx, (name, spec) in enumerate(pairs):
        cfg = McConfig(pair=spec, ks=ks, replicates=args.reps,
                       scheme=args.scheme, master_seed=seed, name=name,
                       engine=args.engine)
        report = run_validation(cfg)
        lines = report.to_csv().splitlines()
        if idx == 0:
            stream.write(lines[0] + "\n")
        stream.write("\n".join(lines[1:]) + "\n")
    if stream is not sys.stdout:
        stream.close()
    if args.plot_script:
        if not args.output:
            raise ValueError("--plot-script needs --output")
        with open(args.plot_script, "w") as fh:
            fh.write(montecarlo.emit_plot_script(args.output))
    return 0


def _expand_all(args, sets, seed):
    dim = sets[0].dim
    k = args.k
    d_eff = pad_dim(dim, k)
    perm = Permutation.generate(seed, d_eff)
    out = []
    for i, s in enumerate(sets):
        sk = sketch_fixed(s, perm, k)
        bb = encoding.bbit(sk, args.b)
        out.append(encoding.expand(bb, coding=args.coding,
                                   rng_seed=lsh.table_seed(seed, 1 + i)))
    return out


def _cmd_expand(args) -> int:
    seed = _resolved_seed(args)
    sets, _ids, labels = _read_sets(args)
    if not sets:
        raise ValueError("no input vectors")
    vectors = _expand_all(args, sets, seed)
    text = encoding.export_libsvm(vectors, labels)
    stream = _out_stream(args)
    stream.write(text)
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_export_libsvm(args) -> int:
    sketches, b = load_sketches(args.sketches)
    b = args.b or b
    if not b:
        raise ValueError("sketch file carries no b; pass --b")
    labels = None
    if args.labels:
        with open(args.labels) as fh:
            labels = [int(line.strip()) for line in fh if line.strip()]
    vectors = []
    for i, sk in enumerate(sketches):
        bb = encoding.bbit(sk, b)
        vectors.append(encoding.expand(bb, coding=args.coding,
                                       rng_seed=lsh.table_seed(args.seed or 0,
                                                               1 + i)))
    stream = _out_stream(args)
    stream.write(encoding.export_libsvm(vectors, labels))
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_lsh_build(args) -> int:
    seed = _resolved_seed(args)
    sets, _ids, _ = _read_sets(args)
    index = lsh.build_index(sets, args.tables, args.b, args.k, seed)
    lsh.save_index(args.output, index)
    return 0


def _cmd_lsh_query(args) -> int:
    index = lsh.load_index(args.index)
    sets, ids, _ = _read_sets(args)
    stream = _out_stream(args)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["query_id", "candidates"])
    for s, name in zip(sets, ids):
        hits = sorted(lsh.query(index, s))
        writer.writerow([name, " ".join(str(h) for h in hits)])
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_train(args) -> int:
    seed = _resolved_seed(args)
    with open(args.input) as fh:
        vectors, labels = encoding.parse_expanded_libsvm(fh.read(),
                                                         dim=args.dim)
    model = learner.train_logreg(vectors, labels, c=args.c,
                                 epochs=args.epochs, seed=seed)
    learner.save_model(args.output, model)
    return 0


def _cmd_predict(args) -> int:
    model = learner.load_model(args.model)
    with open(args.input) as fh:
        vectors, _labels = encoding.parse_expanded_libsvm(fh.read(),
                                                          dim=model.dim)
    stream = _out_stream(args)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["row", "label", "margin"])
    for i, v in enumerate(vectors):
        label, margin = learner.predict(model, v)
        writer.writerow([i, label, repr(margin)])
    if stream is not sys.stdout:
        stream.close()
    return 0


# -- parser -------------------------------------------------------------------


def _add_io(sp, output_required=False):
    sp.add_argument("--input", required=True, help="input vectors file")
    sp.add_argument("--format", choices=("sets", "libsvm"), default="sets")
    sp.add_argument("--dim", "--D", type=int, default=None,
                    help="feature-space size override (default: inferred)")
    if output_required:
        sp.add_argument("--output", "-o", required=True)
    else:
        sp.add_argument("--output", "-o", default=None,
                        help="output path (default: stdout)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onehash",
        description="One-permutation minwise hashing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sketch", help="sketch vectors to a binary file")
    _add_io(sp, output_required=True)
    sp.add_argument("--scheme", choices=("fixed", "variable", "mperm",
                                         "kperm"), default="fixed")
    sp.add_argument("--k", type=int, required=True, help="bin count")
    sp.add_argument("--m", type=int, default=2,
                    help="permutation count for --scheme mperm")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=_cmd_sketch)

    sp = sub.add_parser("estimate",
                        help="sketch pairs and estimate resemblance")
    _add_io(sp)
    sp.add_argument("--scheme", choices=("fixed", "variable", "kperm"),
                    default="fixed")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--estimator", choices=("mat", "zero"), default="mat")
    sp.add_argument("--coding", choices=("none", "random"), default="none",
                    help="random fills empty slots before estimating")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=_cmd_estimate)

    sp = sub.add_parser("theory", help="print closed-form quantities as CSV")
    sp.add_argument("--quantity", choices=_QUANTITIES, required=True)
    sp.add_argument("--D", "--dim", dest="dim", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--f", type=int, required=True, help="union size")
    sp.add_argument("--a", type=int, default=None, help="intersection size")
    sp.add_argument("--method", choices=("approx", "dist"), default="approx")
    sp.add_argument("--exact", action="store_true",
                    help="exact rational arithmetic for dist")
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=_cmd_theory)

    sp = sub.add_parser("validate",
                        help="Monte Carlo vs closed forms, CSV report")
    sp.add_argument("--pairs", default="builtin",
                    help="'builtin' or a CSV with name,f1,f2,a[,D]")
    sp.add_argument("--k", default="8,64,512,4096",
                    help="comma-separated bin counts")
    sp.add_argument("--reps", type=int, default=10_000)
    sp.add_argument("--scheme", choices=("fixed", "variable", "kperm"),
                    default="fixed")
    sp.add_argument("--engine", choices=("decomposed", "direct"),
                    default="decomposed")
    sp.add_argument("--dim", "--D", dest="dim", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--output", "-o", default=None)
    sp.add_argument("--plot-script", default=None,
                    help="also write a matplotlib script for the CSV")
    sp.set_defaults(func=_cmd_validate)

    sp = sub.add_parser("expand",
                        help="sketch, b-bit encode and expand to libsvm text")
    _add_io(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--b", type=int, required=True, help="bits per bin")
    sp.add_argument("--coding", choices=("zero", "random"), default="zero")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=_cmd_expand)

    sp = sub.add_parser("export-libsvm",
                        help="expand a sketch file to libsvm text")
    sp.add_argument("--sketches", required=True, help="binary sketch file")
    sp.add_argument("--b", type=int, default=None,
                    help="bits per bin (default: value stored in the file)")
    sp.add_argument("--coding", choices=("zero", "random"), default="zero")
    sp.add_argument("--labels", default=None, help="one label per line")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=_cmd_export_libsvm)

    sp = sub.add_parser("lsh-build", help="build and save a bucket index")
    _add_io(sp, output_required=True)
    sp.add_argument("--tables", "-L", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=_cmd_lsh_build)

    sp = sub.add_parser("lsh-query", help="query an index with vectors")
    sp.add_argument("--index", required=True)
    _add_io(sp)
    sp.set_defaults(func=_cmd_lsh_query)

    sp = sub.add_parser("train",
                        help="fit logistic regression on expanded libsvm text")
    sp.add_argument("--input", required=True)
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--C", dest="c", type=float, default=1.0)
    sp.add_argument("--epochs", type=int, default=20)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--output", "-o", required=True)
    sp.set_defaults(func=_cmd_train)

    sp = sub.add_parser("predict", help="score expanded libsvm rows")
    sp.add_argument("--model", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", "-o", default=None)
    sp.set_defaults(func=_cmd_predict)

    return parser


if __name__ == "__main__":
    sys.exit(main())
