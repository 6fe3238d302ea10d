"""One-permutation minwise hashing for set-similarity search and learning.

Permute the feature space once, split it into k bins, keep the smallest
permuted nonzero per bin.  The package provides the sketch constructions,
resemblance estimators with empty-bin handling, b-bit encodings for
linear learning, an LSH bucket index, closed-form moments for every bin
statistic, and a Monte Carlo harness that checks the implementation
against those closed forms.
"""

from .data import (BinarySet, FormatError, PairSpec, intersect_stats,
                   parse_libsvm, parse_sets, write_libsvm, write_sets)
from .encoding import (BBitSketch, ExpandedVector, bbit, decode_positions,
                       expand, export_libsvm, inner_product,
                       parse_expanded_libsvm, raw_feature_vector)
from .estimation import (PairStats, estimate_r_kperm, estimate_r_mat,
                         estimate_r_zero, fill_empty_random, pair_stats)
from .learner import (LinearModel, accuracy, gradient, load_model,
                      objective, predict, save_model, train_logreg)
from .lsh import (LshIndex, build_index, build_signature, load_index,
                  pack_signature, query, save_index, table_seed,
                  union_buckets)
from .montecarlo import (McConfig, McReport, McRow, PairMoments, WORD_PAIRS,
                         emit_plot_script, run_validation, synth_pair,
                         word_pair_specs)
from .permutation import Permutation, smallest_prime_at_least
from .sketch import (MinwiseVector, OphSketch, load_sketches, pad_dim,
                     save_sketches, sketch_fixed, sketch_kperm_minwise,
                     sketch_m_perm, sketch_variable)
from . import moments

__version__ = "0.1.0"

__all__ = [
    "BinarySet", "PairSpec", "FormatError", "intersect_stats",
    "parse_libsvm", "write_libsvm", "parse_sets", "write_sets",
    "Permutation", "smallest_prime_at_least",
    "OphSketch", "MinwiseVector", "sketch_fixed", "sketch_variable",
    "sketch_m_perm", "sketch_kperm_minwise", "pad_dim",
    "save_sketches", "load_sketches",
    "PairStats", "pair_stats", "estimate_r_mat", "estimate_r_zero",
    "estimate_r_kperm", "fill_empty_random",
    "moments",
    "BBitSketch", "ExpandedVector", "bbit", "expand", "decode_positions",
    "inner_product", "export_libsvm", "parse_expanded_libsvm",
    "raw_feature_vector",
    "LshIndex", "build_index", "build_signature", "pack_signature",
    "query", "union_buckets", "table_seed", "save_index", "load_index",
    "McConfig", "McReport", "McRow", "PairMoments", "WORD_PAIRS",
    "word_pair_specs", "synth_pair", "run_validation", "emit_plot_script",
    "LinearModel", "train_logreg", "predict", "accuracy", "objective",
    "gradient", "save_model", "load_model",
    "__version__",
]
