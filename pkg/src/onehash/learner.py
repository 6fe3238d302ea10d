"""Regularized logistic regression by plain SGD over sparse vectors.

Minimizes (1/2)||w||^2 + C * sum_i log(1 + exp(-y_i w.x_i)), which after
dividing by C*n is the average logistic loss plus (lam/2)||w||^2 with
lam = 1/(C*n); SGD runs on that scaled objective with the classic
1/(lam*t) step size and per-epoch seeded shuffling.  This exists to
validate the encoding pipeline end to end, not to compete with real
solvers.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .encoding import ExpandedVector


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    c: float
    epochs: int
    seed: int

    @property
    def dim(self) -> int:
        return len(self.weights)


def _margin(weights: np.ndarray, bias: float, v: ExpandedVector) -> float:
    return v.weight * float(weights[v.positions].sum()) + bias


def objective(weights: np.ndarray, bias: float, data: list, labels,
              c: float) -> float:
    """(1/2)||w||^2 + C * total logistic loss (bias unregularized)."""
    reg = 0.5 * float(weights @ weights)
    loss = 0.0
    for v, y in zip(data, labels):
        z = -y * _margin(weights, bias, v)
        # log(1 + e^z) without overflow
        loss += z + math.log1p(math.exp(-z)) if z > 0 else math.log1p(math.exp(z))
    return reg + c * loss


def gradient(weights: np.ndarray, bias: float, data: list, labels,
             c: float):
    """Full-batch gradient of ``objective``; the finite-difference target."""
    gw = weights.copy()
    gb = 0.0
    for v, y in zip(data, labels):
        z = y * _margin(weights, bias, v)
        sig = 1.0 / (1.0 + math.exp(z)) if z > -500 else 1.0
        coef = -c * y * sig
        gw[v.positions] += coef * v.weight
        gb += coef
    return gw, gb


def train_logreg(data: list, labels, c: float = 1.0, epochs: int = 10,
                 seed: int = 0) -> LinearModel:
    """SGD fit; deterministic for a given seed."""
    n = len(data)
    if n == 0:
        raise ValueError("empty dataset")
    if len(labels) != n:
        raise ValueError("labels must match data")
    if any(y not in (-1, 1) for y in labels):
        raise ValueError("labels must be -1 or +1")
    dim = data[0].dim
    if any(v.dim != dim for v in data):
        raise ValueError("inconsistent vector dimensions")

    ys = np.asarray(labels, dtype=np.float64)
    lam = 1.0 / (c * n)
    w = np.zeros(dim)
    # the regularized objective has no intercept; the model carries a
    # bias slot for hand-built models but SGD leaves it at zero
    bias = 0.0
    rng = np.random.default_rng([seed & ((1 << 64) - 1), 0x10_6_1])
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            v = data[i]
            y = ys[i]
            z = y * _margin(w, bias, v)
            sig = 1.0 / (1.0 + math.exp(z)) if z > -500 else 1.0
            # stochastic objective: (lam/2)||w||^2 + one sampled loss
            w *= 1.0 - eta * lam
            if sig:
                w[v.positions] += eta * y * sig * v.weight
    return LinearModel(w, bias, c, epochs, seed)


def predict(model: LinearModel, v: ExpandedVector):
    """(label, margin); zero margin resolves to +1."""
    if v.dim != model.dim:
        raise ValueError("dimension mismatch")
    margin = _margin(model.weights, model.bias, v)
    return (1 if margin >= 0 else -1), margin


def accuracy(model: LinearModel, data: list, labels) -> float:
    hits = sum(predict(model, v)[0] == y for v, y in zip(data, labels))
    return hits / len(data)


# -- model file ------------------------------------------------------------

_MAGIC = b"OPHM"


def save_model(path, model: LinearModel) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BQdIq", 1, model.dim, model.c, model.epochs,
                             model.seed))
        fh.write(struct.pack("<d", model.bias))
        fh.write(model.weights.astype("<f8").tobytes())


def load_model(path) -> LinearModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a model file")
        version, dim, c, epochs, seed = struct.unpack("<BQdIq", fh.read(29))
        if version != 1:
            raise ValueError(f"unsupported version {version}")
        (bias,) = struct.unpack("<d", fh.read(8))
        weights = np.frombuffer(fh.read(8 * dim), dtype="<f8").copy()
        return LinearModel(weights, bias, c, epochs, seed)
