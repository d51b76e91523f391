"""Per-benchmark network builders with the tensor-train folds used throughout.

Architectures (TT variants fold exactly these layers; the rest stay dense):

    black-scholes : 2 -> 128 -> 128 -> 1, tanh; hidden fold (4,4,8)x(8,4,4)
    hjb           : 21 -> W -> W -> 1, sine; input and hidden layers folded
    burgers/darcy : 2 -> 100 -> 100 -> 100 -> 100 -> 1, tanh;
                    the three 100x100 layers folded (4,5,5)x(5,5,4)

Input coordinates are affinely mapped to about [-1, 1] and the output is
rescaled to the solution's magnitude where the raw ranges would otherwise be
hostile to tanh nets (Black-Scholes prices reach ~10^2).
"""

from __future__ import annotations

import numpy as np

from .nets import DenseLayer, TensorizedMlp, TTLayer
from .pde import black_scholes as bs
from .tensortrain import TTLayout

__all__ = ["build_model", "hjb_folds"]


def _dense(n_in, n_out, rng):
    return DenseLayer.init(n_in, n_out, rng)


def _tt(in_factors, out_factors, ranks, seed):
    return TTLayer.init(TTLayout(in_factors, out_factors, ranks), seed)


def hjb_folds(width: int):
    """Input/hidden factorizations for an HJB model of the given width."""
    table = {
        512: (((1, 1, 3, 7), (8, 4, 4, 4)), ((4, 4, 4, 8), (8, 4, 4, 4))),
        128: (((1, 1, 3, 7), (2, 4, 4, 4)), ((4, 4, 8), (8, 4, 4))),
    }
    if width not in table:
        raise KeyError(f"no HJB fold table for width {width}")
    return table[width]


def build_model(
    problem: str,
    tensorized: bool = True,
    rank: int = 2,
    width: int | None = None,
    seed: int = 0,
    dtype=np.float64,
) -> TensorizedMlp:
    rng = np.random.default_rng(seed)
    if problem == "black-scholes":
        w = width or 128
        if tensorized and w != 128:
            raise ValueError("the Black-Scholes TT fold is defined for width 128")
        hidden = (
            _tt((4, 4, 8), (8, 4, 4), (1, rank, rank, 1), seed + 1)
            if tensorized
            else _dense(w, w, rng)
        )
        layers = [_dense(2, w, rng), hidden, _dense(w, 1, rng)]
        return TensorizedMlp(
            layers,
            activation="tanh",
            input_shift=np.array([bs.X_MAX / 2.0, bs.HORIZON / 2.0]),
            input_scale=np.array([2.0 / bs.X_MAX, 2.0 / bs.HORIZON]),
            output_scale=bs.STRIKE,
            dtype=dtype,
        )
    if problem == "hjb":
        w = width or 512
        if tensorized:
            (in_f, in_o), (h_f, h_o) = hjb_folds(w)
            in_ranks = (1,) + (rank,) * (len(in_f) - 1) + (1,)
            h_ranks = (1,) + (rank,) * (len(h_f) - 1) + (1,)
            layers = [
                _tt(in_f, in_o, in_ranks, seed + 1),
                _tt(h_f, h_o, h_ranks, seed + 2),
                _dense(w, 1, rng),
            ]
        else:
            layers = [_dense(21, w, rng), _dense(w, w, rng), _dense(w, 1, rng)]
        return TensorizedMlp(layers, activation="sine", dtype=dtype)
    if problem in ("burgers", "darcy"):
        w = width or 100
        if tensorized and w != 100:
            raise ValueError("the Burgers/Darcy TT fold is defined for width 100")
        if tensorized:
            hiddens = [
                _tt((4, 5, 5), (5, 5, 4), (1, rank, rank, 1), seed + 1 + k) for k in range(3)
            ]
        else:
            hiddens = [_dense(w, w, rng) for _ in range(3)]
        layers = [_dense(2, w, rng), *hiddens, _dense(w, 1, rng)]
        shift = np.array([0.0, 0.5]) if problem == "burgers" else np.array([0.5, 0.5])
        scale = np.array([1.0, 2.0]) if problem == "burgers" else np.array([2.0, 2.0])
        return TensorizedMlp(
            layers, activation="tanh", input_shift=shift, input_scale=scale, dtype=dtype
        )
    raise KeyError(f"unknown problem {problem!r}")
