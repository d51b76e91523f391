"""20-dimensional Hamilton-Jacobi-Bellman benchmark.

    u_t + lap_x u - 0.05 |grad_x u|^2 = -2   on [0,1]^20 x [0,1],
    u(x, 1) = |x|_1.

The exact solution is u(x, t) = |x|_1 + 1 - t.  The terminal condition is
enforced by construction through the transformed solution network

    u(x, t) = (1 - t) f(x, t) + |x|_1,

so training only needs the residual term.
"""

from __future__ import annotations

import numpy as np

SPATIAL_DIM = 20
GRAD_PENALTY = 0.05
RHS = -2.0

__all__ = ["SPATIAL_DIM", "GRAD_PENALTY", "RHS", "hjb_exact", "hjb_transform"]


def hjb_exact(x, t):
    """|x|_1 + 1 - t for x of shape (..., d) and matching t."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.sum(np.abs(x), axis=-1) + 1.0 - t


def hjb_transform(net):
    """Wrap a raw network f(x, t) into (1 - t) f + |x|_1; input is (B, d+1) with t last."""

    def solution(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        t = X[:, -1]
        return (1.0 - t) * np.asarray(net(X), dtype=float) + np.sum(np.abs(X[:, :-1]), axis=1)

    return solution
