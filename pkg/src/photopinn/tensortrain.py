"""Tensor-train parameterization of weight matrices.

A matrix W of shape (M, N) with M = prod(out_factors) and N = prod(in_factors)
is folded into a 2L-way tensor and stored as L cores, core k of shape
(r[k-1], out_factors[k], in_factors[k], r[k]) with r[0] = r[L] = 1.  Under the
row-major multi-index bijection (last factor fastest) the matrix entry is the
chain product of core slices:

    W[i, j] = G_1(i_1, j_1) @ G_2(i_2, j_2) @ ... @ G_L(i_L, j_L).

`tt_forward` contracts an input batch against the cores one at a time and
never materializes W; `tt_reconstruct` builds the dense matrix for oracles and
small layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TTLayout",
    "TTCores",
    "tt_param_count",
    "tt_reconstruct",
    "tt_forward",
    "tt_init",
    "fold_index",
    "unfold_index",
]

RECONSTRUCT_CAP = 2**24  # max M*N entries tt_reconstruct will materialize


@dataclass(frozen=True)
class TTLayout:
    """Factorization plan: out_factors multiply to M (rows), in_factors to N (cols)."""

    in_factors: tuple[int, ...]
    out_factors: tuple[int, ...]
    ranks: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "in_factors", tuple(int(v) for v in self.in_factors))
        object.__setattr__(self, "out_factors", tuple(int(v) for v in self.out_factors))
        object.__setattr__(self, "ranks", tuple(int(v) for v in self.ranks))
        L = len(self.in_factors)
        if L == 0 or len(self.out_factors) != L:
            raise ValueError("in_factors and out_factors must have equal nonzero length")
        if len(self.ranks) != L + 1:
            raise ValueError("ranks must have one more entry than the factor lists")
        if self.ranks[0] != 1 or self.ranks[-1] != 1:
            raise ValueError("boundary ranks must be 1")
        if any(v < 1 for v in self.in_factors + self.out_factors + self.ranks):
            raise ValueError("factors and ranks must be >= 1")

    @property
    def L(self) -> int:
        return len(self.in_factors)

    @property
    def rows(self) -> int:
        return math.prod(self.out_factors)

    @property
    def cols(self) -> int:
        return math.prod(self.in_factors)

    def core_shape(self, k: int) -> tuple[int, int, int, int]:
        return (self.ranks[k], self.out_factors[k], self.in_factors[k], self.ranks[k + 1])


def tt_param_count(layout: TTLayout) -> int:
    """Number of stored core entries: sum_k r[k-1] * m_k * n_k * r[k]."""
    return sum(math.prod(layout.core_shape(k)) for k in range(layout.L))


@dataclass
class TTCores:
    """Layout plus the dense 4-way core arrays."""

    layout: TTLayout
    cores: list[np.ndarray]

    def __post_init__(self):
        if len(self.cores) != self.layout.L:
            raise ValueError("wrong number of cores for layout")
        for k, core in enumerate(self.cores):
            want = self.layout.core_shape(k)
            if core.shape != want:
                raise ValueError(f"core {k} has shape {core.shape}, expected {want}")
            if not np.all(np.isfinite(core)):
                raise ValueError(f"core {k} contains non-finite entries")


def unfold_index(flat: int, factors: tuple[int, ...]) -> tuple[int, ...]:
    """Row-major split of a flat index: the last factor varies fastest."""
    out = []
    for f in reversed(factors):
        out.append(flat % f)
        flat //= f
    return tuple(reversed(out))


def fold_index(multi: tuple[int, ...], factors: tuple[int, ...]) -> int:
    flat = 0
    for idx, f in zip(multi, factors):
        flat = flat * f + idx
    return flat


def tt_reconstruct(cores: TTCores, cap: int = RECONSTRUCT_CAP) -> np.ndarray:
    """Materialize the dense (M, N) matrix represented by the cores."""
    lay = cores.layout
    if lay.rows * lay.cols > cap:
        raise ValueError(f"refusing to materialize {lay.rows}x{lay.cols} matrix (cap {cap})")
    # running tensor axes: (m_1..m_k, n_1..n_k, r_k)
    t = cores.cores[0][0]  # (m_1, n_1, r_1)
    for k in range(1, lay.L):
        t = np.tensordot(t, cores.cores[k], axes=(-1, 0))  # (..., m_k, n_k, r_k)
    t = t[..., 0]  # r_L == 1
    L = lay.L
    # axes currently ordered m_1, n_1, m_2, n_2, ...; bring all m first then all n
    perm = list(range(0, 2 * L, 2)) + list(range(1, 2 * L, 2))
    t = np.transpose(t, perm)
    return t.reshape(lay.rows, lay.cols)


def tt_forward(cores: TTCores, x: np.ndarray) -> np.ndarray:
    """Compute W @ x (or batched x of shape (B, N) -> (B, M)) by core contractions."""
    lay = cores.layout
    x = np.asarray(x)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != lay.cols:
        raise ValueError(f"input length {xb.shape[1]} != layout cols {lay.cols}")
    B = xb.shape[0]
    if _forward_cost(lay) <= _reverse_cost(lay):
        out = _contract_head_first(lay, cores.cores, xb)
    else:
        out = _contract_tail_first(lay, cores.cores, xb)
    return out[0] if single else out


def _forward_cost(lay: TTLayout) -> int:
    """Peak intermediate size (per batch row) when contracting cores 1..L."""
    peak = lay.cols
    done = 1
    pending = lay.cols
    for k in range(lay.L):
        pending //= lay.in_factors[k]
        done *= lay.out_factors[k]
        peak = max(peak, done * lay.ranks[k + 1] * pending)
    return peak


def _reverse_cost(lay: TTLayout) -> int:
    peak = lay.cols
    done = 1
    pending = lay.cols
    for k in range(lay.L - 1, -1, -1):
        pending //= lay.in_factors[k]
        done *= lay.out_factors[k]
        peak = max(peak, pending * lay.ranks[k] * done)
    return peak


def _contract_head_first(lay: TTLayout, cores: list[np.ndarray], xb: np.ndarray) -> np.ndarray:
    B = xb.shape[0]
    # t invariant: (B', r_{k-1} * pending) where pending = n_k * ... * n_L and
    # B' folds the batch with the output factors produced so far (row-major).
    t = xb.reshape(B, lay.cols)
    pending = lay.cols
    for k in range(lay.L):
        n_k, m_k = lay.in_factors[k], lay.out_factors[k]
        r0, r1 = lay.ranks[k], lay.ranks[k + 1]
        pending //= n_k
        # (B', r0*n_k, pending) x (r0*n_k, m_k*r1) -> (B', pending, m_k*r1)
        cm = cores[k].transpose(0, 2, 1, 3).reshape(r0 * n_k, m_k * r1)
        t = np.tensordot(t.reshape(-1, r0 * n_k, pending), cm, axes=(1, 0))
        # reorder to (B'*m_k, r1*pending) keeping row-major output indexing
        t = np.ascontiguousarray(t.transpose(0, 2, 1)).reshape(-1, r1 * pending)
    return t.reshape(B, lay.rows)


def _contract_tail_first(lay: TTLayout, cores: list[np.ndarray], xb: np.ndarray) -> np.ndarray:
    B = xb.shape[0]
    # t invariant: (B, done, pending, r_k) with pending = n_1 * ... * n_k
    # (n_k fastest) and done = m_k+1 * ... * m_L (m_k+1 slowest).  The
    # contracted (n_k, r_k) pair sits trailing, so each core costs one batched
    # matmul plus one reordering copy.
    t = xb.reshape(B, 1, lay.cols, 1)
    pending = lay.cols
    done = 1
    for k in range(lay.L - 1, -1, -1):
        n_k, m_k = lay.in_factors[k], lay.out_factors[k]
        r0, r1 = lay.ranks[k], lay.ranks[k + 1]
        pending //= n_k
        cm = cores[k].transpose(2, 3, 0, 1).reshape(n_k * r1, r0 * m_k)
        u = t.reshape(B * done * pending, n_k * r1) @ cm
        u = u.reshape(B, done, pending, r0, m_k)
        t = np.ascontiguousarray(u.transpose(0, 4, 1, 2, 3))
        done *= m_k
        t = t.reshape(B, done, pending, r0)
    return t.reshape(B, lay.rows)


def tt_init(layout: TTLayout, seed: int) -> TTCores:
    """Random cores whose reconstruction has entry variance ~ 2 / (M + N).

    The chain product multiplies per-core variances and picks up one factor of
    r_k per interior contraction, so each core uses
    std = (2/(M+N) / prod(ranks))**(1/(2L)).
    """
    rank_prod = math.prod(layout.ranks)
    target = 2.0 / (layout.rows + layout.cols)
    std = (target / rank_prod) ** (1.0 / (2 * layout.L))
    rng = np.random.default_rng(seed)
    cores = [std * rng.standard_normal(layout.core_shape(k)) for k in range(layout.L)]
    return TTCores(layout=layout, cores=cores)
