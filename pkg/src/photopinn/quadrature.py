"""Nested Gaussian quadrature, Smolyak sparse grids, and smoothed-derivative estimators.

Everything here integrates against the standard normal measure

    E[f] = (2*pi)^(-D/2) * integral f(z) exp(-|z|^2/2) dz.

The univariate rules form a nested sequence with node counts 1, 3, 5:

    level 1: {0}                          weight 1
    level 2: {-sqrt(3), 0, sqrt(3)}       weights 1/6, 2/3, 1/6  (3-point probabilists' Gauss-Hermite)
    level 3: level-2 nodes plus {-B, B}   with B = sqrt(5 + sqrt(10))

The level-3 extension keeps level-2 as a subset.  Matching the even moments
of N(0,1) lexicographically (m0 = 1, m2 = 1, m4 = 3) forces the weight on the
two new abscissae to zero: subtracting 3*m2 from m4 gives
2*w_B*B^2*(B^2 - 3) = 0, so any nonzero w_B would require B = sqrt(3), a
duplicate node.  A positive-weight Kronrod-style extension of the 3-point
Hermite rule does not exist, so degree-5 is the maximal exactness attainable
by a nested 5-point rule; m6 evaluates to 9 rather than 15.  The new nodes sit
at the outer abscissae of the 5-point Gauss-Hermite rule.

D-dimensional grids come from the Smolyak combination

    A(D, k) = sum over q in [max(0, k-D), k-1] of
              (-1)^(k-1-q) * C(D-1, k-1-q) * sum over |l| = D+q of V_l1 x ... x V_lD,

with coincident nodes merged and their signed weights summed.  At level 3 the
merged grid has exactly 2*D^2 + 2*D + 1 nodes.

The smoothed-model estimators evaluate a network f at x + sigma*z over the
grid (or over antithetic Monte-Carlo pairs) and combine the values into the
smoothed forward value, its gradient, the diagonal of its Hessian, and its
Laplacian.  The node set is symmetric, so f(x - sigma*z_j) reuses the
evaluation at the negated node: one model query per node.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb, sqrt
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Rule1D",
    "SparseGrid",
    "SteinConfig",
    "QuadratureError",
    "UnsupportedLevelError",
    "InvalidDimensionError",
    "rule_1d",
    "build_sparse_grid",
    "sparse_integrate",
    "save_grid",
    "load_grid",
    "smoothed_forward",
    "stein_first",
    "stein_second_diag",
    "stein_laplacian",
    "SteinPlan",
]

_SQRT3 = sqrt(3.0)
# Outer abscissa of the 5-point Gauss-Hermite rule (probabilists' weight).
_B3 = sqrt(5.0 + sqrt(10.0))

_NODE_QUANTUM = 1e-12  # dedup tolerance, in units of unscaled (sigma = 1) nodes


class QuadratureError(ValueError):
    pass


class UnsupportedLevelError(QuadratureError):
    pass


class InvalidDimensionError(QuadratureError):
    pass


@dataclass(frozen=True)
class Rule1D:
    """One univariate rule: `nodes[i]` carries `weights[i]`, sum(weights) == 1."""

    level: int
    nodes: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise QuadratureError("nodes and weights must have equal length")

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        x = np.asarray(self.nodes)
        w = np.asarray(self.weights)
        return float(np.dot(w, np.asarray(f(x), dtype=float)))


def rule_1d(level: int, extended: bool = False) -> Rule1D:
    """Return the nested rule for the given accuracy level.

    Levels 1-3 are the supported sequence.  With ``extended=True`` higher
    levels append further zero-weight node pairs at outer 5/7/...-point
    Gauss-Hermite abscissae; they grow the node count (2*level - 1) without
    raising the polynomial exactness and exist only for grid-size studies.
    """
    if level < 1:
        raise UnsupportedLevelError(f"level must be >= 1, got {level}")
    if level > 3 and not extended:
        raise UnsupportedLevelError(
            f"level {level} not supported (enable the extended-rule feature for size studies)"
        )
    if level == 1:
        return Rule1D(1, (0.0,), (1.0,))
    if level == 2:
        return Rule1D(2, (-_SQRT3, 0.0, _SQRT3), (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0))
    if level == 3:
        return Rule1D(
            3,
            (-_B3, -_SQRT3, 0.0, _SQRT3, _B3),
            (0.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 0.0),
        )
    # Extended levels: pad outward with zero-weight pairs taken from the
    # (2*level - 1)-point Gauss-Hermite abscissae.
    prev = rule_1d(level - 1, extended=True)
    gh_nodes = np.polynomial.hermite_e.hermegauss(2 * level - 1)[0]
    outer = float(np.max(np.abs(gh_nodes)))
    nodes = (-outer,) + prev.nodes + (outer,)
    weights = (0.0,) + prev.weights + (0.0,)
    return Rule1D(level, nodes, weights)


@dataclass(frozen=True)
class SparseGrid:
    """Merged Smolyak node set: ``nodes`` is (n, dim), ``weights`` is (n,)."""

    dim: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.ascontiguousarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.ascontiguousarray(self.weights, dtype=float))
        if self.nodes.shape != (len(self.weights), self.dim):
            raise QuadratureError("node/weight shapes inconsistent with dim")

    def __len__(self) -> int:
        return len(self.weights)


def _excess_assignments(dim: int, q: int, max_excess: int):
    """Yield {coord: excess} dicts distributing q units with per-coord cap."""
    if q == 0:
        yield {}
        return
    # partitions of q with parts <= max_excess, assigned to distinct coords
    def partitions(n, cap):
        if n == 0:
            yield ()
            return
        for first in range(min(n, cap), 0, -1):
            for rest in partitions(n - first, first):
                yield (first,) + rest

    for part in partitions(q, max_excess):
        r = len(part)
        if r > dim:
            continue
        for coords in itertools.combinations(range(dim), r):
            # distinct orderings of the partition over the chosen coords
            for perm in set(itertools.permutations(part)):
                yield dict(zip(coords, perm))


def build_sparse_grid(dim: int, level: int, extended: bool = False) -> SparseGrid:
    """Construct the level-k Smolyak grid for D-variate standard-normal integration.

    Nodes coinciding across index tuples are merged with their signed weights
    summed; merged nodes are kept even when the summed weight is zero, since
    they are part of the published node counts.
    """
    if dim < 1:
        raise InvalidDimensionError(f"dim must be >= 1, got {dim}")
    if level < 1 or (level > 3 and not extended):
        raise UnsupportedLevelError(f"level {level} not supported")
    rules = {l: rule_1d(l, extended=extended) for l in range(1, level + 1)}
    base = rules[1]
    accum: dict[tuple[int, ...], tuple[np.ndarray, float]] = {}
    for q in range(max(0, level - dim), level):
        coeff = (-1.0) ** (level - 1 - q) * comb(dim - 1, level - 1 - q)
        for excess in _excess_assignments(dim, q, level - 1):
            per_coord = [rules[1 + excess.get(m, 0)] for m in range(dim)]
            # only iterate over the coords with more than one node
            hot = sorted(excess)
            hot_nodes = [per_coord[m].nodes for m in hot]
            hot_weights = [per_coord[m].weights for m in hot]
            for combo in itertools.product(*(range(len(n)) for n in hot_nodes)):
                node = np.zeros(dim)
                w = coeff * float(base.weights[0]) ** (dim - len(hot))
                for i, (m, idx) in enumerate(zip(hot, combo)):
                    node[m] = hot_nodes[i][idx]
                    w *= hot_weights[i][idx]
                key = tuple(int(round(v / _NODE_QUANTUM)) for v in node)
                if key in accum:
                    accum[key] = (accum[key][0], accum[key][1] + w)
                else:
                    accum[key] = (node, w)
    items = sorted(accum.values(), key=lambda nw: tuple(nw[0]))
    nodes = np.array([nw[0] for nw in items])
    weights = np.array([nw[1] for nw in items])
    return SparseGrid(dim=dim, level=level, nodes=nodes, weights=weights)


_GRID_CACHE: dict[tuple[int, int], SparseGrid] = {}


def cached_grid(dim: int, level: int) -> SparseGrid:
    key = (dim, level)
    if key not in _GRID_CACHE:
        _GRID_CACHE[key] = build_sparse_grid(dim, level)
    return _GRID_CACHE[key]


def sparse_integrate(grid: SparseGrid, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Return sum_j w_j f(node_j).  f maps an (n, dim) batch to (n,) or (n, m)."""
    vals = np.asarray(f(grid.nodes), dtype=float)
    if vals.shape[0] != len(grid):
        raise QuadratureError(
            f"f returned {vals.shape[0]} values for {len(grid)} nodes; "
            f"check the input dimension (grid dim is {grid.dim})"
        )
    return np.tensordot(grid.weights, vals, axes=(0, 0))


def save_grid(grid: SparseGrid, path) -> None:
    """Plain-text dump: '#' header with (dim, level, count), then one node+weight per line."""
    with open(path, "w") as fh:
        fh.write(f"# dim {grid.dim}\n# level {grid.level}\n# count {len(grid)}\n")
        for node, w in zip(grid.nodes, grid.weights):
            fh.write(" ".join(f"{v:.17g}" for v in node) + f" {w:.17g}\n")


def load_grid(path) -> SparseGrid:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2:
                    meta[parts[0]] = int(parts[1])
                continue
            rows.append([float(v) for v in line.split()])
    data = np.array(rows)
    dim = meta.get("dim", data.shape[1] - 1)
    level = meta.get("level", 0)
    grid = SparseGrid(dim=dim, level=level, nodes=data[:, :-1], weights=data[:, -1])
    if "count" in meta and meta["count"] != len(grid):
        raise QuadratureError(f"grid file count {meta['count']} != {len(grid)} rows")
    return grid


# ---------------------------------------------------------------------------
# Smoothed-model derivative estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteinConfig:
    """How to integrate the Gaussian smoothing: grid mode or antithetic Monte Carlo.

    sigma   : smoothing noise std (> 0)
    mode    : 'sparse-grid' or 'monte-carlo'
    level   : grid accuracy level (sparse-grid mode)
    samples : number of antithetic pairs (monte-carlo mode)
    seed    : base seed for the per-call Monte-Carlo streams
    """

    sigma: float
    mode: str = "sparse-grid"
    level: int = 3
    samples: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.sigma <= 0:
            raise QuadratureError(f"sigma must be > 0, got {self.sigma}")
        if self.mode not in ("sparse-grid", "monte-carlo"):
            raise QuadratureError(f"unknown mode {self.mode!r}")
        if self.mode == "sparse-grid" and self.level not in (1, 2, 3):
            raise UnsupportedLevelError(f"level {self.level} not supported")
        if self.mode == "monte-carlo" and self.samples < 1:
            raise QuadratureError("samples must be >= 1")


class SteinPlan:
    """Precomputed offsets and combination weights for one estimator call.

    ``offsets`` has shape (n, dim) and always contains exactly one zero row;
    ``pair[j]`` indexes the row holding the negated offset.  A single batch of
    model evaluations at x + offsets yields every estimator:

        u(x)      = sum_j w_j * (f_j + f_pair(j)) / 2
        du_i(x)   = sum_j w_j * offset_ji / (2 sigma^2) * (f_j - f_pair(j))
        d2u_ii(x) = sum_j w_j * (offset_ji^2 - sigma^2) / (2 sigma^4) * (f_j + f_pair(j) - 2 f_0)
        lap u(x)  = sum_j w_j * (|offset_j|^2 - sigma^2 D) / (2 sigma^4) * (f_j + f_pair(j) - 2 f_0)
    """

    def __init__(self, cfg: SteinConfig, dim: int, call_index: int = 0):
        sigma = cfg.sigma
        if cfg.mode == "sparse-grid":
            grid = cached_grid(dim, cfg.level)
            offsets = grid.nodes * sigma
            weights = grid.weights.copy()
        else:
            rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, call_index)))
            half = sigma * rng.standard_normal((cfg.samples, dim))
            offsets = np.concatenate([half, -half, np.zeros((1, dim))])
            weights = np.concatenate(
                [np.full(cfg.samples, 1.0 / cfg.samples), np.zeros(cfg.samples + 1)]
            )
        self.dim = dim
        self.sigma = sigma
        self.offsets = offsets
        self.weights = weights
        self.pair = self._pair_index(offsets)
        center = np.flatnonzero(np.all(offsets == 0.0, axis=1))
        if len(center) != 1:
            raise QuadratureError("plan requires exactly one zero offset")
        self.center = int(center[0])
        # combination coefficient tables
        self.c_first = weights[:, None] * offsets / (2.0 * sigma**2)
        self.c_second = weights[:, None] * (offsets**2 - sigma**2) / (2.0 * sigma**4)
        self.c_lap = weights * (np.sum(offsets**2, axis=1) - sigma**2 * dim) / (2.0 * sigma**4)

    @staticmethod
    def _pair_index(offsets: np.ndarray) -> np.ndarray:
        normalized = offsets + 0.0  # maps -0.0 to +0.0 so byte keys match
        lookup = {normalized[j].tobytes(): j for j in range(len(offsets))}
        pair = np.empty(len(offsets), dtype=np.intp)
        for j in range(len(offsets)):
            try:
                pair[j] = lookup[(-offsets[j] + 0.0).tobytes()]
            except KeyError:  # pragma: no cover - node sets are symmetric by construction
                raise QuadratureError("offset set is not symmetric")
        return pair

    @property
    def n_queries(self) -> int:
        return len(self.weights)

    def eval_points(self, x: np.ndarray) -> np.ndarray:
        """All evaluation points for a (P, dim) batch of centers: shape (P*n, dim)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (x[:, None, :] + self.offsets[None, :, :]).reshape(-1, self.dim)

    def combine(self, values: np.ndarray, which: Sequence[str]) -> dict[str, np.ndarray]:
        """Combine model outputs at eval_points into the requested estimators.

        ``values`` has shape (P*n, ...) matching eval_points; returns arrays with
        leading axis P ('value', 'first' adds a dim axis, 'second' adds a dim
        axis, 'laplacian' is scalar per point).
        """
        n = self.n_queries
        vals = np.asarray(values, dtype=float)
        extra = vals.shape[1:]
        v = vals.reshape(-1, n, *extra)
        v_neg = v[:, self.pair]
        out: dict[str, np.ndarray] = {}
        if "value" in which:
            out["value"] = 0.5 * np.tensordot(v + v_neg, self.weights, axes=(1, 0))
        if "first" in which:
            # (P, n, ...) x (n, D) -> (P, D, ...)
            out["first"] = np.einsum("pn...,nd->pd...", v - v_neg, self.c_first)
        if "second" in which or "laplacian" in which:
            centered = v + v_neg - 2.0 * v[:, self.center : self.center + 1]
            if "second" in which:
                out["second"] = np.einsum("pn...,nd->pd...", centered, self.c_second)
            if "laplacian" in which:
                out["laplacian"] = np.tensordot(centered, self.c_lap, axes=(1, 0))
        return out


def _plan(cfg: SteinConfig, dim: int, call_index: int) -> SteinPlan:
    return SteinPlan(cfg, dim, call_index)


def _run(net, x, cfg, which, call_index):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    plan = _plan(cfg, pts.shape[1], call_index)
    values = np.asarray(net(plan.eval_points(pts)), dtype=float)
    out = plan.combine(values, which)
    if single:
        out = {k: v[0] for k, v in out.items()}
    return out


def smoothed_forward(net, x, cfg: SteinConfig, call_index: int = 0) -> np.ndarray:
    """E[f(x + delta)] under delta ~ N(0, sigma^2 I), by grid sum or MC average."""
    return _run(net, x, cfg, ("value",), call_index)["value"]


def stein_first(net, x, cfg: SteinConfig, call_index: int = 0) -> np.ndarray:
    """Gradient of the smoothed model at x (shape (dim,) for scalar nets)."""
    return _run(net, x, cfg, ("first",), call_index)["first"]


def stein_second_diag(net, x, cfg: SteinConfig, call_index: int = 0) -> np.ndarray:
    """Per-coordinate second derivatives of the smoothed model at x."""
    return _run(net, x, cfg, ("second",), call_index)["second"]


def stein_laplacian(net, x, cfg: SteinConfig, call_index: int = 0) -> np.ndarray:
    """Laplacian of the smoothed model at x; equals the sum of the diagonal estimator."""
    return _run(net, x, cfg, ("laplacian",), call_index)["laplacian"]
