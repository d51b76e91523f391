"""MZI device counting.

Square N x N SVD realizations need N(N-1)/2 + N + N(N-1)/2 = N^2 devices, a
count independent of any k x k blocking (ceil(M/k) ceil(N/k) blocks of k^2).
Rectangular a x b core meshes are counted as their SVD realization: square
a- and b-meshes plus min(a, b) attenuators.

For tensorized layers, core k has an (r_k-1 m_k) x (n_k r_k) mesh applied to
a contraction batch of prod(n_j, j<k) * prod(m_j, j>k) independent slices; a
space-multiplexed engine with `wavelengths` WDM channels replicates the mesh
h_k = ceil(batch / wavelengths) times.  With 8 wavelengths this reproduces the
published 384 devices for the 128x128 tensorized hidden layer (three 8x8
meshes, h = 2 each).  The published whole-model counts (1,685 / 2,057 / 2,516)
mix in the dense input/output layers under an unstated convention and are
treated as calibration targets only.
"""

from __future__ import annotations

import math

from ..tensortrain import TTLayout

__all__ = [
    "mesh_mzi_count",
    "dense_mzi_count",
    "tt_mzi_count",
    "tt_replication",
    "model_mzi_counts",
]


def mesh_mzi_count(a: int, b: int) -> int:
    """Devices in the SVD realization of an a x b matrix."""
    return a * (a - 1) // 2 + b * (b - 1) // 2 + min(a, b)


def dense_mzi_count(rows: int, cols: int, block: int | None = None) -> int:
    """Blocked dense layer: ceil(M/k) * ceil(N/k) blocks of k^2 devices."""
    if block is None:
        return mesh_mzi_count(rows, cols)
    p = -(-rows // block)
    q = -(-cols // block)
    return p * q * block * block


def tt_replication(layout: TTLayout, wavelengths: int = 8) -> list[int]:
    """Space-multiplex replication h_k = ceil(contraction batch / wavelengths)."""
    out = []
    for k in range(layout.L):
        batch = math.prod(layout.in_factors[:k]) * math.prod(layout.out_factors[k + 1 :])
        out.append(max(1, -(-batch // wavelengths)))
    return out


def tt_mzi_count(layout: TTLayout, replication=None, wavelengths: int | None = None) -> int:
    """Sum over cores of h_k devices for the (r_k-1 m_k) x (n_k r_k) mesh.

    `replication` overrides h_k directly; `wavelengths` derives it from the
    space-multiplexing rule; default is one mesh per core.
    """
    if replication is not None and wavelengths is not None:
        raise ValueError("pass either replication or wavelengths, not both")
    if wavelengths is not None:
        replication = tt_replication(layout, wavelengths)
    if replication is None:
        replication = [1] * layout.L
    if len(replication) != layout.L:
        raise ValueError("need one replication factor per core")
    total = 0
    for k, h in enumerate(replication):
        r0, m, n, r1 = layout.core_shape(k)
        total += h * mesh_mzi_count(r0 * m, n * r1)
    return total


def model_mzi_counts(model) -> list[tuple[str, int]]:
    """Per-layer (name, count) for a weight- or phase-domain model."""
    from ..nets import DenseLayer, TTLayer
    from .model import DENSE_BLOCK_SIZE, PhotonicDense, PhotonicTT

    out = []
    for li, layer in enumerate(model.layers):
        if isinstance(layer, (DenseLayer, PhotonicDense)):
            block = layer.block if isinstance(layer, PhotonicDense) else DENSE_BLOCK_SIZE
            count = dense_mzi_count(layer.n_out, layer.n_in, block)
        elif isinstance(layer, (TTLayer, PhotonicTT)):
            layout = layer.cores.layout if isinstance(layer, TTLayer) else layer.layout
            count = tt_mzi_count(layout)
        else:
            raise TypeError(f"unknown layer type {type(layer)}")
        out.append((f"layer{li}", count))
    return out
