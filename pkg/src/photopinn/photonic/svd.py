"""SVD-parameterized matrix blocks: W = U * Sigma * V^T in phases.

U and V are square rotator meshes (sizes m and n for an m x n block);
Sigma is a bank of min(m, n) attenuator phases realizing singular values
s * cos(phi) within [-s, s], where s is a fixed per-block scale chosen at
construction.  Rectangular blocks truncate or zero-pad between the two mesh
sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import MziMesh

__all__ = ["SvdBlock", "svd_forward", "block_partitioned_layer", "block_assemble"]


@dataclass
class SvdBlock:
    u_mesh: MziMesh
    sigma_phases: np.ndarray  # min(m, n) attenuator phases
    v_mesh: MziMesh
    scale: float = 1.0

    def __post_init__(self):
        self.sigma_phases = np.asarray(self.sigma_phases, dtype=float)
        want = min(self.u_mesh.size, self.v_mesh.size)
        if self.sigma_phases.shape != (want,):
            raise ValueError(f"expected {want} sigma phases")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u_mesh.size, self.v_mesh.size)

    @classmethod
    def random(cls, m: int, n: int, scale: float, rng: np.random.Generator) -> "SvdBlock":
        return cls(
            u_mesh=MziMesh.random(m, rng),
            sigma_phases=rng.uniform(0.0, 2.0 * np.pi, size=min(m, n)),
            v_mesh=MziMesh.random(n, rng),
            scale=scale,
        )

    def n_phases(self) -> int:
        return self.u_mesh.n_rotators + len(self.sigma_phases) + self.v_mesh.n_rotators

    def matrix(self, phases: np.ndarray | None = None) -> np.ndarray:
        """Realized m x n matrix; `phases` optionally overrides the stored ones
        as the concatenation (U phases, sigma phases, V phases)."""
        if phases is None:
            pu, ps, pv = None, self.sigma_phases, None
        else:
            nu = self.u_mesh.n_rotators
            ns = len(self.sigma_phases)
            pu = phases[:nu]
            ps = phases[nu : nu + ns]
            pv = phases[nu + ns :]
        m, n = self.shape
        u = self.u_mesh.matrix(pu)
        v = self.v_mesh.matrix(pv)
        sig = np.zeros((m, n))
        k = min(m, n)
        sig[np.arange(k), np.arange(k)] = self.scale * np.cos(ps)
        return u @ sig @ v


def svd_forward(block: SvdBlock, x: np.ndarray) -> np.ndarray:
    """Apply the block to x (length n, or batch (B, n)) -> length m."""
    m, n = block.shape
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != n:
        raise ValueError(f"input length {xb.shape[1]} != block cols {n}")
    t = xb @ block.v_mesh.matrix().T
    k = min(m, n)
    mid = np.zeros((xb.shape[0], m))
    mid[:, :k] = t[:, :k] * (block.scale * np.cos(block.sigma_phases))
    out = mid @ block.u_mesh.matrix().T
    return out[0] if single else out


def block_partitioned_layer(M: int, N: int, k: int, scale: float, rng: np.random.Generator):
    """ceil(M/k) x ceil(N/k) grid of k x k SVD blocks covering an M x N matrix."""
    if k < 2:
        raise ValueError("block size must be >= 2")
    P = -(-M // k)
    Q = -(-N // k)
    return [[SvdBlock.random(k, k, scale, rng) for _ in range(Q)] for _ in range(P)]


def block_assemble(blocks, M: int, N: int) -> np.ndarray:
    """Dense M x N matrix from the block grid (zero padding trimmed)."""
    P, Q = len(blocks), len(blocks[0])
    k = blocks[0][0].shape[0]
    out = np.zeros((P * k, Q * k))
    for p in range(P):
        for q in range(Q):
            out[p * k : (p + 1) * k, q * k : (q + 1) * k] = blocks[p][q].matrix()
    return out[:M, :N]
