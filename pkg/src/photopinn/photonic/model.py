"""Phase-parameterized networks: every weight matrix realized by MZI phases.

Dense layers become ceil(M/k) x ceil(N/k) grids of k x k SVD blocks (k = 8);
tensor-train layers realize each core unfolding (r_k-1 * m_k) x (n_k * r_k)
as one rectangular SVD block, reshaped back into the 4-way core for the usual
TT contraction.  Biases stay digital.  The trainable store is the flat vector
(all phases, layer by layer, then that layer's bias), matching the weight
models' segment interface so the same optimizer drives both domains.

Crosstalk adjacency: rotators that are neighbors within the same stage of the
same mesh couple with the model's coefficient; attenuator phases and
cross-mesh pairs do not couple.
"""

from __future__ import annotations

import numpy as np

from ..nets import _ACTIVATIONS
from ..tensortrain import TTCores, TTLayout, tt_forward
from .mesh import MziMesh
from .noise import FrozenNoise, NoiseModel, apply_nonidealities
from .svd import SvdBlock, block_assemble

__all__ = ["PhotonicDense", "PhotonicTT", "PhotonicMlp", "DENSE_BLOCK_SIZE"]

DENSE_BLOCK_SIZE = 8


def _mesh_pairs(mesh: MziMesh, offset: int) -> list[tuple[int, int]]:
    """Index pairs of stage-adjacent rotators, shifted by the mesh's offset."""
    by_stage: dict[int, list[int]] = {}
    for k, (i, _, stage) in enumerate(mesh.placements):
        by_stage.setdefault(stage, []).append(k)
    pairs = []
    for ks in by_stage.values():
        for a, b in zip(ks[:-1], ks[1:]):
            pairs.append((offset + a, offset + b))
    return pairs


def _block_pairs(block: SvdBlock, offset: int) -> list[tuple[int, int]]:
    pairs = _mesh_pairs(block.u_mesh, offset)
    v_off = offset + block.u_mesh.n_rotators + len(block.sigma_phases)
    pairs += _mesh_pairs(block.v_mesh, v_off)
    return pairs


def _block_get(block: SvdBlock) -> np.ndarray:
    return np.concatenate([block.u_mesh.phases, block.sigma_phases, block.v_mesh.phases])


def _block_set(block: SvdBlock, phases: np.ndarray) -> None:
    nu = block.u_mesh.n_rotators
    ns = len(block.sigma_phases)
    block.u_mesh.phases = phases[:nu]
    block.sigma_phases = phases[nu : nu + ns]
    block.v_mesh.phases = phases[nu + ns :]


class PhotonicDense:
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, block: int = DENSE_BLOCK_SIZE):
        self.n_in = n_in
        self.n_out = n_out
        self.block = block
        scale = _sigma_scale(block, block, np.sqrt(2.0 / (n_in + n_out)))
        self.rows = -(-n_out // block)
        self.cols = -(-n_in // block)
        self.blocks = [
            [SvdBlock.random(block, block, scale, rng) for _ in range(self.cols)]
            for _ in range(self.rows)
        ]
        self.bias = np.zeros(n_out)

    def flat_blocks(self):
        return [b for row in self.blocks for b in row]

    def realized_weight(self, phase_map) -> np.ndarray:
        mats = [[blk.matrix(phase_map(blk)) for blk in row] for row in self.blocks]
        k = self.block
        out = np.zeros((self.rows * k, self.cols * k))
        for p, row in enumerate(mats):
            for q, m in enumerate(row):
                out[p * k : (p + 1) * k, q * k : (q + 1) * k] = m
        return out[: self.n_out, : self.n_in]


class PhotonicTT:
    def __init__(self, layout: TTLayout, rng: np.random.Generator, target_std: float | None = None):
        self.layout = layout
        if target_std is None:
            target_std = (2.0 / (layout.rows + layout.cols)) ** 0.5
        per_core = (target_std**2 / np.prod(layout.ranks)) ** (1.0 / (2 * layout.L))
        self.blocks = []
        for k in range(layout.L):
            r0, m, n, r1 = layout.core_shape(k)
            self.blocks.append(SvdBlock.random(r0 * m, n * r1, _sigma_scale(r0 * m, n * r1, per_core), rng))
        self.n_in = layout.cols
        self.n_out = layout.rows
        self.bias = np.zeros(layout.rows)

    def flat_blocks(self):
        return self.blocks

    def realized_cores(self, phase_map) -> TTCores:
        cores = []
        for k, blk in enumerate(self.blocks):
            r0, m, n, r1 = self.layout.core_shape(k)
            cores.append(blk.matrix(phase_map(blk)).reshape(r0, m, n, r1))
        return TTCores(self.layout, cores)


def _sigma_scale(a: int, b: int, entry_std: float) -> float:
    # W = U diag(s cos phi) V^T with Haar-ish U, V: entry variance is about
    # s^2 E[cos^2] min(a,b) / (a b); solve for s given the target entry std.
    return float(entry_std * np.sqrt(2.0 * a * b / min(a, b)))


class PhotonicMlp:
    """Phase-domain twin of TensorizedMlp; same call/segment interface."""

    def __init__(
        self,
        layers: list,
        activation: str = "tanh",
        noise: NoiseModel | None = None,
        input_shift: np.ndarray | None = None,
        input_scale: np.ndarray | None = None,
        output_scale: float = 1.0,
    ):
        self.layers = layers
        self.activation = activation
        self.noise = noise if noise is not None else NoiseModel.disabled()
        dim = layers[0].n_in
        self.input_shift = np.zeros(dim) if input_shift is None else np.asarray(input_shift, float)
        self.input_scale = np.ones(dim) if input_scale is None else np.asarray(input_scale, float)
        self.output_scale = float(output_scale)
        self._index_layout()
        self._frozen = self.noise.freeze(self.n_phases)
        self._pairs = self._crosstalk_pairs()

    # -- flat store: per layer, all phases then the bias --------------------

    def _index_layout(self) -> None:
        self._spans = []  # (name, start, stop, kind, layer index)
        pos = 0
        for li, layer in enumerate(self.layers):
            n_ph = sum(b.n_phases() for b in layer.flat_blocks())
            self._spans.append((f"layer{li}.phases", pos, pos + n_ph, "phases", li))
            pos += n_ph
            self._spans.append((f"layer{li}.bias", pos, pos + len(layer.bias), "bias", li))
            pos += len(layer.bias)
        self._dim = pos
        self.n_phases = sum(stop - start for _, start, stop, kind, _ in self._spans if kind == "phases")

    def segments(self):
        return [(name, start, stop) for name, start, stop, _, _ in self._spans]

    @property
    def n_params(self) -> int:
        return self._dim

    def get_flat(self) -> np.ndarray:
        out = np.empty(self._dim)
        for name, start, stop, kind, li in self._spans:
            if kind == "bias":
                out[start:stop] = self.layers[li].bias
            else:
                out[start:stop] = np.concatenate(
                    [_block_get(b) for b in self.layers[li].flat_blocks()]
                )
        return out

    def set_flat(self, theta: np.ndarray) -> None:
        for name, start, stop, kind, li in self._spans:
            if kind == "bias":
                self.layers[li].bias = theta[start:stop].copy()
            else:
                pos = start
                for b in self.layers[li].flat_blocks():
                    n = b.n_phases()
                    _block_set(b, theta[pos : pos + n].copy())
                    pos += n

    def phase_vector(self) -> np.ndarray:
        return np.concatenate([_block_get(b) for layer in self.layers for b in layer.flat_blocks()])

    def _crosstalk_pairs(self) -> np.ndarray:
        pairs = []
        pos = 0
        for layer in self.layers:
            for b in layer.flat_blocks():
                pairs += _block_pairs(b, pos)
                pos += b.n_phases()
        return np.asarray(pairs, dtype=np.intp) if pairs else np.empty((0, 2), dtype=np.intp)

    def effective_phases(self) -> np.ndarray:
        return apply_nonidealities(self.phase_vector(), self.noise, self._pairs, self._frozen)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        eff = self.effective_phases()
        # carve the effective vector back into per-block views
        per_block: dict[int, np.ndarray] = {}
        pos = 0
        for layer in self.layers:
            for b in layer.flat_blocks():
                per_block[id(b)] = eff[pos : pos + b.n_phases()]
                pos += b.n_phases()
        phase_map = lambda blk: per_block[id(blk)]

        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = (np.atleast_2d(x) - self.input_shift) * self.input_scale
        act = _ACTIVATIONS[self.activation]
        for k, layer in enumerate(self.layers):
            if isinstance(layer, PhotonicTT):
                h = tt_forward(layer.realized_cores(phase_map), h)
            else:
                h = h @ layer.realized_weight(phase_map).T
            h = h + layer.bias
            if k < len(self.layers) - 1:
                act(h, out=h)
        if self.output_scale != 1.0:
            h = h * self.output_scale
        if h.shape[1] == 1:
            h = h[:, 0]
        return h[0] if single else h

    def realized_weights(self) -> list[np.ndarray]:
        """Dense effective matrices per layer (noise applied); test oracle hook."""
        eff = self.effective_phases()
        per_block = {}
        pos = 0
        for layer in self.layers:
            for b in layer.flat_blocks():
                per_block[id(b)] = eff[pos : pos + b.n_phases()]
                pos += b.n_phases()
        phase_map = lambda blk: per_block[id(blk)]
        out = []
        for layer in self.layers:
            if isinstance(layer, PhotonicTT):
                from ..tensortrain import tt_reconstruct

                out.append(tt_reconstruct(layer.realized_cores(phase_map)))
            else:
                out.append(layer.realized_weight(phase_map))
        return out
