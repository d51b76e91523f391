"""MZI rotator meshes: planar rotations in rectangular (Clements) arrangement.

A size-n mesh carries n(n-1)/2 programmable rotators.  Placements are listed
stage by stage: stage s couples waveguide pairs (i, i+1) with i = s mod 2,
s mod 2 + 2, ...  The realized matrix is

    U(phases) = diag(D) * S_{n-1} * ... * S_1 * S_0,

where S_s applies the stage's disjoint 2x2 rotations

    R(phi) = [[cos phi, sin phi], [-sin phi, cos phi]].

All rotations are real, so U is orthogonal for every phase setting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["mzi_rotation", "MziMesh", "clements_placements"]


def mzi_rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def clements_placements(n: int) -> list[tuple[int, int, int]]:
    """(i, j, stage) triples in rectangular order; exactly n(n-1)/2 of them."""
    out = []
    for stage in range(n):
        i = stage % 2
        while i + 1 < n:
            out.append((i, i + 1, stage))
            i += 2
    # n stages of alternating parity hold exactly n(n-1)/2 couplings
    return out


@dataclass
class MziMesh:
    """size-n rotator mesh; `phases[k]` drives `placements[k]`."""

    size: int
    phases: np.ndarray
    diagonal: np.ndarray | None = None  # sign/phase screen, defaults to +1
    placements: list = field(default=None)

    def __post_init__(self):
        if self.placements is None:
            self.placements = clements_placements(self.size)
        want = self.size * (self.size - 1) // 2
        if len(self.placements) != want:
            raise ValueError(f"universal size-{self.size} mesh needs {want} rotators")
        self.phases = np.asarray(self.phases, dtype=float)
        if self.phases.shape != (want,):
            raise ValueError(f"expected {want} phases, got {self.phases.shape}")
        if self.diagonal is None:
            self.diagonal = np.ones(self.size)

    @classmethod
    def random(cls, size: int, rng: np.random.Generator) -> "MziMesh":
        n_rot = size * (size - 1) // 2
        return cls(size=size, phases=rng.uniform(0.0, 2.0 * np.pi, size=n_rot))

    @property
    def n_rotators(self) -> int:
        return len(self.phases)

    def stage_of(self, k: int) -> int:
        return self.placements[k][2]

    def matrix(self, phases: np.ndarray | None = None) -> np.ndarray:
        """Realized orthogonal matrix for the given (or stored) phases."""
        phases = self.phases if phases is None else np.asarray(phases, dtype=float)
        u = np.eye(self.size)
        c = np.cos(phases)
        s = np.sin(phases)
        for k, (i, j, _) in enumerate(self.placements):
            # left-multiply by the rotation acting on rows (i, j)
            ri = c[k] * u[i] + s[k] * u[j]
            rj = -s[k] * u[i] + c[k] * u[j]
            u[i] = ri
            u[j] = rj
        return self.diagonal[:, None] * u
