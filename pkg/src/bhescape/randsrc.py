"""Seedable random sources: Ginibre matrices, Haar unitaries, random pure states.

Every stream is a Philox counter-based generator keyed by ``(seed, stream_id)``,
so trial ``i`` of a campaign can be drawn independently of every other trial.
Gaussians come from Box-Muller on the raw uniform stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg

_MASK64 = (1 << 64) - 1
# phase-fix guard for an exactly vanishing R diagonal (probability zero)
_TINY = 1e-300


@dataclass
class RngStream:
    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        key = self.seed | (self.stream_id << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, size=None):
        """Uniforms on the half-open interval (0, 1]."""
        return 1.0 - self._gen.random(size)

    def integers(self, high):
        return int(self._gen.integers(high))


def complex_normal(shape, rng: RngStream) -> np.ndarray:
    """I.i.d. complex normals with E|z|^2 = 1 (Re, Im each N(0, 1/2))."""
    u1 = rng.uniform(shape)
    u2 = rng.uniform(shape)
    # Box-Muller pair (r cos, r sin) with each component scaled by 1/sqrt(2)
    radius = np.sqrt(-np.log(u1))
    return radius * np.exp(2j * np.pi * u2)


def ginibre(rows: int, cols: int, rng: RngStream) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError(f"ginibre dimensions must be >= 1, got {rows}x{cols}")
    return complex_normal((rows, cols), rng)


def haar_unitary(dim: int, rng: RngStream, method=None) -> np.ndarray:
    """Haar-distributed unitary from QR of a Ginibre matrix with R-phase fix."""
    z = ginibre(dim, dim, rng)
    q, r = linalg.qr_decompose(z, method=method)
    d = np.diagonal(r).copy()
    d[d == 0] = _TINY
    return q * (d / np.abs(d))


def random_unit_vector(dim: int, rng: RngStream) -> np.ndarray:
    v = ginibre(dim, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def random_pure_state(dim_a: int, dim_b: int, rng: RngStream):
    """Hilbert-Schmidt random state: normalized Ginibre coefficient matrix."""
    from .finalstate import BipartitePureState

    g = ginibre(dim_a, dim_b, rng)
    return BipartitePureState(g / np.linalg.norm(g))
