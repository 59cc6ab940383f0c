"""Pseudorandom states from brickwork circuits of Haar-random two-qubit gates.

Qubits sit on a ring ordered A_0..A_{n-1}, B_0..B_{n-1}. Even layers couple
(0,1), (2,3), ...; odd layers couple (1,2), (3,4), ..., (2n-1, 0), so every
layer holds n gates and entanglement crosses the A|B cut at both the middle
bond and the wrap-around bond.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import randsrc, stats
from .finalstate import BipartitePureState

MAX_TOTAL_QUBITS = 20


@dataclass(frozen=True)
class CircuitSpec:
    n_qubits: int
    depth: int
    pairing: str = "brickwork"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.pairing != "brickwork":
            raise ValueError(f"unknown pairing rule {self.pairing!r}")

    @property
    def total_qubits(self):
        return 2 * self.n_qubits

    @property
    def dim(self):
        return 2 ** self.n_qubits

    def layer_pairs(self, layer):
        q = self.total_qubits
        if q == 2:
            return [(0, 1)]
        start = layer % 2
        return [(i % q, (i + 1) % q) for i in range(start, q + start - 1, 2)]

    @property
    def gate_count(self):
        return self.depth * (self.total_qubits // 2)


def apply_two_qubit_gate(psi, gate, i, j):
    """Apply a 4x4 gate to qubits (i, j) of a state tensor of shape (2,)*q."""
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, psi, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def pseudorandom_state(spec: CircuitSpec, rng: randsrc.RngStream, initial=None) -> BipartitePureState:
    """Run the circuit on ``initial`` (default |0...0>) and cut it down the middle."""
    q = spec.total_qubits
    if q > MAX_TOTAL_QUBITS:
        raise ValueError(f"circuit has {q} qubits, cap is {MAX_TOTAL_QUBITS}")
    if initial is None:
        psi = np.zeros(2 ** q, dtype=np.complex128)
        psi[0] = 1.0
    else:
        psi = np.asarray(getattr(initial, "coeffs", initial), dtype=np.complex128).reshape(-1)
    psi = psi.reshape((2,) * q)
    for layer in range(spec.depth):
        for i, j in spec.layer_pairs(layer):
            psi = apply_two_qubit_gate(psi, randsrc.haar_unitary(4, rng), i, j)
    coeffs = psi.reshape(spec.dim, spec.dim)
    # renormalize away accumulated round-off
    return BipartitePureState(coeffs / np.linalg.norm(coeffs))


def squared_schmidt_pool(samples):
    """Concatenate lambda^2 of every sample (states or lambda arrays)."""
    pools = []
    for s in samples:
        lam = s if isinstance(s, np.ndarray) and s.ndim == 1 else stats.schmidt_coefficients(s)
        pools.append(np.asarray(lam) ** 2)
    return np.concatenate(pools)


def ensemble_distance(circuit_samples, haar_samples) -> float:
    """KS statistic between pooled squared Schmidt coefficients of two ensembles."""
    if len(circuit_samples) == 0 or len(haar_samples) == 0:
        raise ValueError("both ensembles must be nonempty")
    a = squared_schmidt_pool(circuit_samples)
    b = squared_schmidt_pool(haar_samples)
    if a.size // len(circuit_samples) != b.size // len(haar_samples):
        raise ValueError("ensembles have different dimensions")
    return stats.ks_statistic(a, b)
