"""Schmidt spectra, entanglement measures and closed-form ensemble oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg

ZERO_LAMBDA = 1e-14
LN2 = math.log(2.0)


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Descending Schmidt coefficients with the paired bases.

    The state is ``sum_l lambdas[l] * basis_a[:, l] (x) basis_b[:, l]``; note
    the B vectors enter without conjugation, so the coefficient matrix equals
    ``basis_a @ diag(lambdas) @ basis_b.T``.
    """
    lambdas: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    def coefficient_matrix(self):
        return (self.basis_a * self.lambdas) @ self.basis_b.T

    @property
    def rank(self):
        return int(np.count_nonzero(self.lambdas > ZERO_LAMBDA))

    @classmethod
    def from_lambdas(cls, lambdas):
        """Spectrum in the computational bases; handy for hand-built channels."""
        lam = np.sort(np.asarray(lambdas, dtype=float))[::-1]
        if np.any(lam < 0):
            raise ValueError("Schmidt coefficients must be nonnegative")
        if abs(float(np.sum(lam ** 2)) - 1.0) > 1e-12:
            raise ValueError("Schmidt coefficients must satisfy sum(lambda^2) = 1")
        eye = np.eye(lam.size, dtype=np.complex128)
        return cls(lam, eye, eye.copy())


def schmidt_spectrum(state) -> SchmidtSpectrum:
    coeffs = getattr(state, "coeffs", state)
    res = linalg.svd(coeffs)
    lam = np.clip(res.singular_values, 0.0, None)
    return SchmidtSpectrum(lam, res.left, res.right_adjoint.T)


def schmidt_coefficients(state) -> np.ndarray:
    """Only the lambdas (skips the bases; what the Monte Carlo loops need)."""
    coeffs = getattr(state, "coeffs", state)
    return np.clip(linalg.singular_values(coeffs), 0.0, None)


def _lambdas(s):
    return np.asarray(getattr(s, "lambdas", s), dtype=float)


def entanglement_entropy_bits(s) -> float:
    p = _lambdas(s) ** 2
    p = p[_lambdas(s) > ZERO_LAMBDA]
    return float(-np.sum(p * np.log2(p))) + 0.0


def purity(s) -> float:
    """sum_l (lambda_l^2)^2, the purity of either reduced state."""
    return float(np.sum(_lambdas(s) ** 4))


def trace_norm_sum(s) -> float:
    return float(np.sum(_lambdas(s)))


def banaszek_fidelity(s, n: int) -> float:
    """Best mean teleportation fidelity with the given imperfect resource."""
    lam = _lambdas(s)
    if lam.size > n:
        raise ValueError(f"spectrum has {lam.size} coefficients, more than N={n}")
    return (1.0 + float(np.sum(lam)) ** 2) / (n + 1)


def page_entropy_exact(m: int, n: int) -> float:
    """Mean entanglement entropy (bits) of a random pure state on C^m (x) C^n."""
    if m < 1 or n < 1:
        raise ValueError("dimensions must be >= 1")
    if m > n:
        m, n = n, m
    harmonic = math.fsum(1.0 / k for k in range(n + 1, m * n + 1))
    return (harmonic - (m - 1) / (2.0 * n)) / LN2


def page_entropy_exact_nats(m: int, n: int) -> float:
    return page_entropy_exact(m, n) * LN2


def page_deficit_limit_bits() -> float:
    """Large-N gap between log2 N and the square-case Page entropy: 1/2 nat."""
    return 0.5 / LN2


def lubkin_purity_exact(m: int, n: int) -> float:
    if m < 1 or n < 1:
        raise ValueError("dimensions must be >= 1")
    return (m + n) / (m * n + 1)


def trace_norm_constant() -> float:
    # Gamma(2) / (Gamma(3/2) Gamma(5/2)) = 1 / ((sqrt(pi)/2)(3 sqrt(pi)/4))
    return math.gamma(2.0) / (math.gamma(1.5) * math.gamma(2.5))


def asymptotic_mean_trace_norm(n: int) -> float:
    if n < 1:
        raise ValueError("N must be >= 1")
    return trace_norm_constant() * math.sqrt(n)


def asymptotic_fidelity() -> float:
    """Large-N mean escape fidelity, the squared trace-norm constant: 64/(9 pi^2)."""
    return trace_norm_constant() ** 2


def printed_fidelity_value() -> float:
    """The unsquared constant 8/(3 pi) = 0.8488, the other candidate for '.85'."""
    return trace_norm_constant()


def ideal_transfer_oracles() -> dict:
    """Exact values for a perfectly entangled (unitary) channel and for classical
    decoding with all Schmidt coefficients nonzero."""
    return {"process_fidelity": 1.0, "unitarity_defect": 0.0, "classical_success": 1.0}


def ks_statistic(x, y) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_x - F_y|."""
    x = np.sort(np.asarray(x, dtype=float).ravel())
    y = np.sort(np.asarray(y, dtype=float).ravel())
    if x.size == 0 or y.size == 0:
        raise ValueError("KS statistic needs two nonempty samples")
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def ks_critical_value(n1: int, n2: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value c(alpha) sqrt((n1+n2)/(n1 n2))."""
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n1 + n2) / (n1 * n2))
