"""Final states, the projection-induced matter -> outgoing-radiation map, and
escape fidelities.

Conventions
-----------
A bipartite state on ``matter (x) in`` is stored as its coefficient matrix
``coeffs[m, k]`` (amplitude on ``|m>_matter |k>_in``). Incoming and outgoing
radiation share the index ``j`` of the maximally entangled pair
``sum_j |j>_in |j>_out / sqrt(N)``.

Projecting ``U(|m>_matter (x) pair)`` onto ``<final|`` gives::

    T_raw[j, m] = <final| U (|m> (x) |j>) / sqrt(N) = conj(psi[m, j]) / sqrt(N)

with ``psi = U^dagger |final>`` the post-interaction state. So
``T_tilde = sqrt(N) T_raw = psi^dagger`` has unit Frobenius norm and singular
values equal to the Schmidt coefficients of ``psi``. For the Horowitz-Maldacena
state built from ``S`` and no interaction, ``N * T_raw = S^dagger``: the
renormalized channel is the unitary ``S^dagger`` in this basis convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .stats import SchmidtSpectrum, ZERO_LAMBDA, schmidt_spectrum

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
ANNIHILATION_TOL = 1e-14
# explicit N^2 x N^2 interaction unitaries beyond this are refused
EXPLICIT_U_MAX_DIM = 64


class AnnihilatedInputError(ValueError):
    """The input lives entirely on vanishing Schmidt coefficients."""

    def __init__(self, pre_norm):
        super().__init__(f"state annihilated by projection (pre-norm {pre_norm:.3e})")
        self.pre_norm = pre_norm


@dataclass(frozen=True)
class BipartitePureState:
    coeffs: np.ndarray

    def __post_init__(self):
        c = linalg.as_matrix(self.coeffs)
        norm = np.linalg.norm(c)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        object.__setattr__(self, "coeffs", c)

    @property
    def dim_a(self):
        return self.coeffs.shape[0]

    @property
    def dim_b(self):
        return self.coeffs.shape[1]

    def vector(self):
        return self.coeffs.reshape(-1)

    @classmethod
    def from_vector(cls, vec, dim_a, dim_b):
        return cls(np.asarray(vec, dtype=np.complex128).reshape(dim_a, dim_b))


@dataclass(frozen=True)
class InputState:
    """Matter input written in a channel's matter Schmidt basis."""
    amplitudes: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if abs(np.linalg.norm(mu) - 1.0) > NORM_TOL:
            raise ValueError("input amplitudes must have unit norm")
        object.__setattr__(self, "amplitudes", mu)

    @property
    def dim(self):
        return self.amplitudes.size

    @classmethod
    def from_matter_vector(cls, ch: "ProjectionChannel", vec):
        """Convert a computational-basis matter vector to Schmidt coordinates."""
        return cls(ch.spectrum.basis_a.conj().T @ np.asarray(vec, dtype=np.complex128))


@dataclass(frozen=True)
class ProjectionChannel:
    n: int
    t_raw: np.ndarray
    spectrum: SchmidtSpectrum
    t_prime: np.ndarray | None

    @property
    def t_tilde(self):
        return math.sqrt(self.n) * self.t_raw

    @property
    def lambdas(self):
        return self.spectrum.lambdas

    @property
    def out_basis(self):
        """Columns |l>'_out; T_tilde maps basis_a[:, l] to lambda_l * out_basis[:, l]."""
        return self.spectrum.basis_b.conj()

    def normalized(self):
        """N * T_raw; unitary exactly when the post-interaction state is maximally entangled."""
        return self.n * self.t_raw


def maximally_entangled(n: int) -> BipartitePureState:
    if n < 1:
        raise ValueError("N must be >= 1")
    return BipartitePureState(np.eye(n, dtype=np.complex128) / math.sqrt(n))


def hm_final_state(s) -> BipartitePureState:
    s = linalg.as_matrix(s)
    if s.shape[0] != s.shape[1] or not linalg.is_unitary(s, UNITARY_TOL):
        raise ValueError("Horowitz-Maldacena state needs a unitary S")
    return BipartitePureState(s / math.sqrt(s.shape[0]))


def product_final_state(a_vec, b_vec) -> BipartitePureState:
    a = np.asarray(a_vec, dtype=np.complex128).ravel()
    b = np.asarray(b_vec, dtype=np.complex128).ravel()
    for v in (a, b):
        nv = np.linalg.norm(v)
        if nv == 0.0:
            raise ValueError("product factors must be nonzero")
        if abs(nv - 1.0) > NORM_TOL:
            raise ValueError("product factors must have unit norm")
    return BipartitePureState(np.outer(a, b))


def _check_interaction(final, u):
    u = linalg.as_matrix(u)
    d = final.dim_a * final.dim_b
    if u.shape != (d, d):
        raise ValueError(f"interaction must be {d}x{d}, got {u.shape}")
    if not linalg.is_unitary(u, UNITARY_TOL):
        raise ValueError("interaction is not unitary")
    return u


def post_interaction_state(final: BipartitePureState, u=None) -> BipartitePureState:
    """U^dagger |final>, the state whose bra the projection effectively applies."""
    if u is None:
        return final
    u = _check_interaction(final, u)
    return BipartitePureState.from_vector(u.conj().T @ final.vector(), final.dim_a, final.dim_b)


def _build_channel(n, t_raw, psi):
    spec = schmidt_spectrum(psi)
    lam = spec.lambdas
    t_prime = None
    if lam[-1] > linalg.RANK_TOL * lam[0]:
        t_prime = spec.basis_b.conj() @ spec.basis_a.conj().T
    return ProjectionChannel(n, t_raw, spec, t_prime)


def channel_from_random_state(psi: BipartitePureState) -> ProjectionChannel:
    """Channel induced by projecting onto ``psi`` directly (no explicit U)."""
    if psi.dim_a != psi.dim_b:
        raise ValueError("matter and incoming radiation must have equal dimension")
    n = psi.dim_a
    return _build_channel(n, psi.coeffs.conj().T / math.sqrt(n), psi)


def channel_from_final_state(final: BipartitePureState, u=None, n=None) -> ProjectionChannel:
    """Channel for projection onto ``final`` after interaction ``u`` (None = identity).

    T_raw is read off the bra ``<final| U`` reshaped over (matter, in); the
    N^3-dimensional tripartite state is never formed.
    """
    if final.dim_a != final.dim_b or (n is not None and final.dim_a != n):
        raise ValueError("final state must be N x N")
    n = final.dim_a
    if u is not None and n > EXPLICIT_U_MAX_DIM:
        raise ValueError(f"explicit interaction unitaries are capped at N <= {EXPLICIT_U_MAX_DIM}")
    bra = final.vector().conj()
    if u is not None:
        bra = bra @ _check_interaction(final, u)
    # bra[m * N + j] = <final| U |m, j>
    t_raw = bra.reshape(n, n).T / math.sqrt(n)
    psi = BipartitePureState(bra.conj().reshape(n, n))
    return _build_channel(n, t_raw, psi)


def channel_from_spectrum(lambdas) -> ProjectionChannel:
    """Channel whose post-interaction state is diagonal with the given coefficients."""
    spec = SchmidtSpectrum.from_lambdas(lambdas)
    return channel_from_random_state(BipartitePureState(spec.coefficient_matrix()))


def apply_channel(ch: ProjectionChannel, mu: InputState):
    """Returns (normalized outgoing vector, norm before renormalization)."""
    if mu.dim != ch.n:
        raise ValueError(f"input dimension {mu.dim} does not match channel N={ch.n}")
    raw = ch.t_raw @ (ch.spectrum.basis_a @ mu.amplitudes)
    pre_norm = float(np.linalg.norm(raw))
    if pre_norm < ANNIHILATION_TOL:
        raise AnnihilatedInputError(pre_norm)
    return raw / pre_norm, pre_norm


def fidelity_from_weights(lambdas, weights):
    """Exact renormalized overlap (sum l w)^2 / (sum l^2 w) for weights w = |mu|^2.

    Works row-wise on a 2-d ``weights`` array. Zero denominators give NaN.
    """
    lam = np.asarray(lambdas, dtype=float)
    w = np.asarray(weights, dtype=float)
    num = (w @ lam) ** 2
    den = w @ (lam ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, np.nan)


def escape_fidelity(ch: ProjectionChannel, mu: InputState) -> float:
    # raises for annihilated inputs
    apply_channel(ch, mu)
    return float(fidelity_from_weights(ch.lambdas, np.abs(mu.amplitudes) ** 2))


def overlap_fidelity(ch: ProjectionChannel, mu: InputState) -> float:
    """|<out|T' mu>|^2 built from the actual vectors (the slow, literal route)."""
    if ch.t_prime is None:
        raise linalg.RankDeficientError("channel has no polar unitary (rank deficient)")
    out, _ = apply_channel(ch, mu)
    target = ch.t_prime @ (ch.spectrum.basis_a @ mu.amplitudes)
    return float(abs(np.vdot(out, target)) ** 2)


def typical_fidelity_estimate(ch: ProjectionChannel) -> float:
    return (float(np.sum(ch.lambdas)) / math.sqrt(ch.n)) ** 2


def overlap_approximation(ch: ProjectionChannel, mu: InputState) -> float:
    """(sqrt(N) sum_l lambda_l |mu_l|^2)^2; only close to the exact overlap for
    typical inputs with |mu_l|^2 ~ 1/N and can exceed 1 otherwise."""
    w = np.abs(mu.amplitudes) ** 2
    return (math.sqrt(ch.n) * float(w @ ch.lambdas)) ** 2


def process_fidelity(v, w) -> float:
    """|Tr(W^dagger V)|^2 / d^2 between two d x d unitaries."""
    v, w = linalg.as_matrix(v), linalg.as_matrix(w)
    d = v.shape[0]
    return float(abs(np.trace(w.conj().T @ v)) ** 2) / d ** 2


def is_annihilating(ch: ProjectionChannel, symbol: int) -> bool:
    return ch.lambdas[symbol] <= ZERO_LAMBDA
