"""Dense complex linear algebra.

Matrices are plain ``numpy`` complex arrays. Two routes exist for the
factorizations: a self-contained one (Householder QR, one-sided Jacobi SVD)
and the LAPACK one that ships with numpy. The Monte Carlo campaigns use
LAPACK for speed; the self-contained routines are kept as an independent
route and are cross-checked against it in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SVD_MAX_SWEEPS = 60
SVD_TOL = 1e-12
RANK_TOL = 1e-12

# "lapack" or "jacobi" / "householder"; switched with set_backend()
_backend = {"svd": "lapack", "qr": "lapack"}


class LinalgError(ValueError):
    pass


class SvdConvergenceError(LinalgError):
    def __init__(self, sweeps, residual):
        super().__init__(
            f"Jacobi SVD did not converge after {sweeps} sweeps "
            f"(relative off-diagonal residual {residual:.3e})")
        self.sweeps = sweeps
        self.residual = residual


class RankDeficientError(LinalgError):
    pass


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    singular_values: np.ndarray
    right_adjoint: np.ndarray

    def reconstruct(self):
        return (self.left * self.singular_values) @ self.right_adjoint


def set_backend(svd=None, qr=None):
    """Select the default factorization routes; returns the previous setting."""
    old = dict(_backend)
    if svd is not None:
        if svd not in ("lapack", "jacobi"):
            raise ValueError(f"unknown svd backend {svd!r}")
        _backend["svd"] = svd
    if qr is not None:
        if qr not in ("lapack", "householder"):
            raise ValueError(f"unknown qr backend {qr!r}")
        _backend["qr"] = qr
    return old


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise LinalgError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def _check_finite(a):
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix has non-finite entries")


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise LinalgError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def unitarity_defect(u) -> float:
    """Frobenius norm of U^dagger U - I."""
    u = as_matrix(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1])))


def is_unitary(u, tol=1e-10) -> bool:
    u = as_matrix(u)
    return u.shape[0] == u.shape[1] and unitarity_defect(u) <= tol


# -- QR ----------------------------------------------------------------------

def householder_qr(a):
    """Unpivoted Householder QR of a square complex matrix."""
    r = as_matrix(a).copy()
    n = r.shape[0]
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 1):
        x = r[k:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        # reflect onto -e^{i arg x0} |x| e1 so that v never cancels
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * norm_x
        v /= np.linalg.norm(v)
        r[k:, :] -= 2.0 * np.outer(v, v.conj() @ r[k:, :])
        q[:, k:] -= 2.0 * np.outer(q[:, k:] @ v, v.conj())
    r = np.triu(r)
    return q, r


def qr_decompose(a, method=None):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise LinalgError(f"qr_decompose needs a non-empty square matrix, got {a.shape}")
    _check_finite(a)
    method = method or _backend["qr"]
    if method == "householder":
        return householder_qr(a)
    if method == "lapack":
        return np.linalg.qr(a)
    raise ValueError(f"unknown qr method {method!r}")


# -- SVD ---------------------------------------------------------------------

def _round_robin(n):
    """Tournament schedule: n-1 rounds of n/2 disjoint column pairs (n even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _complete_basis(cols, m):
    """Extend orthonormal columns (m x k, possibly k=0) to an m x m unitary."""
    basis = [cols[:, j] for j in range(cols.shape[1])]
    for e in np.eye(m, dtype=np.complex128):
        if len(basis) == m:
            break
        v = e.copy()
        for _ in range(2):
            for b in basis:
                v -= (b.conj() @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    return np.stack(basis, axis=1)


def jacobi_svd(a, tol=SVD_TOL, max_sweeps=SVD_MAX_SWEEPS) -> SvdResult:
    """Thin SVD by one-sided (Hestenes) Jacobi rotations.

    Columns are orthogonalized pairwise, with all disjoint pairs of a
    round-robin round rotated at once. A pair is skipped when its normalized
    inner product is below ``tol`` or its Gram entry is below ``tol**2`` times
    the squared Frobenius norm.
    """
    a = as_matrix(a)
    _check_finite(a)
    m, n = a.shape
    if m < n:
        res = jacobi_svd(a.conj().T, tol, max_sweeps)
        return SvdResult(res.right_adjoint.conj().T, res.singular_values,
                         res.left.conj().T)

    work = a.copy()
    v = np.eye(n, dtype=np.complex128)
    fro2 = float(np.vdot(a, a).real)
    n_even = n + (n % 2)
    if n_even > n:
        work = np.hstack([work, np.zeros((m, 1), dtype=np.complex128)])
        v = np.pad(v, ((0, 1), (0, 1)))
    rounds = _round_robin(n_even) if n_even > 1 else []

    residual = 0.0
    for sweep in range(max_sweeps):
        residual = 0.0
        for p, q in rounds:
            ap, aq = work[:, p], work[:, q]
            alpha = np.einsum("ij,ij->j", ap.conj(), ap).real
            beta = np.einsum("ij,ij->j", aq.conj(), aq).real
            gamma = np.einsum("ij,ij->j", ap.conj(), aq)
            mod = np.abs(gamma)
            scale = np.sqrt(alpha * beta)
            with np.errstate(divide="ignore", invalid="ignore"):
                rel = np.where(scale > 0, mod / scale, 0.0)
            significant = mod > tol * tol * fro2
            residual = max(residual, float(rel[significant].max(initial=0.0)))
            active = significant & (rel > tol)
            if not active.any():
                continue
            p, q = p[active], q[active]
            alpha, beta, gamma, mod = alpha[active], beta[active], gamma[active], mod[active]
            phase = gamma / mod
            zeta = (beta - alpha) / (2.0 * mod)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            # J = diag(1, conj(phase)) @ [[c, s], [-s, c]]
            j00, j01 = c, s
            j10, j11 = -s * phase.conj(), c * phase.conj()
            for mat in (work, v):
                xp, xq = mat[:, p], mat[:, q]
                mat[:, p] = xp * j00 + xq * j10
                mat[:, q] = xp * j01 + xq * j11
        if residual <= tol:
            break
    else:
        raise SvdConvergenceError(max_sweeps, residual)

    work, v = work[:, :n], v[:n, :n]
    sv = np.linalg.norm(work, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv, work, v = sv[order], work[:, order], v[:, order]
    cutoff = max(sv[0] if n else 0.0, 0.0) * 1e-15
    keep = sv > cutoff
    left = np.zeros((m, n), dtype=np.complex128)
    left[:, keep] = work[:, keep] / sv[keep]
    if not keep.all():
        k = int(keep.sum())
        sv[~keep] = 0.0
        left[:, k:] = _complete_basis(left[:, :k], m)[:, k:n]
    return SvdResult(left, sv, v.conj().T)


def svd(a, method=None) -> SvdResult:
    """Thin SVD with descending singular values."""
    a = as_matrix(a)
    _check_finite(a)
    method = method or _backend["svd"]
    if method == "jacobi":
        return jacobi_svd(a)
    if method == "lapack":
        u, s, vh = np.linalg.svd(a, full_matrices=False)
        return SvdResult(u, s, vh)
    raise ValueError(f"unknown svd method {method!r}")


def singular_values(a, method=None) -> np.ndarray:
    if (method or _backend["svd"]) == "lapack":
        a = as_matrix(a)
        _check_finite(a)
        return np.linalg.svd(a, compute_uv=False)
    return svd(a, method).singular_values


def polar_unitary(a, method=None) -> np.ndarray:
    """Unitary factor W of A = W P, i.e. left @ right_adjoint."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise LinalgError(f"polar_unitary needs a square matrix, got {a.shape}")
    res = svd(a, method)
    s = res.singular_values
    if s[0] == 0.0 or s[-1] <= RANK_TOL * s[0]:
        raise RankDeficientError(
            f"polar unitary undefined at given tolerance "
            f"(smallest singular value {s[-1]:.3e} <= {RANK_TOL:g} x largest)")
    return res.left @ res.right_adjoint
