"""Hermitian eigen-decomposition by cyclic Jacobi and an SVD built on top of it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .tensor import as_cmat

HERMITIAN_TOL = 1e-10
OFF_DIAG_TOL = 1e-14
MAX_SWEEPS = 100


def _off_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M - np.diag(np.diag(M))))


def hermitian_eig(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and unitary eigenvectors of a hermitian matrix.

    Cyclic Jacobi: every off-diagonal pair ``(p, q)`` is annihilated in turn by
    a phase shift followed by a real plane rotation, sweeping until the
    off-diagonal Frobenius mass is below ``1e-14`` (relative to ``||M||_F``
    when that exceeds one).  Ties in the final ordering keep column order.
    """
    M = as_cmat(M)
    n = M.shape[0]
    if M.shape[1] != n:
        raise ValidationError(f"hermitian_eig needs a square matrix, got {M.shape}")
    if np.max(np.abs(M - M.conj().T)) > HERMITIAN_TOL:
        raise ValidationError("hermitian_eig needs a hermitian matrix")

    A = 0.5 * (M + M.conj().T)
    Q = np.eye(n, dtype=np.complex128)
    tol = OFF_DIAG_TOL * max(1.0, float(np.linalg.norm(A)))
    for _ in range(MAX_SWEEPS):
        if _off_norm(A) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) in the (p, q) plane, then the real rotation
                G = np.eye(n, dtype=np.complex128)
                G[p, p] = c
                G[p, q] = s
                G[q, p] = -s * np.conj(phase)
                G[q, q] = c * np.conj(phase)
                A = G.conj().T @ A @ G
                A[p, q] = A[q, p] = 0.0
                Q = Q @ G
    else:
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    values = np.diag(A).real.copy()
    order = np.argsort(-values, kind="stable")
    return values[order], Q[:, order]


@dataclass(frozen=True)
class SvdTriple:
    """``T = U @ Sigma @ V^*`` with ``U``, ``V`` unitary and ``Sigma`` rectangular diagonal."""

    U: np.ndarray
    Sigma: np.ndarray
    V: np.ndarray

    @property
    def singular_values(self) -> np.ndarray:
        return np.diag(self.Sigma).real.copy()

    def reconstruct(self) -> np.ndarray:
        return self.U @ self.Sigma @ self.V.conj().T


def complete_orthonormal(cols: list[np.ndarray], dim: int) -> np.ndarray:
    """Extend orthonormal columns to a unitary by Gram-Schmidt over e_0, e_1, ..."""
    basis = [np.asarray(c, dtype=np.complex128) for c in cols]
    for k in range(dim):
        if len(basis) == dim:
            break
        v = np.zeros(dim, dtype=np.complex128)
        v[k] = 1.0
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for b in basis:
                v = v - np.vdot(b, v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    return np.column_stack(basis) if basis else np.zeros((dim, 0), dtype=np.complex128)


def svd_from_gram(T, rank_tol: float | None = None) -> SvdTriple:
    """Singular value decomposition assembled from the Gram matrix ``T^* T``.

    Singular values are taken as ``||T v_j||`` for the Gram eigenvectors
    ``v_j``, which matches ``sqrt(mu_j)`` without the loss of accuracy near
    zero.  ``rank_tol`` defaults to ``1e-9`` times the largest one.  Columns
    of ``U`` belonging to singular values above ``rank_tol`` are ``T v_j / l_j``
    (re-orthonormalised), the rest are completed from the canonical basis.
    """
    T = as_cmat(T)
    d1, d2 = T.shape
    _, V = hermitian_eig(T.conj().T @ T)
    # ||T v_j|| equals sqrt(mu_j) but keeps full relative accuracy for tiny mu_j
    lam = np.linalg.norm(T @ V, axis=0)
    order = np.argsort(-lam, kind="stable")
    lam, V = lam[order], V[:, order]
    r = min(d1, d2)
    if rank_tol is None:
        rank_tol = 1e-9 * lam[0] if lam[0] > 0 else 1e-300
    if rank_tol <= 0:
        raise ValidationError("rank_tol must be positive")

    cols = []
    for j in range(r):
        if lam[j] <= rank_tol:
            break
        u = T @ V[:, j] / lam[j]
        for b in cols:
            u = u - np.vdot(b, u) * b
        cols.append(u / np.linalg.norm(u))
    U = complete_orthonormal(cols, d1)

    Sigma = np.zeros((d1, d2), dtype=np.complex128)
    Sigma[np.arange(r), np.arange(r)] = lam[:r]
    return SvdTriple(U=U, Sigma=Sigma, V=V)
