"""Dense complex matrices and rank-4 tensors acting on them.

Matrices are plain 2-D ``complex128`` numpy arrays.  A rank-4 tensor ``A`` of
size ``d1 x d2 x d1 x d2`` is a 4-D array indexed ``A[a, b, g, d]``; it acts on
a ``d1 x d2`` matrix by contracting its last two indices::

    (A T)[a, b] = sum_{g, d} A[a, b, g, d] T[g, d]

Storage is C-ordered, so ``A.reshape(d1 * d2, d1 * d2)`` is the matrix of the
linear map on row-major vectorised matrices.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, DimensionError, ValidationError

SKEW_TOL = 1e-12
EXP_TERM_TOL = 1e-16
EXP_MAX_TERMS = 200


def as_cmat(T) -> np.ndarray:
    """Coerce ``T`` to a finite 2-D complex array."""
    M = np.asarray(T, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"expected a nonempty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("matrix has non-finite entries")
    return M


def as_r4(A) -> np.ndarray:
    """Coerce ``A`` to a finite rank-4 array of shape ``(d1, d2, d1, d2)``."""
    X = np.asarray(A, dtype=np.complex128)
    if X.ndim != 4 or X.shape[:2] != X.shape[2:]:
        raise DimensionError(f"expected shape (d1, d2, d1, d2), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("tensor has non-finite entries")
    return X


# -- matrix algebra ---------------------------------------------------------

def hconj(T) -> np.ndarray:
    """Hermitian conjugate (conjugate transpose)."""
    return np.conj(as_cmat(T)).T


def _same_shape(A, B):
    A, B = as_cmat(A), as_cmat(B)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    return A, B


def frob(T1, T2) -> complex:
    """Frobenius inner product, conjugate-linear in the first argument."""
    A, B = _same_shape(T1, T2)
    return complex(np.vdot(A, B))


def frob_norm(T) -> float:
    return math.sqrt(max(frob(T, T).real, 0.0))


def matmul(A, B) -> np.ndarray:
    A, B = as_cmat(A), as_cmat(B)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    return A @ B


def add(A, B) -> np.ndarray:
    A, B = _same_shape(A, B)
    return A + B


def sub(A, B) -> np.ndarray:
    A, B = _same_shape(A, B)
    return A - B


def scale(c, A) -> np.ndarray:
    return complex(c) * as_cmat(A)


def trace(A) -> complex:
    A = as_cmat(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"trace of non-square matrix {A.shape}")
    return complex(np.trace(A))


def is_hermitian(M, tol=SKEW_TOL) -> bool:
    M = as_cmat(M)
    return M.shape[0] == M.shape[1] and bool(np.max(np.abs(M - M.conj().T)) <= tol)


def is_skew_hermitian(M, tol=SKEW_TOL) -> bool:
    M = as_cmat(M)
    return M.shape[0] == M.shape[1] and bool(np.max(np.abs(M + M.conj().T)) <= tol)


# -- rank-4 tensors ----------------------------------------------------------

def r4_identity(d1: int, d2: int) -> np.ndarray:
    """Unit of :func:`r4_product`: ``delta_{a g} delta_{b d}``."""
    return np.eye(d1 * d2, dtype=np.complex128).reshape(d1, d2, d1, d2)


def r4_as_matrix(A) -> np.ndarray:
    A = as_r4(A)
    n = A.shape[0] * A.shape[1]
    return A.reshape(n, n)


def contract4(A, T) -> np.ndarray:
    """Apply ``A`` to the matrix ``T`` by double-index contraction."""
    A, T = as_r4(A), as_cmat(T)
    if A.shape[2:] != T.shape:
        raise DimensionError(f"tensor of size {A.shape} cannot act on {T.shape}")
    return np.einsum("abgd,gd->ab", A, T)


def r4_product(X, Y) -> np.ndarray:
    """``(XY)[a,b,g,d] = sum_{e,p} X[a,b,e,p] Y[e,p,g,d]``."""
    X, Y = as_r4(X), as_r4(Y)
    if X.shape != Y.shape:
        raise DimensionError(f"shape mismatch: {X.shape} vs {Y.shape}")
    return np.einsum("abep,epgd->abgd", X, Y)


def is_skew_hermitian_r4(A, tol=SKEW_TOL) -> bool:
    """Check ``conj(A[a,b,g,d]) == -A[g,d,a,b]`` entrywise within ``tol``."""
    A = as_r4(A)
    return bool(np.max(np.abs(A.conj() + A.transpose(2, 3, 0, 1))) <= tol)


def r4_exp(A, t: float = 1.0) -> np.ndarray:
    """Exponential of ``t*A`` by direct power series under :func:`r4_product`.

    Summation stops once a term's largest entry drops below 1e-16.  Raises
    :class:`ConvergenceError` after 200 terms; for large ``|t| * ||A||`` use
    :func:`r4_exp_scaled`.
    """
    A = as_r4(A)
    d1, d2 = A.shape[:2]
    M = r4_as_matrix(A) * t
    term = np.eye(d1 * d2, dtype=np.complex128)
    total = term.copy()
    for n in range(1, EXP_MAX_TERMS):
        term = term @ M / n
        total += term
        if not np.all(np.isfinite(total)):
            break
        if np.max(np.abs(term)) < EXP_TERM_TOL:
            return total.reshape(d1, d2, d1, d2)
    raise ConvergenceError(
        f"exponential series did not converge in {EXP_MAX_TERMS} terms "
        f"(max|tA| = {np.max(np.abs(M)):.3g}); scale and square instead"
    )


def r4_exp_scaled(A, t: float = 1.0) -> np.ndarray:
    """Exponential of ``t*A`` with scaling and squaring around :func:`r4_exp`."""
    A = as_r4(A)
    norm = np.linalg.norm(r4_as_matrix(A), 1) * abs(t)
    s = max(0, math.ceil(math.log2(norm))) if norm > 0.5 else 0
    E = r4_exp(A, t / 2**s)
    for _ in range(s):
        E = r4_product(E, E)
    return E


def build_left_free_flow(H, d2: int) -> np.ndarray:
    """Tensor of the free flow ``T -> -i H T`` for hermitian ``H``."""
    H = as_cmat(H)
    if not is_hermitian(H):
        raise ValidationError("left free flow requires a hermitian H")
    return -1j * np.einsum("ag,bd->abgd", H, np.eye(d2))


def build_bilateral_free_flow(B, C) -> np.ndarray:
    """Tensor of ``T -> B T + T C^T`` for skew-hermitian ``B`` and ``C``."""
    B, C = as_cmat(B), as_cmat(C)
    if not is_skew_hermitian(B) or not is_skew_hermitian(C):
        raise ValidationError("bilateral free flow requires skew-hermitian B and C")
    d1, d2 = B.shape[0], C.shape[0]
    return np.einsum("ag,bd->abgd", B, np.eye(d2)) + np.einsum(
        "bd,ag->abgd", C, np.eye(d1)
    )


def r4_dual(A) -> np.ndarray:
    """Tensor ``B[a,b,g,d] = conj(A[b,a,d,g])`` with ``(A T)^* = B T^*``."""
    return as_r4(A).transpose(1, 0, 3, 2).conj()


# -- file format -----------------------------------------------------------

def write_r4(A, path) -> None:
    """Write ``A`` as text: header ``r4 d1 d2`` then one entry per line."""
    A = as_r4(A)
    d1, d2 = A.shape[:2]
    lines = [f"r4 {d1} {d2}"]
    for idx in np.ndindex(*A.shape):
        z = A[idx]
        one_based = " ".join(str(i + 1) for i in idx)
        lines.append(f"{one_based} {z.real:.17g} {z.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_r4(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise ValidationError(f"{path}: empty tensor file")
    head = text[0].split()
    if len(head) != 3 or head[0] != "r4":
        raise ValidationError(f"{path}: header must be 'r4 d1 d2'")
    d1, d2 = int(head[1]), int(head[2])
    A = np.zeros((d1, d2, d1, d2), dtype=np.complex128)
    expected = list(np.ndindex(*A.shape))
    body = [ln for ln in text[1:] if ln.strip()]
    if len(body) != len(expected):
        raise ValidationError(
            f"{path}: expected {len(expected)} entries, found {len(body)}"
        )
    for lineno, (ln, idx) in enumerate(zip(body, expected), start=2):
        parts = ln.split()
        if len(parts) != 6:
            raise ValidationError(f"{path}:{lineno}: expected 6 fields")
        got = tuple(int(p) - 1 for p in parts[:4])
        if got != idx:
            raise ValidationError(
                f"{path}:{lineno}: index {parts[:4]} out of lexicographic order"
            )
        A[idx] = complex(float(parts[4]), float(parts[5]))
    return as_r4(A)
