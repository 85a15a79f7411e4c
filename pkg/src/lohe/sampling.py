"""Seeded random initial data and free-flow generators.

Every generator takes an integer ``seed`` and draws from its own
``numpy.random.default_rng(seed)``; equal seeds give bit-identical output.
"""

from __future__ import annotations

import numpy as np


def _ginibre(rng, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(d: int, seed: int) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary (QR of a Ginibre matrix, phases fixed)."""
    if d < 1:
        raise ValueError("d must be positive")
    Z = _ginibre(np.random.default_rng(seed), d, d)
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    return Q * (diag / np.abs(diag))


def random_hermitian(d: int, scale: float, seed: int) -> np.ndarray:
    G = _ginibre(np.random.default_rng(seed), d, d)
    return scale * (G + G.conj().T) / 2


def random_skew_hermitian(d: int, scale: float, seed: int) -> np.ndarray:
    if d < 1 or scale < 0:
        raise ValueError("need d >= 1 and scale >= 0")
    G = _ginibre(np.random.default_rng(seed), d, d)
    return scale * (G - G.conj().T) / 2


def random_normalized_matrix(d1: int, d2: int, seed: int) -> np.ndarray:
    """Complex Gaussian ``d1 x d2`` matrix divided by its Frobenius norm."""
    if d1 < 1 or d2 < 1:
        raise ValueError("dimensions must be positive")
    G = _ginibre(np.random.default_rng(seed), d1, d2)
    return G / np.linalg.norm(G)


def random_skew_r4(d1: int, d2: int, scale: float, seed: int) -> np.ndarray:
    """Random rank-4 tensor with ``conj(A[a,b,g,d]) = -A[g,d,a,b]``."""
    if d1 < 1 or d2 < 1 or scale < 0:
        raise ValueError("need positive dimensions and scale >= 0")
    G = scale * _ginibre(np.random.default_rng(seed), d1, d2, d1, d2)
    return (G - G.transpose(2, 3, 0, 1).conj()) / 2


def spawn_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent child seeds derived deterministically from ``seed``."""
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1)[0]) for c in ss.spawn(n)]
