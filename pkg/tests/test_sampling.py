import numpy as np

from lohe import sampling as smp
from lohe.tensor import is_skew_hermitian, is_skew_hermitian_r4


def test_haar_unitary():
    U = smp.haar_unitary(3, 5)
    assert np.max(np.abs(U.conj().T @ U - np.eye(3))) < 1e-12
    assert np.array_equal(U, smp.haar_unitary(3, 5))
    assert not np.array_equal(U, smp.haar_unitary(3, 6))


def test_haar_phases_are_uniform():
    # a Haar unitary has E[tr U] = 0; a QR without the phase fix does not
    tr = np.mean([np.trace(smp.haar_unitary(2, s)) for s in range(4000)])
    assert abs(tr) < 0.06


def test_normalized_and_skew():
    T = smp.random_normalized_matrix(2, 3, 1)
    assert abs(np.linalg.norm(T) - 1) < 1e-15
    assert is_skew_hermitian(smp.random_skew_hermitian(3, 2.0, 1))
    assert is_skew_hermitian_r4(smp.random_skew_r4(2, 2, 1.0, 1))
    assert np.array_equal(smp.random_skew_r4(2, 3, 1.0, 4), smp.random_skew_r4(2, 3, 1.0, 4))


def test_spawn_seeds_deterministic():
    a = smp.spawn_seeds(3, 4)
    assert a == smp.spawn_seeds(3, 4)
    assert len(set(a)) == 4
