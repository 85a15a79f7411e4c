import numpy as np
import pytest

from lohe.errors import DimensionError, ValidationError
from lohe.model import (
    CouplingParams,
    EnsembleState,
    FreeFlowSpec,
    centroid,
    dual_system_params,
    frustration_matrix,
    reformulate_unitary,
    rhs_frustrated_unitary,
    rhs_full_rank2,
    rhs_generalized,
    rhs_sphere,
)
from lohe.sampling import haar_unitary, random_hermitian, random_skew_hermitian, random_skew_r4
from lohe.tensor import contract4

from oracles import rhs_full_naive, rhs_generalized_naive

rng = np.random.default_rng(31)


def cg(*shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def unit_ensemble(n, d1, d2):
    X = cg(n, d1, d2)
    return X / np.linalg.norm(X, axis=(1, 2))[:, None, None]


def test_state_is_immutable_and_cached():
    X = cg(5, 2, 3)
    s = EnsembleState(X)
    assert np.max(np.abs(s.centroid - X.mean(axis=0))) < 1e-13
    with pytest.raises(ValueError):
        s.agents[0, 0, 0] = 1
    X[0] = 0  # the state holds its own copy
    assert np.any(s.agents[0])
    assert s.n == 5 and s.shape == (2, 3) and len(s) == 5


def test_state_validation():
    with pytest.raises(ValidationError):
        EnsembleState(np.zeros((0, 2, 2)))
    with pytest.raises(DimensionError):
        EnsembleState.from_matrices([np.eye(2), np.eye(3)])
    with pytest.raises(ValidationError):
        EnsembleState.from_matrices([])


def test_centroid_examples():
    T = cg(2, 3)
    assert np.allclose(centroid(EnsembleState([T, T, T])), T)
    assert np.allclose(centroid(EnsembleState([T, -T])), 0)


def test_coupling_params_validation():
    with pytest.raises(ValidationError):
        CouplingParams(k01=-1)
    with pytest.raises(ValidationError):
        CouplingParams(k01=np.inf)
    p = CouplingParams(1, 2)
    assert p.k1 == 1 and p.k2 == 2 and p.is_generalized
    with pytest.raises(ValidationError):
        rhs_generalized(EnsembleState(cg(2, 2, 2)), CouplingParams(1, 0, 1, 0))


def test_generalized_single_agent_is_free_flow():
    A = random_skew_r4(2, 3, 1.0, 1)
    T = cg(1, 2, 3)
    out = rhs_generalized(EnsembleState(T), CouplingParams(1.3, 0.7), FreeFlowSpec.general(A))
    assert np.max(np.abs(out[0] - contract4(A, T[0]))) < 1e-13


def test_generalized_identical_ensemble_is_stationary():
    T = cg(2, 3)
    out = rhs_generalized(EnsembleState([T, T, T]), CouplingParams(1.3, 0.7))
    assert np.max(np.abs(out)) < 1e-13


def test_generalized_matches_naive():
    X = cg(3, 2, 3)
    A = random_skew_r4(2, 3, 1.0, 2)
    out = rhs_generalized(EnsembleState(X), CouplingParams(1.3, 0.7), FreeFlowSpec.general(A))
    AT = [contract4(A, x) for x in X]
    assert np.max(np.abs(out - rhs_generalized_naive(list(X), 1.3, 0.7, AT))) < 1e-13


def test_full_rank2():
    X = cg(3, 2, 3)
    s = EnsembleState(X)
    assert np.array_equal(
        rhs_full_rank2(s, CouplingParams(1.3, 0.7)), rhs_generalized(s, CouplingParams(1.3, 0.7))
    )
    p = CouplingParams(1.3, 0.7, 0.4, 0.9)
    assert np.max(np.abs(rhs_full_rank2(s, p) - rhs_full_naive(list(X), 1.3, 0.7, 0.4, 0.9))) < 1e-12
    T = cg(2, 2)
    same = EnsembleState([T, T])
    assert np.max(np.abs(rhs_full_rank2(same, CouplingParams(0, 0, 1, 1)))) < 1e-13
    flow = FreeFlowSpec.general(random_skew_r4(2, 3, 1.0, 3))
    assert np.array_equal(rhs_full_rank2(s, CouplingParams(), flow), flow.apply(X))


def test_flow_kinds_agree_with_tensor_form():
    n, d1, d2 = 3, 2, 3
    X = cg(n, d1, d2)
    H = np.stack([random_hermitian(d1, 1.0, s) for s in range(n)])
    flows = [
        FreeFlowSpec.left(H),
        FreeFlowSpec.left(H[0]),
        FreeFlowSpec.bilateral(random_skew_hermitian(d1, 1.0, 5), random_skew_hermitian(d2, 1.0, 6)),
        FreeFlowSpec.unitary_left(np.stack([random_skew_hermitian(d1, 1.0, s) for s in range(n)])),
        FreeFlowSpec.general(np.stack([random_skew_r4(d1, d2, 1.0, s) for s in range(n)])),
    ]
    for f in flows:
        A = f.tensors(n, d1, d2)
        ref = np.stack([contract4(A[i], X[i]) for i in range(n)])
        assert np.max(np.abs(f.apply(X) - ref)) < 1e-13


def test_flow_validation():
    with pytest.raises(ValidationError):
        FreeFlowSpec.left(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        FreeFlowSpec.general(np.ones((2, 2, 2, 2)))
    with pytest.raises(ValidationError):
        FreeFlowSpec.unitary_left(np.eye(2))
    with pytest.raises(DimensionError):
        FreeFlowSpec.left(np.eye(3)).apply(cg(2, 2, 2))
    with pytest.raises(DimensionError):
        FreeFlowSpec.left(np.stack([np.eye(2)] * 3)).apply(cg(2, 2, 2))
    with pytest.raises(ValidationError):
        FreeFlowSpec.left(np.stack([np.eye(2)] * 2)).shared_tensor(2, 2)


def test_frustrated_unitary():
    U = haar_unitary(3, 1)
    same = EnsembleState([U] * 4)
    assert np.max(np.abs(rhs_frustrated_unitary(same, [1.0, 0.5, 0.2], 2.0))) < 1e-13
    Us = np.stack([haar_unitary(3, s) for s in range(4)])
    s = EnsembleState(Us)
    Uc = Us.mean(axis=0)
    ref_D_eye = [1.5 * (Uc - u @ Uc.conj().T @ u) for u in Us]
    assert np.max(np.abs(rhs_frustrated_unitary(s, np.ones(3), 1.5) - ref_D_eye)) < 1e-13
    D = np.diag([0.7, 0.2, 0.1])
    B = np.stack([random_skew_hermitian(3, 1.0, k) for k in range(4)])
    ref = [B[i] @ u + 1.5 * (Uc @ D - u @ D @ Uc.conj().T @ u) for i, u in enumerate(Us)]
    got = rhs_frustrated_unitary(s, D, 1.5, FreeFlowSpec.unitary_left(B))
    assert np.max(np.abs(got - ref)) < 1e-13


def test_frustrated_validation():
    Us = EnsembleState(np.stack([haar_unitary(2, s) for s in range(3)]))
    with pytest.raises(ValidationError):
        rhs_frustrated_unitary(Us, np.array([[1, 1], [0, 1]]), 1.0)
    with pytest.raises(ValidationError):
        frustration_matrix([1.0, -0.5])
    with pytest.raises(ValidationError):
        rhs_frustrated_unitary(EnsembleState(cg(3, 2, 2)), [1, 1], 1.0)
    with pytest.raises(DimensionError):
        rhs_frustrated_unitary(Us, [1, 1, 1], 1.0)


def test_sphere_matches_matrix_model_exactly():
    z = cg(5, 3, 1)
    s = EnsembleState(z)
    a = rhs_generalized(s, CouplingParams(1.3, 0.7))
    b = rhs_sphere(s, 1.3, 0.7)
    assert np.max(np.abs(a - b)) < 1e-14
    H = np.stack([random_hermitian(3, 1.0, k) for k in range(5)])
    a = rhs_generalized(s, CouplingParams(1.3, 0.7), FreeFlowSpec.left(H))
    b = rhs_sphere(s, 1.3, 0.7, -1j * H)
    assert np.max(np.abs(a - b)) < 1e-14
    with pytest.raises(DimensionError):
        rhs_sphere(EnsembleState(cg(2, 2, 2)), 1, 1)


def test_sphere_identical_is_stationary():
    v = np.array([[1], [1j]]) / np.sqrt(2)
    assert np.max(np.abs(rhs_sphere(EnsembleState([v, v]), 1, 1))) < 1e-15


def test_scalar_reduction_phase_velocity():
    theta = rng.uniform(0, 2 * np.pi, 10)
    z = np.exp(1j * theta)[:, None, None]
    k1, k2 = 0.8, 0.5
    dz = rhs_generalized(EnsembleState(z), CouplingParams(k1, k2))[:, 0, 0]
    zc = z.mean()
    rho, phi = abs(zc), np.angle(zc)
    theta_dot = (dz / z[:, 0, 0]).imag
    assert np.max(np.abs(theta_dot - 2 * (k1 + k2) * rho * np.sin(phi - theta))) < 1e-14
    assert np.max(np.abs((dz / z[:, 0, 0]).real)) < 1e-14


def test_dual_params():
    A = random_skew_r4(2, 3, 1.0, 9)
    p = CouplingParams(1.3, 0.7, 0.2, 0.1)
    dp, df = dual_system_params(p, FreeFlowSpec.general(A))
    assert (dp.k01, dp.k10, dp.k00, dp.k11) == (0.7, 1.3, 0.2, 0.1)
    assert df.A.shape == (3, 2, 3, 2)
    pp, ff = dual_system_params(dp, df)
    assert pp == p and np.array_equal(ff.A, A)
    per_agent = np.stack([random_skew_r4(2, 3, 1.0, k) for k in range(3)])
    _, df = dual_system_params(p, FreeFlowSpec.general(per_agent))
    assert df.A.shape == (3, 3, 2, 3, 2)
    with pytest.raises(ValidationError):
        dual_system_params(p, FreeFlowSpec.left(np.eye(2)))


def test_dual_rhs_is_conjugate_of_primal_rhs():
    X = cg(4, 2, 3)
    A = random_skew_r4(2, 3, 1.0, 10)
    p = CouplingParams(1.3, 0.7, 0.4, 0.2)
    dp, df = dual_system_params(p, FreeFlowSpec.general(A))
    primal = rhs_full_rank2(EnsembleState(X), p, FreeFlowSpec.general(A))
    dual = rhs_full_rank2(EnsembleState(np.conj(np.swapaxes(X, 1, 2))), dp, df)
    assert np.max(np.abs(dual - np.conj(np.swapaxes(primal, 1, 2)))) < 1e-13


def test_reformulate_unitary():
    V = haar_unitary(2, 1)
    Sigma = np.array([[0.8, 0], [0, 0.6], [0, 0]])
    U = np.stack([haar_unitary(3, s) for s in range(4)])
    T = U @ Sigma @ V.conj().T
    U2, S2, V2 = reformulate_unitary(T)
    assert np.allclose(np.diag(S2).real, [0.8, 0.6])
    assert np.max(np.abs(U2 @ S2 @ V2.conj().T - T)) < 1e-10
    assert np.max(np.abs(np.conj(np.swapaxes(U2, 1, 2)) @ U2 - np.eye(3))) < 1e-10
    with pytest.raises(ValidationError):
        reformulate_unitary(cg(3, 3, 2))


def test_reformulate_rank_deficient():
    V = haar_unitary(2, 3)
    Sigma = np.array([[1.0, 0], [0, 0]])
    U = np.stack([haar_unitary(2, s) for s in range(3)])
    T = U @ Sigma @ V.conj().T
    U2, S2, V2 = reformulate_unitary(T)
    assert np.max(np.abs(U2 @ S2 @ V2.conj().T - T)) < 1e-10
