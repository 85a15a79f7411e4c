"""Right-hand sides of the matrix aggregation models.

An ensemble of ``N`` agents of size ``d1 x d2`` is stored as one array of
shape ``(N, d1, d2)``.  Every ``rhs_*`` function is pure: it reads an
:class:`EnsembleState`, computes the centroid once, and returns a fresh
``(N, d1, d2)`` array of time derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as tc
from .errors import DimensionError, ValidationError
from .linalg import complete_orthonormal, svd_from_gram

UNITARY_TOL = 1e-8


def _h(X: np.ndarray) -> np.ndarray:
    """Batched hermitian conjugate over the last two axes."""
    return np.conj(np.swapaxes(X, -1, -2))


@dataclass(frozen=True)
class EnsembleState:
    """Immutable snapshot of ``N`` same-shape agents with their cached mean."""

    agents: np.ndarray
    centroid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.array(self.agents, dtype=np.complex128)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[0] < 1:
            raise ValidationError(f"ensemble needs shape (N, d1, d2), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("ensemble has non-finite entries")
        X.flags.writeable = False
        c = X.mean(axis=0)
        c.flags.writeable = False
        object.__setattr__(self, "agents", X)
        object.__setattr__(self, "centroid", c)

    @classmethod
    def from_matrices(cls, mats) -> "EnsembleState":
        mats = [tc.as_cmat(m) for m in mats]
        if not mats:
            raise ValidationError("empty ensemble")
        if len({m.shape for m in mats}) != 1:
            raise DimensionError("all agents must share one shape")
        return cls(np.stack(mats))

    @property
    def n(self) -> int:
        return self.agents.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.agents.shape[1], self.agents.shape[2]

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> np.ndarray:
        return self.agents[i]


def centroid(state: EnsembleState) -> np.ndarray:
    if not isinstance(state, EnsembleState):
        state = EnsembleState(state)
    return state.centroid


@dataclass(frozen=True)
class CouplingParams:
    k01: float = 0.0
    k10: float = 0.0
    k00: float = 0.0
    k11: float = 0.0

    def __post_init__(self):
        for name in ("k01", "k10", "k00", "k11"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValidationError(f"coupling {name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)

    @property
    def k1(self) -> float:
        return self.k01

    @property
    def k2(self) -> float:
        return self.k10

    @property
    def is_generalized(self) -> bool:
        return self.k00 == 0.0 and self.k11 == 0.0


FLOW_KINDS = ("zero", "left", "bilateral", "general", "unitary_left")


@dataclass(frozen=True)
class FreeFlowSpec:
    """Linear part ``A_i T_i`` of the dynamics.

    ``left``: ``-i H_i T``; ``bilateral``: ``B T + T C^T``; ``general``: a
    rank-4 tensor per agent or shared; ``unitary_left``: ``B_i T``.  Per-agent
    data carries a leading axis of length ``N``.
    """

    kind: str = "zero"
    H: np.ndarray | None = None
    B: np.ndarray | None = None
    C: np.ndarray | None = None
    A: np.ndarray | None = None

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def left(cls, H):
        H = np.asarray(H, dtype=np.complex128)
        for h in H.reshape(-1, *H.shape[-2:]):
            if not tc.is_hermitian(h):
                raise ValidationError("left free flow requires hermitian H")
        return cls("left", H=H)

    @classmethod
    def bilateral(cls, B, C):
        B, C = tc.as_cmat(B), tc.as_cmat(C)
        if not (tc.is_skew_hermitian(B) and tc.is_skew_hermitian(C)):
            raise ValidationError("bilateral free flow requires skew-hermitian B and C")
        return cls("bilateral", B=B, C=C)

    @classmethod
    def general(cls, A):
        A = np.asarray(A, dtype=np.complex128)
        if A.ndim not in (4, 5):
            raise DimensionError(f"general flow needs rank-4 tensor(s), got {A.shape}")
        for a in A.reshape(-1, *A.shape[-4:]):
            if not tc.is_skew_hermitian_r4(a):
                raise ValidationError("general free flow tensor is not skew-hermitian")
        return cls("general", A=A)

    @classmethod
    def unitary_left(cls, B):
        B = np.asarray(B, dtype=np.complex128)
        for b in B.reshape(-1, *B.shape[-2:]):
            if not tc.is_skew_hermitian(b):
                raise ValidationError("unitary_left flow requires skew-hermitian B_i")
        return cls("unitary_left", B=B)

    @property
    def shared(self) -> bool:
        """True when every agent sees the same linear flow."""
        if self.kind == "left":
            return self.H.ndim == 2
        if self.kind == "general":
            return self.A.ndim == 4
        if self.kind == "unitary_left":
            return self.B.ndim == 2
        return True

    def _check(self, n: int, d1: int, d2: int) -> None:
        def per_agent(arr, core_ndim, core_shape):
            if arr.shape[-core_ndim:] != core_shape:
                raise DimensionError(
                    f"{self.kind} flow has shape {arr.shape[-core_ndim:]}, "
                    f"state needs {core_shape}"
                )
            if arr.ndim == core_ndim + 1 and arr.shape[0] != n:
                raise DimensionError(f"flow has {arr.shape[0]} agents, state has {n}")

        if self.kind == "left":
            per_agent(self.H, 2, (d1, d1))
        elif self.kind == "bilateral":
            per_agent(self.B, 2, (d1, d1))
            per_agent(self.C, 2, (d2, d2))
        elif self.kind == "general":
            per_agent(self.A, 4, (d1, d2, d1, d2))
        elif self.kind == "unitary_left":
            per_agent(self.B, 2, (d1, d1))
        elif self.kind != "zero":
            raise ValidationError(f"unknown flow kind {self.kind!r}")

    def apply(self, agents: np.ndarray) -> np.ndarray:
        """``A_i T_i`` for every agent of an ``(N, d1, d2)`` array."""
        n, d1, d2 = agents.shape
        self._check(n, d1, d2)
        if self.kind == "zero":
            return np.zeros_like(agents)
        if self.kind == "left":
            return -1j * (self.H @ agents)
        if self.kind == "bilateral":
            return self.B @ agents + agents @ self.C.T
        if self.kind == "unitary_left":
            return self.B @ agents
        m = d1 * d2
        if self.A.ndim == 4:
            out = agents.reshape(n, m) @ self.A.reshape(m, m).T
        else:
            out = np.einsum("nij,nj->ni", self.A.reshape(n, m, m), agents.reshape(n, m))
        return out.reshape(n, d1, d2)

    def tensors(self, n: int, d1: int, d2: int) -> np.ndarray:
        """Rank-4 form of the flow, shape ``(N, d1, d2, d1, d2)``."""
        self._check(n, d1, d2)
        if self.kind == "zero":
            return np.zeros((n, d1, d2, d1, d2), dtype=np.complex128)
        if self.kind == "general":
            return np.broadcast_to(self.A, (n, d1, d2, d1, d2)).copy()
        if self.kind == "bilateral":
            A = tc.build_bilateral_free_flow(self.B, self.C)
            return np.broadcast_to(A, (n, d1, d2, d1, d2)).copy()
        mats = self.H if self.kind == "left" else self.B
        mats = np.broadcast_to(mats, (n, d1, d1))
        if self.kind == "left":
            return np.stack([tc.build_left_free_flow(h, d2) for h in mats])
        eye = np.eye(d2)
        return np.stack([np.einsum("ag,bd->abgd", b, eye) for b in mats])

    def shared_tensor(self, d1: int, d2: int) -> np.ndarray:
        if not self.shared:
            raise ValidationError("flow is not identical across agents")
        return self.tensors(1, d1, d2)[0]


def _flow_term(state: EnsembleState, flow: FreeFlowSpec | None) -> np.ndarray:
    if flow is None or flow.kind == "zero":
        return np.zeros_like(state.agents)
    return flow.apply(state.agents)


def _coupling_terms(T, Tc, k1, k2):
    Th, Tch = _h(T), _h(Tc)
    cross = T @ Tch @ T
    return k1 * (Tc @ Th @ T - cross) + k2 * (T @ Th @ Tc - cross)


def rhs_generalized(state: EnsembleState, params: CouplingParams, flow=None) -> np.ndarray:
    """``A_i T_i + k1 (T_c T_i^* T_i - T_i T_c^* T_i) + k2 (T_i T_i^* T_c - T_i T_c^* T_i)``."""
    if not params.is_generalized:
        raise ValidationError("generalized model requires k00 = k11 = 0")
    T, Tc = state.agents, state.centroid
    return _flow_term(state, flow) + _coupling_terms(T, Tc, params.k01, params.k10)


def rhs_full_rank2(state: EnsembleState, params: CouplingParams, flow=None) -> np.ndarray:
    """Generalized model plus the two trace couplings ``k00`` and ``k11``."""
    T, Tc = state.agents, state.centroid
    out = _flow_term(state, flow) + _coupling_terms(T, Tc, params.k01, params.k10)
    if params.k00 or params.k11:
        Th, Tch = _h(T), _h(Tc)
        tr_tt = np.trace(Th @ T, axis1=1, axis2=2)
        tr_ct = np.trace(Tch @ T, axis1=1, axis2=2)
        tr_tc = np.trace(Th @ Tc, axis1=1, axis2=2)
        out = out + params.k00 * (tr_tt[:, None, None] * Tc - tr_ct[:, None, None] * T)
        out = out + params.k11 * (tr_tc - tr_ct)[:, None, None] * T
    return out


def frustration_matrix(D) -> np.ndarray:
    """Validate a real nonnegative diagonal matrix (or its diagonal) and return it."""
    D = np.asarray(D, dtype=np.complex128)
    if D.ndim == 1:
        D = np.diag(D)
    D = tc.as_cmat(D)
    if D.shape[0] != D.shape[1]:
        raise DimensionError("frustration matrix must be square")
    if np.any(D - np.diag(np.diag(D)) != 0):
        raise ValidationError("frustration matrix must be diagonal")
    d = np.diag(D)
    if np.any(d.imag != 0) or np.any(d.real < 0):
        raise ValidationError("frustration diagonal must be real and nonnegative")
    return D


def check_unitary_ensemble(agents, tol=UNITARY_TOL) -> None:
    X = np.asarray(agents)
    n, d1, d2 = X.shape
    if d1 != d2:
        raise DimensionError("unitary agents must be square")
    err = np.max(np.abs(_h(X) @ X - np.eye(d1)))
    if err > tol:
        raise ValidationError(f"agents are not unitary (max |U^*U - I| = {err:.3g})")


def rhs_frustrated_unitary(
    state: EnsembleState, D, k1: float, flow=None, *, check_unitary: bool = True
) -> np.ndarray:
    """``B_i U_i + k1 (U_c D - U_i D U_c^* U_i)`` on unitary agents.

    Unitarity is checked here only when ``check_unitary`` is set; integrators
    check the initial ensemble once and then pass ``False`` so that drift is
    observed instead of rejected.
    """
    D = frustration_matrix(D)
    U, Uc = state.agents, state.centroid
    if D.shape[0] != U.shape[1]:
        raise DimensionError(f"D is {D.shape}, agents are {U.shape[1:]}")
    if check_unitary:
        check_unitary_ensemble(U)
    if flow is not None and flow.kind not in ("zero", "unitary_left"):
        raise ValidationError("frustrated unitary model takes a unitary_left flow")
    return _flow_term(state, flow) + k1 * (Uc @ D - U @ D @ _h(Uc) @ U)


def rhs_sphere(state: EnsembleState, k1: float, k2: float, Omega=None) -> np.ndarray:
    """Complex sphere model on column vectors ``z_i`` (agents of shape ``d x 1``)."""
    z, zc = state.agents, state.centroid
    if z.shape[2] != 1:
        raise DimensionError("sphere model needs d x 1 agents")
    zz = np.sum(np.conj(z) * z, axis=(1, 2))
    cz = np.sum(np.conj(zc) * z, axis=(1, 2))
    zcz = np.sum(np.conj(z) * zc, axis=(1, 2))
    out = k1 * (zc * zz[:, None, None] - z * cz[:, None, None])
    out = out + k2 * (zcz - cz)[:, None, None] * z
    if Omega is not None:
        Omega = np.asarray(Omega, dtype=np.complex128)
        for w in Omega.reshape(-1, *Omega.shape[-2:]):
            if not tc.is_skew_hermitian(w):
                raise ValidationError("sphere natural frequencies must be skew-hermitian")
        out = out + Omega @ z
    return out


def dual_system_params(params: CouplingParams, flow=None):
    """Couplings and flow of the system solved by ``S_j = T_j^*``.

    ``k01`` and ``k10`` swap; every tensor goes through :func:`tensor.r4_dual`.
    The trace couplings keep their form under conjugation and are unchanged.
    """
    swapped = CouplingParams(k01=params.k10, k10=params.k01, k00=params.k00, k11=params.k11)
    if flow is None or flow.kind == "zero":
        return swapped, FreeFlowSpec.zero()
    if flow.kind != "general":
        raise ValidationError("dual system is defined for general or zero flows")
    A = flow.A
    dual = A.transpose(*range(A.ndim - 4), -3, -4, -1, -2).conj()
    return swapped, FreeFlowSpec.general(dual)


def reformulate_unitary(agents, rank_tol: float | None = None, gram_tol: float = 1e-10):
    """Write ``T_i = U_i Sigma V^*`` with common ``Sigma`` and ``V``.

    Requires all Gram matrices ``T_i^* T_i`` to agree within ``gram_tol``.
    Returns ``(U, Sigma, V)`` with ``U`` of shape ``(N, d1, d1)``.
    """
    T = np.asarray(agents, dtype=np.complex128)
    grams = _h(T) @ T
    spread = np.max(np.abs(grams - grams[0]))
    if spread > gram_tol:
        raise ValidationError(
            f"agents have different Gram matrices T_i^* T_i (spread {spread:.3g}); "
            "a common Sigma and V do not exist"
        )
    svd = svd_from_gram(T[0], rank_tol)
    lam = svd.singular_values
    if rank_tol is None:
        rank_tol = 1e-9 * lam[0] if lam.size and lam[0] > 0 else 1e-300
    rank = int(np.sum(lam > rank_tol))
    d1 = T.shape[1]
    Us = []
    for Ti in T:
        cols = []
        for j in range(rank):
            u = Ti @ svd.V[:, j] / lam[j]
            for b in cols:
                u = u - np.vdot(b, u) * b
            cols.append(u / np.linalg.norm(u))
        Us.append(complete_orthonormal(cols, d1))
    return np.stack(Us), svd.Sigma, svd.V
