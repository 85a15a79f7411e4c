"""Fixed-step RK4 integration, flow composition, and the splitting-condition check."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import tensor as tc
from .errors import DimensionError, DivergenceError, ValidationError
from .model import EnsembleState

Rhs = Callable[[EnsembleState], np.ndarray]

DEFAULT_SPLIT_GRID = (0.1, 0.3, 1.0, 2.0, 3.7)
DEFAULT_SPLIT_TOL = 1e-8


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    sample_every: int = 100
    renormalize: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0):
            raise ValidationError("dt and t_end must be positive")
        if self.dt > self.t_end:
            raise ValidationError("dt must not exceed t_end")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValidationError("sample_every must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[EnsembleState]
    records: list = field(default_factory=list)
    renormalized: bool = False

    def __len__(self):
        return len(self.times)

    def agents(self) -> np.ndarray:
        """All sampled agents stacked into shape ``(samples, N, d1, d2)``."""
        return np.stack([s.agents for s in self.states])

    def state_at(self, t: float, tol: float | None = None) -> EnsembleState:
        k = int(np.argmin(np.abs(self.times - t)))
        if tol is not None and abs(self.times[k] - t) > tol:
            raise ValidationError(f"no sample within {tol} of t = {t}")
        return self.states[k]


def rk4_step(state: EnsembleState, rhs: Rhs, dt: float) -> EnsembleState:
    """One classical Runge-Kutta step; each stage re-evaluates the coupled RHS."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    T = state.agents
    k1 = rhs(state)
    k2 = rhs(EnsembleState(T + (0.5 * dt) * k1))
    k3 = rhs(EnsembleState(T + (0.5 * dt) * k2))
    k4 = rhs(EnsembleState(T + dt * k3))
    return EnsembleState(T + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def integrate(
    initial: EnsembleState,
    rhs: Rhs,
    cfg: IntegratorConfig,
    diag: Callable | None = None,
) -> Trajectory:
    """Integrate from ``t = 0`` to ``cfg.t_end`` with fixed step ``cfg.dt``.

    The state is sampled at step 0, every ``cfg.sample_every`` steps, and at
    the final step.  ``diag(t, state)``, if given, is called at every sample
    and its return values are collected in ``Trajectory.records``.
    """
    state = initial if isinstance(initial, EnsembleState) else EnsembleState(initial)
    norms0 = np.linalg.norm(state.agents, axis=(1, 2)) if cfg.renormalize else None
    n_steps = cfg.n_steps
    times, states, records = [], [], []

    def sample(k, s):
        t = k * cfg.dt
        times.append(t)
        states.append(s)
        if diag is not None:
            records.append(diag(t, s))

    sample(0, state)
    for k in range(1, n_steps + 1):
        try:
            with np.errstate(over="raise", invalid="raise"):
                nxt = rk4_step(state, rhs, cfg.dt)
        except (FloatingPointError, ValidationError) as exc:
            raise DivergenceError(
                f"non-finite state at step {k} (t = {k * cfg.dt:.6g})", step=k, time=k * cfg.dt
            ) from exc
        if cfg.renormalize:
            cur = np.linalg.norm(nxt.agents, axis=(1, 2))
            nxt = EnsembleState(nxt.agents * (norms0 / cur)[:, None, None])
        state = nxt
        if k % cfg.sample_every == 0 or k == n_steps:
            sample(k, state)
    return Trajectory(np.array(times), states, records, renormalized=cfg.renormalize)


def splitting_compose(A, nonlinear_traj: Trajectory, times: Sequence[float]) -> list[EnsembleState]:
    """Apply ``exp(tA)`` to every agent of the nonlinear solution at each sampled ``t``."""
    A = tc.as_r4(A)
    d1, d2 = A.shape[:2]
    out = []
    for t in times:
        # t must be a sample time; exp(tA) is taken at exactly that time
        N = nonlinear_traj.state_at(t, tol=1e-9 * max(1.0, abs(t)))
        if N.shape != (d1, d2):
            raise DimensionError(f"tensor acts on {(d1, d2)}, agents are {N.shape}")
        E = tc.r4_as_matrix(tc.r4_exp_scaled(A, t))
        m = d1 * d2
        moved = (N.agents.reshape(N.n, m) @ E.T).reshape(N.n, d1, d2)
        out.append(EnsembleState(moved))
    return out


def splitting_residual(A, t: float) -> float:
    """Max-abs deviation of the four-exponential contraction from its delta target.

    The contraction runs over the shared indices ``g, d, e, p`` of
    ``E-[a,b,g,d] E+[g,e,A1,B1] E-[A2,B2,p,e] E+[p,d,A3,B3]`` with
    ``E+ = exp(tA)``, ``E- = exp(-tA)``; the target is
    ``delta(A1,a) delta(B3,b) delta(B1,B2) delta(A2,A3)``.
    """
    A = tc.as_r4(A)
    d1, d2 = A.shape[:2]
    Ep = tc.r4_exp_scaled(A, t)
    Em = tc.r4_exp_scaled(A, -t)
    lhs = np.einsum("abgd,geAB,CDpe,pdEF->abABCDEF", Em, Ep, Em, Ep, optimize=True)
    I1, I2 = np.eye(d1), np.eye(d2)
    target = np.einsum("Aa,Fb,BD,CE->abABCDEF", I1, I2, I2, I1)
    return float(np.max(np.abs(lhs - target)))


def splitting_condition_check(A, t_samples=DEFAULT_SPLIT_GRID, tol=DEFAULT_SPLIT_TOL):
    """Return ``(holds, max_residual)`` over the sampled times."""
    A = tc.as_r4(A)
    worst = max(splitting_residual(A, t) for t in t_samples)
    return worst <= tol, worst
