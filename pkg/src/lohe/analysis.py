"""Scalar diagnostics along trajectories and the constants of the diameter estimates.

Conventions: ``rho = ||T_c||_F``; the variance is the mean squared distance to
the centroid and equals ``1 - rho**2`` for unit-norm agents.  Diameters are
maximal pairwise Frobenius distances.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError
from .model import EnsembleState, _h

UNIT_NORM_TOL = 1e-6
IDENTITY_TOL = 1e-10
BISECT_TOL = 1e-12


def _as_state(state) -> EnsembleState:
    return state if isinstance(state, EnsembleState) else EnsembleState(state)


def _require_unit_norms(agents: np.ndarray, tol: float = UNIT_NORM_TOL) -> None:
    norms = np.linalg.norm(agents, axis=(1, 2))
    err = float(np.max(np.abs(norms - 1.0)))
    if err > tol:
        raise ValidationError(
            f"variance identities need unit-norm agents (max | ||T_j|| - 1 | = {err:.3g})"
        )


def variance(state) -> tuple[float, float]:
    """``(variance, rho)`` of a unit-norm ensemble.

    The variance is summed directly as ``mean_k ||T_k - T_c||^2``; for unit
    norms it agrees with ``1 - rho**2`` up to rounding.
    """
    state = _as_state(state)
    _require_unit_norms(state.agents)
    dev = state.agents - state.centroid
    v = float(np.mean(np.sum(np.abs(dev) ** 2, axis=(1, 2))))
    rho = float(np.linalg.norm(state.centroid))
    return v, rho


def commutator_norms(state) -> tuple[np.ndarray, np.ndarray]:
    """Per-agent ``||T_j T_c^* - T_c T_j^*||_F`` and ``||T_j^* T_c - T_c^* T_j||_F``."""
    state = _as_state(state)
    T, Tc = state.agents, state.centroid
    Tch = Tc.conj().T
    X1 = T @ Tch - Tc @ _h(T)
    X2 = _h(T) @ Tc - Tch @ T
    return np.linalg.norm(X1, axis=(1, 2)), np.linalg.norm(X2, axis=(1, 2))


def _rate_from_comms(c1, c2, k1, k2) -> float:
    return -(k1 * float(np.mean(c1**2)) + k2 * float(np.mean(c2**2)))


def variance_rate(state, k1: float, k2: float) -> float:
    """Time derivative of the variance along the two-coupling flow (never positive)."""
    state = _as_state(state)
    _require_unit_norms(state.agents)
    return _rate_from_comms(*commutator_norms(state), k1, k2)


def _pairwise(mats) -> np.ndarray:
    X = np.asarray(mats, dtype=np.complex128)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[0] == 0:
        raise ValidationError("diameter needs a nonempty collection of same-shape matrices")
    diff = X[:, None] - X[None, :]
    return np.sqrt(np.sum(np.abs(diff) ** 2, axis=(2, 3)))


def diameter(mats) -> float:
    """Largest pairwise Frobenius distance."""
    return float(np.max(_pairwise(mats)))


def diameter_pair(mats) -> tuple[float, tuple[int, int]]:
    """Diameter together with the first pair ``(i, j)``, ``i < j``, attaining it."""
    P = _pairwise(mats)
    n = P.shape[0]
    if n == 1:
        return 0.0, (0, 0)
    iu = np.triu_indices(n, 1)
    k = int(np.argmax(P[iu]))
    return float(P[iu][k]), (int(iu[0][k]), int(iu[1][k]))


# -- per-sample diagnostics ---------------------------------------------------

CSV_FIELDS = (
    "t",
    "variance",
    "variance_rate",
    "rho",
    "diam_T",
    "diam_U",
    "comm1_max",
    "comm2_max",
    "dissipation1",
    "dissipation2",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    variance: float
    variance_rate: float
    rho: float
    diam_T: float
    diam_U: float
    comm1_max: float
    comm2_max: float
    dissipation1: float
    dissipation2: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in CSV_FIELDS)

    def as_dict(self) -> dict:
        return asdict(self)


class DiagnosticsTracker:
    """Callable ``(t, state) -> DiagnosticsRecord`` for :func:`sim.integrate`.

    Keeps running trapezoid sums of ``(k1/N) sum_j comm1_j**2`` and
    ``(k2/N) sum_j comm2_j**2``, so one tracker serves exactly one run (see
    :meth:`reset`).  When ``sigma`` and ``V`` are given the state holds unitary
    factors ``U_i`` and every diagnostic except ``diam_U`` is taken on
    ``T_i = U_i sigma V^*``.  Variance fields are NaN for non-unit agents.
    """

    def __init__(self, k1: float, k2: float, sigma=None, V=None):
        self.k1, self.k2 = float(k1), float(k2)
        if (sigma is None) != (V is None):
            raise ValidationError("sigma and V must be given together")
        self.sigma = None if sigma is None else np.asarray(sigma, dtype=np.complex128)
        self.Vh = None if V is None else np.asarray(V, dtype=np.complex128).conj().T
        self.reset()

    def reset(self) -> None:
        self._last = None
        self._acc = [0.0, 0.0]

    def __call__(self, t: float, state) -> DiagnosticsRecord:
        state = _as_state(state)
        if self.sigma is not None:
            diam_U = diameter(state.agents)
            state = EnsembleState(state.agents @ self.sigma @ self.Vh)
        else:
            diam_U = math.nan
        T = state.agents
        c1, c2 = commutator_norms(state)
        f1 = self.k1 * float(np.mean(c1**2))
        f2 = self.k2 * float(np.mean(c2**2))
        if self._last is not None:
            t0, g1, g2 = self._last
            h = t - t0
            self._acc[0] += 0.5 * h * (f1 + g1)
            self._acc[1] += 0.5 * h * (f2 + g2)
        self._last = (t, f1, f2)

        rho = float(np.linalg.norm(state.centroid))
        norms = np.linalg.norm(T, axis=(1, 2))
        if np.max(np.abs(norms - 1.0)) <= UNIT_NORM_TOL:
            var, _ = variance(state)
            rate = -(f1 + f2)
        else:
            var = rate = math.nan
        return DiagnosticsRecord(
            t=float(t),
            variance=var,
            variance_rate=rate,
            rho=rho,
            diam_T=diameter(T),
            diam_U=diam_U,
            comm1_max=float(np.max(c1)),
            comm2_max=float(np.max(c2)),
            dissipation1=self._acc[0],
            dissipation2=self._acc[1],
        )


def dissipation_integrals(traj, k1: float, k2: float) -> tuple[float, float]:
    """Trapezoid integrals of the weighted commutator sums over a trajectory."""
    if len(traj.records) != len(traj.times) or not traj.records:
        raise ValidationError("trajectory carries no per-sample diagnostics")
    f1, f2 = [], []
    for rec, s in zip(traj.records, traj.states):
        if rec is None:
            raise ValidationError("trajectory has a sample without diagnostics")
        c1, c2 = commutator_norms(s)
        f1.append(k1 * float(np.mean(c1**2)))
        f2.append(k2 * float(np.mean(c2**2)))
    t = np.asarray(traj.times)
    return float(np.trapezoid(f1, t)), float(np.trapezoid(f2, t))


# -- constants of the frustrated unitary model ---------------------------------

@dataclass(frozen=True)
class AggregationConstants:
    """Constants of the diameter estimates; ``None`` marks an unavailable value."""

    mean_l2: float
    delta_l2: float
    script_a: float
    script_b: float
    d_of_b: float
    k1: float
    kappa_threshold: float | None
    alpha1: float | None
    alpha2: float | None
    beta: float | None
    x_m: float | None
    roots_exist: bool

    @property
    def available(self) -> bool:
        return self.script_b > 0

    def g(self, x):
        """``A x**3 - 2 B x + D(B) / k1``."""
        return self.script_a * x**3 - 2.0 * self.script_b * x + self.d_of_b / self.k1


def _bisect(f, lo: float, hi: float, tol: float = BISECT_TOL) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValidationError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def aggregation_constants(lambda2, B_list, k1: float) -> AggregationConstants:
    """Constants built from the squared singular values and the frequencies ``B_i``."""
    l2 = np.asarray(lambda2, dtype=float).ravel()
    if l2.size == 0 or np.any(l2 < 0) or not np.all(np.isfinite(l2)):
        raise ValidationError("lambda^2 values must be finite and nonnegative")
    if not k1 > 0:
        raise ValidationError("k1 must be positive")
    mean = float(np.mean(l2))
    delta = float(np.max(np.abs(l2 - mean)))
    A, B = mean + delta, mean - delta
    dB = 0.0 if B_list is None or len(B_list) == 0 else diameter(B_list)

    threshold = alpha1 = alpha2 = beta = x_m = None
    roots = False
    if B > 0:
        threshold = dB * math.sqrt(27.0 * A / (32.0 * B**3))
        beta = 3.0 * dB / (4.0 * B * k1)
        x_m = math.sqrt(2.0 * B / (3.0 * A))
        roots = dB == 0.0 or k1 > threshold
        if roots:
            def g(x):
                return A * x**3 - 2.0 * B * x + dB / k1

            x_max = max(2.0, 2.0 * math.sqrt(2.0 * B / A))
            alpha1 = _bisect(g, 0.0, x_m)
            alpha2 = _bisect(g, x_m, x_max)
    return AggregationConstants(
        mean_l2=mean,
        delta_l2=delta,
        script_a=A,
        script_b=B,
        d_of_b=dB,
        k1=float(k1),
        kappa_threshold=threshold,
        alpha1=alpha1,
        alpha2=alpha2,
        beta=beta,
        x_m=x_m,
        roots_exist=roots,
    )


def _envelope_ratio(x0, cap, rate, t):
    # sqrt(cap x0 / (x0 + (cap - x0) e^{rate t})), written to stay finite for large t
    e = np.exp(-rate * np.asarray(t, dtype=float))
    return np.sqrt(cap * x0 * e / (x0 * e + cap - x0))


def exponential_envelope(d_u0: float, c: AggregationConstants, k1: float, t):
    """Lower and upper bounds on the diameter of the unitary ensemble when ``D(B) = 0``."""
    if not c.available:
        raise ValidationError("envelope needs A > 0 and B > 0 (Delta(lambda^2) < <lambda^2>)")
    x0 = float(d_u0) ** 2
    cap = 2.0 * c.script_b / c.script_a
    if not 0.0 <= x0 < cap:
        raise ValidationError(
            f"initial diameter {d_u0} must lie strictly below sqrt(2B/A) = {math.sqrt(cap):.6g}"
        )
    lower = _envelope_ratio(x0, 2.0, 4.0 * k1 * c.script_a, t)
    upper = _envelope_ratio(x0, cap, 4.0 * k1 * c.script_b, t)
    if np.ndim(t) == 0:
        return float(lower), float(upper)
    return lower, upper


def envelope_tail_constant(d_u0: float, c: AggregationConstants) -> float:
    """Limit of ``upper(t) * exp(2 k1 B t)`` as ``t`` grows."""
    x0 = float(d_u0) ** 2
    cap = 2.0 * c.script_b / c.script_a
    if not (c.available and 0.0 <= x0 < cap):
        raise ValidationError("tail constant needs B > 0 and d_u0 < sqrt(2B/A)")
    return math.sqrt(cap * x0 / (cap - x0))


def practical_bound(c: AggregationConstants) -> float:
    """Asymptotic bound ``3 D(B) / (4 B k1)`` on the diameter of the unitary ensemble."""
    if not c.available:
        raise ValidationError("practical bound needs B > 0")
    if not c.roots_exist:
        raise ValidationError(
            f"k1 = {c.k1} does not exceed the threshold {c.kappa_threshold:.6g}"
        )
    return c.beta


# -- diameter differential inequality ----------------------------------------

def diameter_rate_bounds(D, c: AggregationConstants, k1: float, c_B: float = 1.0, lower_form="stated"):
    """Admissible interval for ``dD/dt`` at diameter ``D``.

    ``lower_form="stated"`` gives ``-k1 A (2D + D^3) - c_B D(B)``, the bound
    that follows from the pairwise estimate; ``"stated"`` gives the tighter
    ``-2 k1 A D + k1 A D^3 - c_B D(B)``.
    """
    D = np.asarray(D, dtype=float)
    A, B, dB = c.script_a, c.script_b, c_B * c.d_of_b
    upper = -2.0 * k1 * B * D + k1 * A * D**3 + dB
    if lower_form == "derived":
        lower = -k1 * A * (2.0 * D + D**3) - dB
    elif lower_form == "stated":
        lower = -2.0 * k1 * A * D + k1 * A * D**3 - dB
    else:
        raise ValidationError(f"unknown lower_form {lower_form!r}")
    return lower, upper


@dataclass(frozen=True)
class RateCheck:
    passed: bool
    n_checked: int
    n_skipped: int
    lower_violation: float
    upper_violation: float
    tolerance: float


def check_diameter_rate(times, unitary_states, c, k1, dt, c_B=1.0, lower_form="stated"):
    """Centered differences of the unitary diameter against :func:`diameter_rate_bounds`.

    Samples whose neighbours have a different maximizing pair are skipped
    since the diameter is not differentiable there.  Tolerance is
    ``10 dt^2 + 1e-6``.
    """
    times = np.asarray(times, dtype=float)
    vals, pairs = zip(*(diameter_pair(s.agents if hasattr(s, "agents") else s) for s in unitary_states))
    vals = np.asarray(vals)
    eps = 10.0 * dt**2 + 1e-6
    lo_v = hi_v = -math.inf
    checked = skipped = 0
    for k in range(1, len(times) - 1):
        if not (pairs[k - 1] == pairs[k] == pairs[k + 1]):
            skipped += 1
            continue
        rate = (vals[k + 1] - vals[k - 1]) / (times[k + 1] - times[k - 1])
        lo, hi = diameter_rate_bounds(vals[k], c, k1, c_B, lower_form)
        lo_v = max(lo_v, float(lo - rate))
        hi_v = max(hi_v, float(rate - hi))
        checked += 1
    ok = checked > 0 and lo_v <= eps and hi_v <= eps
    return RateCheck(ok, checked, skipped, lo_v, hi_v, eps)


def sandwich_residuals(T, U, sigma) -> tuple[float, float]:
    """Slack of ``s_min ||U_i - U_j|| <= ||T_i - T_j|| <= s_max ||U_i - U_j||``.

    ``s_min`` and ``s_max`` range over the square roots of the diagonal of
    ``sigma sigma^*``, so ``s_min = 0`` whenever ``d1 > d2``.  Returns the
    largest violation of each side (nonpositive when the bounds hold).
    """
    sigma = np.asarray(sigma)
    s = np.sqrt(np.abs(np.diag(sigma @ sigma.conj().T).real))
    dT = _pairwise(T)
    dU = _pairwise(U)
    return float(np.max(s.min() * dU - dT)), float(np.max(dT - s.max() * dU))
