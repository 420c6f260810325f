"""Decoupling of finite-index pencils and the homogeneous initial value problem.

With ``P0`` the projector onto ``N_m`` along ``R_m``, ``T_mu`` splits into a
nilpotent block ``S0`` on ``N_m`` and an invertible block ``S1`` on ``R_m``.
The algebraic part admits only the zero solution, so the IVP is solvable
exactly for ``E P0 x0 = 0`` and then ``x(t) = exp((mu - S1^{-1}) t)(I - P0) x0``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedSplit, Infeasible, NotFiniteIndex
from .expm import expm
from .pencil import RegularPencil, spectral_norm
from .projection import oblique_projector
from .subspace import Subspace
from .wong import INFINITE, IndexReport

SPLIT_COND_MAX = 1e8
NILPOTENCY_TOL = 1e-9
FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class WeierstrassDecomposition:
    """Block form of ``T_mu`` with respect to ``C^n = N_m (+) R_m``.

    ``S0`` and ``S1_inv`` are expressed in the orthonormal bases ``N`` and
    ``R`` respectively.
    """

    P0: np.ndarray
    S1_inv: np.ndarray
    S0: np.ndarray
    mu: complex
    m: int
    N: Subspace
    R: Subspace
    split_cond: float = 1.0

    @property
    def T_nilpotent(self) -> np.ndarray:
        """``(mu S0 - I)^{-1} S0``, the operator of the decoupled algebraic part."""
        k = self.S0.shape[0]
        return np.linalg.solve(self.mu * self.S0 - np.eye(k), self.S0)

    @property
    def ode_generator(self) -> np.ndarray:
        """``mu - S1^{-1}`` in ``R`` coordinates."""
        k = self.S1_inv.shape[0]
        return self.mu * np.eye(k) - self.S1_inv


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    residual: float
    consistent: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states and times differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def _nilpotency_degree_ok(S0, m):
    k = S0.shape[0]
    if k == 0:
        return m == 0
    base = max(spectral_norm(S0), 1.0)
    P = np.linalg.matrix_power(S0, m)
    if spectral_norm(P) > NILPOTENCY_TOL * base**m:
        return False
    if m >= 2:
        Q = np.linalg.matrix_power(S0, m - 1)
        return spectral_norm(Q) > NILPOTENCY_TOL * base ** (m - 1)
    return True


def decouple(p: RegularPencil, report: IndexReport) -> WeierstrassDecomposition:
    """Build ``P0``, ``S0`` and ``S1^{-1}`` from the Wong bases in ``report``.

    Raises
    ------
    NotFiniteIndex
        If the Wong and ascent/descent indices are not finite and equal, the
        report's criteria disagree, or ``S0`` fails the nilpotency-degree check.
    IllConditionedSplit
        If the stacked basis ``[N_m, R_m]`` has condition number above 1e8.
    """
    m = report.m_wong
    if m == INFINITE or m != report.m_ascent_descent:
        raise NotFiniteIndex(f"no certified finite index (m_wong={m}, "
                             f"m_ascent_descent={report.m_ascent_descent})")
    m = int(m)
    N, R = report.ladder.N[m], report.ladder.R[m]
    V = np.hstack([N.basis, R.basis])
    sv = np.linalg.svd(V, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else (1.0 if not sv.size else np.inf)
    if cond > SPLIT_COND_MAX:
        raise IllConditionedSplit(f"N_m (+) R_m basis has condition number {cond:.2e}")
    if not (report.agreement and report.decomposition_ok):
        raise NotFiniteIndex("index criteria disagree; no certified splitting")
    T = report.operator.T_mu
    S0 = N.basis.conj().T @ T @ N.basis
    S1 = R.basis.conj().T @ T @ R.basis
    S1_inv = np.linalg.inv(S1) if S1.size else S1
    if not _nilpotency_degree_ok(S0, m):
        raise NotFiniteIndex(f"restriction of T_mu to N_m is not nilpotent of degree {m}")
    return WeierstrassDecomposition(oblique_projector(N, R), S1_inv, S0, p.mu, m, N, R, cond)


def residual_check(p: RegularPencil, traj: Trajectory) -> float:
    """Max over interior points of ``||(Ex(t+h) - Ex(t-h))/(2h) - A x(t)||``."""
    t, X = traj.times, traj.states
    if t.size < 3:
        raise ValueError("need at least three time points")
    EX = X @ p.E.T
    dEX = (EX[2:] - EX[:-2]) / (t[2:] - t[:-2])[:, None]
    res = dEX - X[1:-1] @ p.A.T
    return float(np.max(np.linalg.norm(res, axis=1)))


def propagate(dec: WeierstrassDecomposition, z0, times) -> np.ndarray:
    """States ``R exp(L t) z0`` for ``L = mu - S1^{-1}``."""
    L = dec.ode_generator
    n = dec.P0.shape[0]
    out = np.zeros((len(times), n), dtype=complex)
    if L.size == 0:
        return out
    Q = dec.R.basis
    for i, t in enumerate(times):
        out[i] = Q @ (expm(L * t) @ z0)
    return out


def solve_ivp(p: RegularPencil, dec: WeierstrassDecomposition, x0, times,
              feas_tol=FEASIBILITY_TOL) -> Trajectory:
    """Solve ``d/dt Ex = Ax``, ``Ex(0) = Ex0`` on the grid ``times``.

    Raises
    ------
    Infeasible
        If ``||E P0 x0|| > feas_tol ||E|| ||x0||``, i.e. ``x0`` is not in
        ``R_m (+) ker E``.
    """
    x0 = np.asarray(x0, dtype=complex).ravel()
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] != 0:
        raise ValueError("time grid must start at 0")
    violation = spectral_norm((p.E @ dec.P0 @ x0)[:, None])
    nx = float(np.linalg.norm(x0))
    if violation > feas_tol * spectral_norm(p.E) * nx:
        raise Infeasible(violation)
    z0 = dec.R.basis.conj().T @ (x0 - dec.P0 @ x0)
    X = propagate(dec, z0, times)
    consistent = bool(np.linalg.norm(p.E @ (X[0] - x0))
                      <= feas_tol * max(spectral_norm(p.E) * nx, np.finfo(float).tiny))
    traj = Trajectory(times, X, 0.0, consistent, {"m": dec.m, "violation": violation})
    res = residual_check(p, traj) if times.size >= 3 else 0.0
    return Trajectory(times, X, res, consistent, traj.meta)
