"""The DAE ``d/dt Tx = x`` for quasi-nilpotent ``T``.

Concrete operators are discretizations of the Volterra operator
``(Vu)(s) = int_0^s u`` on the midpoint grid ``s_i = (i - 1/2) h`` of
``(0, 1)``. Grid functions are measured in the discrete ``L^2`` norm with
weight ``h``. For ``T = -V`` the inverse ``-d/ds`` (zero inflow at ``s = 0``)
generates the right-shift semigroup, giving nontrivial solutions; for
``T = V`` no bounded solution on the half axis exists.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, svds

from .errors import CoefficientOverflow, NotInRange, NotSquareSummable
from .parallel import pmap
from .weierstrass import Trajectory

KINDS = ("volterra", "neg_volterra", "user_matrix")
OVERFLOW_NORM = 1e150
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True, eq=False)
class QNModel:
    """A quasi-nilpotent operator on a finite grid.

    Attributes
    ----------
    kind : {'volterra', 'neg_volterra', 'user_matrix'}
    T : ndarray, shape (n, n)
    grid : ndarray or None
        Midpoint nodes for the Volterra kinds.
    h : float or None
        Mesh width ``1/n`` for the Volterra kinds.
    """

    kind: str
    T: np.ndarray
    grid: np.ndarray | None = None
    h: float | None = None

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def sign(self) -> float:
        return -1.0 if self.kind == "neg_volterra" else 1.0

    @property
    def triangular(self) -> bool:
        return self.kind != "user_matrix"

    def norm(self, u, axis=None):
        """Discrete ``L^2`` norm (weight ``h``) or Euclidean norm for user matrices."""
        u = np.asarray(u)
        w = self.h if self.h is not None else 1.0
        return np.sqrt(w * np.sum(np.abs(u) ** 2, axis=axis))

    def apply(self, u):
        """``T u``; ``u`` may hold several grid functions as columns."""
        u = np.asarray(u)
        if self.triangular:
            return self.sign * self.h * (np.cumsum(u, axis=0) - 0.5 * u)
        return self.T @ u

    def apply_adjoint(self, u):
        u = np.asarray(u)
        if self.triangular:
            return self.sign * self.h * (np.cumsum(u[::-1], axis=0)[::-1] - 0.5 * u)
        return self.T.conj().T @ u

    def solve_shifted(self, s, b):
        """``(T - s)^{-1} b``."""
        M = self.T - s * np.eye(self.n)
        if self.triangular:
            return scipy.linalg.solve_triangular(M, b, lower=True)
        return np.linalg.solve(M, b)

    def spectral_radius(self) -> float:
        if self.triangular:
            return float(np.max(np.abs(np.diag(self.T))))
        return float(np.max(np.abs(np.linalg.eigvals(self.T)))) if self.n else 0.0


def make_volterra(n, negated=False) -> QNModel:
    """Lower-triangular quadrature matrix of ``V`` (or ``-V``) on ``n`` midpoints.

    Entries are ``h`` below the diagonal and ``h/2`` on it, so the
    eigenvalues are all ``h/2`` and constants integrate exactly.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    h = 1.0 / n
    T = np.tril(np.full((n, n), h), -1) + 0.5 * h * np.eye(n)
    if negated:
        T = -T
    grid = (np.arange(n) + 0.5) * h
    return QNModel("neg_volterra" if negated else "volterra", T, grid, h)


def user_model(T, qn_tol=None) -> QNModel:
    """Wrap a user matrix after checking that its spectral radius is at most ``qn_tol``.

    The default ``qn_tol`` is ``1e-4 * max(||T||, 1)``: eigenvalues of a
    nilpotent matrix are only computed to about ``eps**(1/n)``.
    """
    T = np.atleast_2d(np.asarray(T))
    if T.shape[0] != T.shape[1]:
        raise ValueError("T must be square")
    model = QNModel("user_matrix", T)
    tol = 1e-4 * max(np.linalg.norm(T, 2), 1.0) if qn_tol is None else qn_tol
    rho = model.spectral_radius()
    if rho > tol:
        raise ValueError(f"spectral radius {rho:.3e} exceeds quasi-nilpotence tolerance {tol:.3e}")
    return model


def shift_semigroup(u, t, grid=None):
    """``v(s) = u(s - t)`` for ``s >= t`` and ``0`` otherwise, on the midpoint grid.

    Shifts by whole cells are exact index shifts; other shifts interpolate
    linearly between nodes (constant below the first node).
    """
    u = np.asarray(u)
    n = u.shape[0]
    if t < 0:
        raise ValueError("t must be nonnegative")
    h = 1.0 / n
    grid = (np.arange(n) + 0.5) * h if grid is None else np.asarray(grid)
    k = t / h
    if abs(k - round(k)) <= 1e-9 * max(1.0, k):
        k = int(round(k))
        v = np.zeros_like(u)
        if k < n:
            v[k:] = u[: n - k]
        return v
    src = grid - t
    if np.iscomplexobj(u):
        v = np.interp(src, grid, u.real) + 1j * np.interp(src, grid, u.imag)
    else:
        v = np.interp(src, grid, u)
    return np.where(src >= 0, v, 0.0)


@dataclass(frozen=True)
class SemigroupReport:
    max_residual: float
    residuals: np.ndarray
    times: np.ndarray


def semigroup_solution_check(model: QNModel, x0, times) -> SemigroupReport:
    """Check that ``x(t) = T_t x0`` solves ``d/dt Tx = x`` for ``T = -V``.

    The time derivative of ``T x(t)`` is taken by central differences; the
    residual at each interior time is measured in the discrete ``L^2`` norm.
    """
    if model.kind != "neg_volterra":
        raise ValueError("the shift semigroup solves the DAE only for T = -V")
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise ValueError("need at least three times")
    X = np.stack([shift_semigroup(x0, t, model.grid) for t in times], axis=1)
    TX = model.apply(X)
    dTX = (TX[:, 2:] - TX[:, :-2]) / (times[2:] - times[:-2])
    res = model.norm(dTX - X[:, 1:-1], axis=0)
    return SemigroupReport(float(np.max(res)) if res.size else 0.0, res, times[1:-1])


def default_s_grid(s0=1.0, j_max=20):
    return s0 * 2.0 ** -np.arange(j_max + 1)


@dataclass(frozen=True)
class LinfReport:
    """Samples of ``||[(T - s)^{-1} T]^{n+1} x0||`` over ``s`` and ``n``.

    ``values[i, n]`` belongs to ``s_grid[i]``; ``profile[n]`` is the maximum
    over ``s``. ``inf`` marks overflow.
    """

    score: float
    profile: np.ndarray
    values: np.ndarray
    s_grid: np.ndarray
    x0_norm: float
    bounded: bool
    growth_flag: bool
    overflow: bool
    skipped_s: tuple = ()

    def to_dict(self) -> dict:
        def enc(v):
            return float(v) if np.isfinite(v) else "inf"

        return {
            "score": enc(self.score),
            "x0_norm": self.x0_norm,
            "bounded": self.bounded,
            "growth_flag": self.growth_flag,
            "overflow": self.overflow,
            "s_grid": [float(s) for s in self.s_grid],
            "profile": [enc(v) for v in self.profile],
            "skipped_s": [float(s) for s in self.skipped_s],
        }


def _iterate_linf(model, x0, s, n_max):
    M = model.T - s * np.eye(model.n)
    if model.triangular:
        if np.any(np.diag(M) == 0):
            return None

        def solve(b):
            return scipy.linalg.solve_triangular(M, b, lower=True)
    else:
        lu = scipy.linalg.lu_factor(M, check_finite=False)
        if np.any(np.diag(lu[0]) == 0):
            return None

        def solve(b):
            return scipy.linalg.lu_solve(lu, b)
    out = np.full(n_max, np.inf)
    v = np.array(x0, dtype=np.result_type(x0, float))
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_max):
            v = solve(model.apply(v))
            nv = model.norm(v)
            if not np.isfinite(nv) or nv > OVERFLOW_NORM:
                break
            out[k] = nv
    return out


def linf_condition(model: QNModel, x0, s_grid=None, n_max=64, slack=0.05,
                   n_threshold=None) -> LinfReport:
    """Sample the bounded-solution criterion ``sup ||[(T - s)^{-1} T]^{n+1} x0||``.

    ``s`` ranges over ``s_grid`` (default ``2**-j``, ``j <= 20``) and
    ``n`` over ``0 .. n_max - 1``. ``bounded`` means the score stays below
    ``(1 + slack) ||x0||``. ``growth_flag`` is set when the profile exceeds
    that bound and is nondecreasing from ``n_threshold`` (default
    ``n_max // 4``) on.
    """
    x0 = np.asarray(x0)
    s_grid = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    if np.any(s_grid <= 0):
        raise ValueError("s_grid must be positive")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    nx = float(model.norm(x0))
    rows = pmap(lambda s: _iterate_linf(model, x0, s, n_max), list(s_grid))
    skipped = tuple(float(s) for s, r in zip(s_grid, rows) if r is None)
    used = np.array([s for s, r in zip(s_grid, rows) if r is not None])
    values = np.array([r for r in rows if r is not None]).reshape(len(used), n_max)
    profile = values.max(axis=0) if values.size else np.zeros(n_max)
    score = float(profile.max()) if profile.size else 0.0
    bound = (1 + slack) * nx
    n_threshold = n_max // 4 if n_threshold is None else n_threshold
    tail = profile[n_threshold:]
    with np.errstate(invalid="ignore"):
        nondecreasing = bool(np.all((tail[1:] >= tail[:-1] * (1 - 1e-12)) | np.isinf(tail[1:])))
    return LinfReport(
        score=score, profile=profile, values=values, s_grid=used, x0_norm=nx,
        bounded=bool(score <= bound), growth_flag=bool(score > bound and nondecreasing
                                                      and tail[-1] > bound),
        overflow=bool(np.isinf(score)), skipped_s=skipped,
    )


def series_bound_check(model: QNModel, s, N=20, terms_tol=1e-16):
    """Both sides of ``sum_{n<=N} ||[(T-s)^{-1}T]^{n+1}|| <= sum_k 2^(k-1) s^-k ||T^k||``.

    Requires ``s > 2 ||T||`` so that the right-hand series converges.
    """
    T = model.T
    normT = np.linalg.norm(T, 2)
    if not s > 2 * normT:
        raise ValueError("need s > 2 ||T||")
    n = model.n
    K = np.linalg.solve(T - s * np.eye(n), T)
    lhs = 0.0
    P = np.eye(n)
    for _ in range(N + 1):
        P = K @ P
        lhs += np.linalg.norm(P, 2)
    rhs = 0.0
    Tk = np.eye(n)
    k = 0
    while True:
        k += 1
        Tk = Tk @ T
        term = 2.0 ** (k - 1) * s ** (-k) * np.linalg.norm(Tk, 2)
        rhs += term
        if term <= terms_tol * rhs or k > 10_000:
            break
    return float(lhs), float(rhs)


@dataclass(frozen=True, eq=False)
class FourierSolution:
    """Truncated Fourier representation of the ``L^2`` solution on ``[0, tau]``.

    ``c[j]`` is the coefficient for ``k = ks[j]``.
    """

    tau: float
    y: np.ndarray
    ks: np.ndarray
    c: np.ndarray
    Tc: np.ndarray
    ell2_tail: float
    tail_ratio: float
    boundary_defect: float = 0.0
    dae_residual: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return int(self.ks[-1])

    @property
    def omegas(self):
        return 2 * np.pi * self.ks / self.tau

    def coeff(self, k):
        return self.c[int(k) + self.k_max]

    def x(self, t):
        """Synthesized solution, shape ``(n, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.c.T @ np.exp(1j * np.outer(self.omegas, t))

    def _periodic_coeffs(self):
        # Fourier coefficients of Tx(t) + (1/2 - t/tau) y
        ks = self.ks
        F = self.Tc.copy()
        nz = ks != 0
        F[nz] += self.y[None, :] / (2j * np.pi * ks[nz])[:, None]
        return F

    def Tx(self, t):
        """``T x(t)`` as sawtooth plus periodic series; shape ``(n, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        F = self._periodic_coeffs()
        saw = np.outer(self.y, t / self.tau - 0.5)
        return saw + F.T @ np.exp(1j * np.outer(self.omegas, t))

    def dTx(self, t):
        """Term-by-term time derivative of :meth:`Tx`."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        F = self._periodic_coeffs() * (1j * self.omegas)[:, None]
        return self.y[:, None] / self.tau + F.T @ np.exp(1j * np.outer(self.omegas, t))


def _l2_time_norm(model, R, t):
    """``sqrt(int ||R(t)||^2 dt)`` by the trapezoidal rule."""
    v = model.norm(R, axis=0) ** 2
    if t.size < 2:
        return float(np.sqrt(v.sum()))
    return float(np.sqrt(np.trapezoid(v, t)))


def in_range_residual(model: QNModel, y):
    """Relative least-squares residual of ``T w = y`` and the solution ``w``."""
    y = np.asarray(y)
    ny = model.norm(y)
    if ny == 0:
        return 0.0, np.zeros_like(y)
    if model.triangular:
        w = scipy.linalg.solve_triangular(model.T, y, lower=True)
    else:
        w = np.linalg.lstsq(model.T, y, rcond=None)[0]
    return float(model.norm(model.apply(w) - y) / ny), w


def l2_fourier_solve(model: QNModel, y, tau, k_max, t_grid=None, range_tol=1e-8,
                     tol_bp=1e-6):
    """Solve ``d/dt Tx = x``, ``Tx(tau) - Tx(0) = y`` by the Fourier series.

    Coefficients are ``c_k = (1/tau)(I - 2 pi i k T / tau)^{-1} y`` for
    ``|k| <= k_max``. ``T x`` is synthesized as the explicit sawtooth
    ``(t/tau - 1/2) y`` plus a periodic series, which is differentiated term
    by term for the DAE residual.

    Returns
    -------
    FourierSolution, Trajectory

    Raises
    ------
    NotInRange
        If ``y`` is not numerically in the range of ``T``.
    NotSquareSummable
        If ``||c_k||`` does not decay over the last quarter of the ``k`` range.
    """
    if k_max < 8:
        raise ValueError("k_max must be >= 8")
    if not tau > 0:
        raise ValueError("tau must be positive")
    y = np.asarray(y, dtype=complex)
    res, _ = in_range_residual(model, y)
    if res > range_tol:
        raise NotInRange(f"y is not in ran T (relative residual {res:.2e})", residual=res)
    ks = np.arange(-k_max, k_max + 1)
    omegas = 2 * np.pi * ks / tau
    eye = np.eye(model.n)

    def coeff(om):
        M = eye - 1j * om * model.T
        if model.triangular:
            return scipy.linalg.solve_triangular(M, y / tau, lower=True)
        return np.linalg.solve(M, y / tau)

    c = np.array(pmap(coeff, list(omegas))).reshape(len(ks), model.n)
    Tc = model.apply(c.T).T
    norms = model.norm(c, axis=1)
    q = max(k_max // 4, 1)
    pos = np.abs(ks)
    last = norms[(pos > k_max - q)]
    prev = norms[(pos > k_max - 2 * q) & (pos <= k_max - q)]
    tail_ratio = float(last.mean() / prev.mean()) if prev.mean() > 0 else 0.0
    if tail_ratio >= 1.0:
        raise NotSquareSummable(f"||c_k|| does not decay (tail ratio {tail_ratio:.3f})")
    tail = _ell2_tail(ks, norms, k_max)
    sol = FourierSolution(float(tau), y, ks, c, Tc, tail, tail_ratio)

    t = np.linspace(0.0, tau, 2 * k_max + 2) if t_grid is None else np.asarray(t_grid, float)
    X = sol.x(t)
    G = sol.Tx(np.array([0.0, tau]))
    boundary = float(model.norm(G[:, 1] - G[:, 0] - y))
    dae = _l2_time_norm(model, sol.dTx(t) - X, t)
    sol = FourierSolution(float(tau), y, ks, c, Tc, tail, tail_ratio, boundary, dae,
                          {"coefficient_norms": norms})
    traj = Trajectory(t, X.T, dae, bool(boundary <= tol_bp), {"boundary_defect": boundary})
    return sol, traj


def _ell2_tail(ks, norms, k_max):
    """Estimate ``sum_{|k| > k_max} ||c_k||^2`` from a power-law fit of the upper half."""
    sel = (np.abs(ks) > k_max // 2) & (norms > 0)
    if np.count_nonzero(sel) < 4:
        return 0.0
    kk = np.abs(ks[sel]).astype(float)
    slope, icpt = np.polyfit(np.log(kk), np.log(norms[sel]), 1)
    p = -slope
    if p <= 0.5:
        return math.inf
    C = math.exp(icpt)
    return float(2 * C**2 * k_max ** (1 - 2 * p) / (2 * p - 1))


@dataclass(frozen=True, eq=False)
class TaylorSolution:
    """Power series ``x(t) = sum_k x_k t^k`` stored as directions and log norms.

    ``x_k = exp(log_norms[k]) * directions[k]``; a zero coefficient has log
    norm ``-inf`` and zero direction.
    """

    x0: np.ndarray
    directions: np.ndarray
    log_norms: np.ndarray
    radius_estimate: float
    a_estimate: float
    radius_bound_ok: bool
    window: tuple

    @property
    def k_max(self) -> int:
        return len(self.log_norms) - 1

    def coefficient(self, k):
        ln = self.log_norms[k]
        if ln > _LOG_MAX:
            raise CoefficientOverflow(f"||x_{k}|| = exp({ln:.1f}) is not representable")
        return np.exp(ln) * self.directions[k] if np.isfinite(ln) else np.zeros_like(self.x0)

    @property
    def coeffs(self):
        return [self.coefficient(k) for k in range(self.k_max + 1)]

    def recursion_defects(self, model: QNModel):
        """Relative defects ``||(k+1) T x_{k+1} - x_k|| / ||x_k||``, overflow-free."""
        out = []
        for k in range(self.k_max):
            if not np.isfinite(self.log_norms[k]):
                out.append(0.0 if not np.any(self.directions[k + 1]) else np.inf)
                continue
            ratio = math.exp(self.log_norms[k + 1] - self.log_norms[k])
            r = (k + 1) * ratio * model.apply(self.directions[k + 1]) - self.directions[k]
            out.append(float(model.norm(r) / model.norm(self.directions[k])))
        return np.array(out)


def power_norms(model: QNModel, k_max):
    """Spectral norms ``||T^k||`` for ``k = 1 .. k_max``."""
    n = model.n
    if model.triangular and n > 400:
        v0 = np.ones(n) / math.sqrt(n)
        out = []
        for k in range(1, k_max + 1):
            def mv(x, k=k):
                x = np.asarray(x).ravel()
                for _ in range(k):
                    x = model.apply(x)
                return x

            def rmv(x, k=k):
                x = np.asarray(x).ravel()
                for _ in range(k):
                    x = model.apply_adjoint(x)
                return x

            L = LinearOperator((n, n), matvec=mv, rmatvec=rmv, dtype=float)
            out.append(float(svds(L, k=1, v0=v0, tol=1e-14, return_singular_vectors=False)[0]))
        return np.array(out)
    P = np.eye(n)
    out = []
    for _ in range(k_max):
        P = model.apply(P)
        out.append(float(np.linalg.norm(P, 2)))
    return np.array(out)


def taylor_solve(model: QNModel, x0, k_max, range_tol=1e-9, slack=0.1) -> TaylorSolution:
    """Coefficients of the analytic solution of ``T x' = x``, ``x(0) = x0``.

    ``x_{k+1} = T^{-1} x_k / (k + 1)``, iterated on normalized vectors with
    the log norm tracked separately so that ``k!`` growth cannot overflow.
    ``radius_estimate`` is ``1 / max ||x_k||^{1/k}`` and ``a_estimate`` is
    ``min k ||T^k||^{1/k}``, both over the last quarter of ``k``.

    Raises
    ------
    NotInRange
        If some ``x_k`` is not in ``ran T`` (solve residual above ``range_tol``).
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    x0 = np.asarray(x0)
    n = model.n
    dtype = np.result_type(x0, float)
    dirs = np.zeros((k_max + 1, n), dtype=dtype)
    logs = np.full(k_max + 1, -np.inf)
    nx0 = float(model.norm(x0))
    if nx0 > 0:
        dirs[0] = x0 / nx0
        logs[0] = math.log(nx0)
        for k in range(k_max):
            u = dirs[k]
            if model.triangular:
                v = scipy.linalg.solve_triangular(model.T, u, lower=True) / (k + 1)
            else:
                v = np.linalg.lstsq(model.T, u, rcond=None)[0] / (k + 1)
            res = float(model.norm((k + 1) * model.apply(v) - u) / model.norm(u))
            if not np.isfinite(res) or res > range_tol:
                raise NotInRange(f"x_{k} is not in ran T (relative residual {res:.2e})",
                                 step=k + 1, residual=res)
            nv = float(model.norm(v))
            dirs[k + 1] = v / nv
            logs[k + 1] = logs[k] + math.log(nv)
    lo = max(1, k_max - max(k_max // 4, 1) + 1)
    window = (lo, k_max)
    ks = np.arange(lo, k_max + 1)
    if nx0 > 0:
        root = np.max(logs[lo:] / ks)
        radius = math.exp(-root) if root > -_LOG_MAX else math.inf
    else:
        radius = math.inf
    pn = power_norms(model, k_max)
    with np.errstate(divide="ignore"):
        a_vals = ks * pn[lo - 1:] ** (1.0 / ks)
    a_est = float(np.min(a_vals))
    bound_ok = nx0 == 0 or radius <= a_est / math.e * (1 + slack)
    return TaylorSolution(x0, dirs, logs, radius, a_est, bool(bound_ok), window)


def volterra_norm_asymptotic(n, k_range):
    """Rows ``(k, k! ||V^k||, k ||V^k||^{1/k})`` for the discretized Volterra operator.

    Requires ``n >= 50 max(k_range)`` so that the discretization error stays
    below the asymptotic signal.
    """
    ks = sorted(int(k) for k in k_range)
    if not ks or ks[0] < 1:
        raise ValueError("k_range must contain positive integers")
    if n < 50 * ks[-1]:
        raise ValueError(f"n = {n} is too small for k = {ks[-1]} (need n >= {50 * ks[-1]})")
    norms = power_norms(make_volterra(n), ks[-1])
    return [(k, math.factorial(k) * norms[k - 1], k * norms[k - 1] ** (1.0 / k)) for k in ks]
