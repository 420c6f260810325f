"""Wong sequences and three independent determinations of the pencil index.

The ladder is computed from ``T_mu``: ``N_k = ker T_mu^k`` by repeated
preimages and ``R_k = ran T_mu^k`` by propagating orthonormal range bases.
Powers of ``T_mu`` are never formed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpectrumHit, ToleranceAmbiguous
from .pencil import (OperatorPart, RegularPencil, finite_eigenvalues, operator_part,
                     resolvent, spectral_norm)
from .subspace import (DEFAULT_GAP_RATIO, DEFAULT_RANK_TOL, Subspace, direct_sum_margin,
                       null_space, orth, preimage, trivially_intersecting)

INFINITE = math.inf
DEFAULT_SUBSPACE_TOL = 1e-6

FINITE_DIM_NOTE = ("closedness of the Wong subspaces R_k holds automatically in finite "
                   "dimensions and is not tested")
GROWTH_NOTE = "m_growth is a least-squares estimate from sampled resolvent norms, not a certificate"


@dataclass(frozen=True, eq=False)
class WongLadder:
    """Ascending kernels ``N_k`` and descending ranges ``R_k``, ``k = 0, 1, ...``."""

    N: tuple
    R: tuple
    stationary_at_N: int | None
    stationary_at_R: int | None
    rank_tol: float = DEFAULT_RANK_TOL

    @property
    def dims_N(self):
        return [s.dim for s in self.N]

    @property
    def dims_R(self):
        return [s.dim for s in self.R]

    @property
    def levels(self) -> int:
        return len(self.N)

    @property
    def index(self):
        """Smallest ``m`` with both sequences stationary, or ``inf``."""
        if self.stationary_at_N is None or self.stationary_at_R is None:
            return INFINITE
        return max(self.stationary_at_N, self.stationary_at_R)


@dataclass(frozen=True)
class GrowthEstimate:
    m: int
    slope: float
    residual: float
    radii: tuple
    g: tuple


@dataclass(frozen=True)
class IndexConfig:
    k_max: int | None = None
    rank_tol: float = DEFAULT_RANK_TOL
    gap_ratio: float = DEFAULT_GAP_RATIO
    subspace_tol: float = DEFAULT_SUBSPACE_TOL
    radii: tuple | None = None
    samples_per_radius: int = 16


@dataclass(frozen=True, eq=False)
class IndexReport:
    m_wong: float
    m_growth: int
    m_ascent_descent: float
    spectrum_bounded: bool
    decomposition_ok: bool
    agreement: bool
    fredholm_ok: bool
    degenerate: bool
    ladder: WongLadder
    growth: GrowthEstimate
    operator: OperatorPart
    notes: list = field(default_factory=list)

    @property
    def m(self):
        return self.m_wong

    def to_dict(self) -> dict:
        def enc(v):
            return "infinite" if v == INFINITE else int(v)

        return {
            "m_wong": enc(self.m_wong),
            "m_growth": int(self.m_growth),
            "m_ascent_descent": enc(self.m_ascent_descent),
            "dims_N": self.ladder.dims_N,
            "dims_R": self.ladder.dims_R,
            "agreement": bool(self.agreement),
            "growth_fit": {"slope": float(self.growth.slope),
                           "residual": float(self.growth.residual),
                           "radii": [float(r) for r in self.growth.radii]},
            "decomposition_ok": bool(self.decomposition_ok),
            "fredholm_ok": bool(self.fredholm_ok),
            "spectrum_bounded": bool(self.spectrum_bounded),
            "degenerate": bool(self.degenerate),
            "notes": list(self.notes),
        }


def _first_stationary(spaces, tol):
    for k in range(len(spaces) - 1):
        a, b = spaces[k], spaces[k + 1]
        if a.dim == b.dim and a.equals(b, tol):
            return k
    return None


def wong_ladder(op: OperatorPart, k_max=None, rank_tol=DEFAULT_RANK_TOL,
                gap_ratio=DEFAULT_GAP_RATIO, subspace_tol=DEFAULT_SUBSPACE_TOL,
                full=False) -> WongLadder:
    """Compute ``N_k = ker T^k`` and ``R_k = ran T^k`` for ``k <= k_max + 1``.

    Parameters
    ----------
    op : OperatorPart
    k_max : int, optional
        Largest admissible stationarity level. Defaults to ``n``, where
        stationarity is forced in exact arithmetic.
    rank_tol : float
        Singular values below ``rank_tol * ||T||`` count as zero.
    gap_ratio : float
        Minimum ratio between the singular values straddling the threshold.
    subspace_tol : float
        Tolerance for containment/equality of consecutive levels.
    full : bool
        Compute every level up to ``k_max + 1`` instead of stopping one
        level after both sequences became stationary.

    Raises
    ------
    ToleranceAmbiguous
        If some rank decision lacks a singular-value gap.
    """
    T = op.T_mu
    n = op.n
    k_max = n if k_max is None else int(k_max)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    ref = op.norm
    N = [Subspace.zero(n, rank_tol)]
    R = [Subspace.full(n, rank_tol)]
    for k in range(k_max + 1):
        if ref == 0:
            N.append(Subspace.full(n, rank_tol))
            R.append(Subspace.zero(n, rank_tol))
        else:
            N.append(preimage(T, N[-1], rank_tol, ref, gap_ratio))
            R.append(orth(T @ R[-1].basis, rank_tol, ref, gap_ratio))
        if not full and k >= 1:
            sn = _first_stationary(N, subspace_tol)
            sr = _first_stationary(R, subspace_tol)
            # one extra level past stationarity documents the propagation
            if sn is not None and sr is not None and len(N) >= max(sn, sr) + 3:
                break
    return WongLadder(tuple(N), tuple(R), _first_stationary(N, subspace_tol),
                      _first_stationary(R, subspace_tol), rank_tol)


def translation_defect(p: RegularPencil, ladder: WongLadder, s,
                       gap_ratio=DEFAULT_GAP_RATIO) -> float:
    """Largest subspace distance in the shifted Wong recursions at ``s``.

    Compares ``(sE - A)^{-1} E R_k`` with ``R_{k+1}`` and
    ``E^{-1}(sE - A) N_k`` with ``N_{k+1}`` over all stored levels; returns
    ``inf`` on any dimension mismatch.
    """
    Rs = resolvent(p, s)
    M = p.matrix_at(s)
    rank_tol = ladder.rank_tol
    worst = 0.0
    nE = spectral_norm(p.E)
    for k in range(ladder.levels - 1):
        X = Rs @ p.E @ ladder.R[k].basis
        ref = spectral_norm(Rs @ p.E)
        Rk1 = orth(X, rank_tol, ref, gap_ratio) if ref > 0 else Subspace.zero(p.n)
        worst = max(worst, Rk1.distance(ladder.R[k + 1]))
        W = orth(M @ ladder.N[k].basis, rank_tol, None, gap_ratio)
        if nE == 0:
            Nk1 = Subspace.full(p.n)
        else:
            Nk1 = preimage(p.E, W, rank_tol, nE, gap_ratio)
        worst = max(worst, Nk1.distance(ladder.N[k + 1]))
    return worst


def wong_translation_check(p: RegularPencil, ladder: WongLadder, s_samples,
                           tol=DEFAULT_SUBSPACE_TOL) -> bool:
    """True iff the Wong recursions can be shifted to every ``s`` in ``s_samples``.

    Propagates :class:`SpectrumHit` if some ``s`` lies on the spectrum.
    """
    try:
        return all(translation_defect(p, ladder, s) <= tol for s in s_samples)
    except ToleranceAmbiguous:
        return False


def _range_dims(M, k_max, rank_tol, gap_ratio):
    n = M.shape[0]
    ref = spectral_norm(M)
    Q = Subspace.full(n, rank_tol)
    dims = [n]
    for _ in range(k_max + 1):
        Q = orth(M @ Q.basis, rank_tol, ref, gap_ratio) if ref > 0 else Subspace.zero(n)
        dims.append(Q.dim)
    return dims


def _first_repeat(dims):
    for k in range(len(dims) - 1):
        if dims[k] == dims[k + 1]:
            return k
    return INFINITE


def index_by_ascent_descent(op: OperatorPart, k_max=None, rank_tol=DEFAULT_RANK_TOL,
                            gap_ratio=DEFAULT_GAP_RATIO):
    """Common value of ascent and descent of ``T_mu``.

    The ascent uses ``dim ker T^k = n - dim ran (T^H)^k`` (adjoint ranges),
    the descent uses forward ranges, so the two numbers come from different
    rank decisions. Returns ``inf`` if neither stabilizes by ``k_max``.

    Raises
    ------
    ToleranceAmbiguous
        If ascent and descent disagree, which cannot happen in exact
        arithmetic for square matrices.
    """
    n = op.n
    k_max = n if k_max is None else int(k_max)
    T = op.T_mu
    kernel_dims = [n - d for d in _range_dims(T.conj().T, k_max, rank_tol, gap_ratio)]
    range_dims = _range_dims(T, k_max, rank_tol, gap_ratio)
    alpha = _first_repeat(kernel_dims)
    delta = _first_repeat(range_dims)
    if alpha != delta:
        raise ToleranceAmbiguous(f"ascent {alpha} and descent {delta} disagree")
    return alpha


def _default_radii(bound):
    r0 = 2.0 * bound + 1.0
    return tuple(r0 * np.array([4.0, 8.0, 16.0, 32.0, 64.0]))


def index_by_growth(p: RegularPencil, radii=None, samples_per_radius=16,
                    spectral_bound=None) -> GrowthEstimate:
    """Estimate the index from the growth of ``||(sE - A)^{-1}||`` at infinity.

    For each radius ``r`` the maximum of ``1 / sigma_min(sE - A)`` over
    ``samples_per_radius`` points on ``|s| = r`` is taken; the slope of
    ``log g`` against ``log r`` is fitted by least squares and
    ``m = round(slope) + 1``. ``residual`` is the RMS fit residual.

    When ``radii`` is omitted they are ``(2 rho + 1) * (4, 8, 16, 32, 64)``
    where ``rho`` bounds the finite spectrum (``spectral_bound`` or the QZ
    estimate). Radii whose samples are numerically singular
    (``sigma_min <= 1e3 eps sigma_max``) are dropped.
    """
    if radii is None:
        if spectral_bound is None:
            ev = finite_eigenvalues(p.E, p.A)
            spectral_bound = float(np.max(np.abs(ev))) if ev.size else 0.0
        radii = _default_radii(spectral_bound)
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be increasing")
    angles = 2 * np.pi * (np.arange(samples_per_radius) + 0.5) / samples_per_radius
    eps = np.finfo(float).eps
    kept_r, kept_g = [], []
    for r in radii:
        best = 0.0
        reliable = True
        for theta in angles:
            for jitter in (0.0, 0.37, 0.71):
                s = r * np.exp(1j * (theta + jitter * 2 * np.pi / samples_per_radius))
                sv = np.linalg.svd(p.matrix_at(s), compute_uv=False)
                if sv[-1] > 0:
                    break
            else:
                raise SpectrumHit(f"resolvent samples on |s| = {r} hit the spectrum")
            if sv[-1] <= 1e3 * eps * sv[0]:
                reliable = False
                break
            best = max(best, 1.0 / sv[-1])
        if reliable:
            kept_r.append(r)
            kept_g.append(best)
    if len(kept_r) < 3:
        raise ToleranceAmbiguous("fewer than three radii give numerically reliable resolvent norms")
    x, y = np.log(kept_r), np.log(kept_g)
    coef, *_ = np.polyfit(x, y, 1, full=True)
    slope = float(coef[0])
    fitted = np.polyval(coef, x)
    residual = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return GrowthEstimate(int(round(slope)) + 1, slope, residual, tuple(kept_r), tuple(kept_g))


def kernel_of_E(p: RegularPencil, rank_tol=DEFAULT_RANK_TOL, gap_ratio=DEFAULT_GAP_RATIO):
    nE = spectral_norm(p.E)
    if nE == 0:
        return Subspace.full(p.n, rank_tol)
    return null_space(p.E, rank_tol, nE, gap_ratio)


def fredholm_criterion(p: RegularPencil, ladder: WongLadder, m, threshold=1e-6) -> bool:
    """True iff ``ker E`` and ``R_m`` intersect trivially, i.e. index ``<= m``."""
    if m >= ladder.levels:
        raise ValueError(f"ladder has {ladder.levels} levels, cannot test m = {m}")
    return trivially_intersecting(kernel_of_E(p, ladder.rank_tol), ladder.R[m], threshold)


def finite_spectrum(op: OperatorPart, ladder: WongLadder, m=None) -> np.ndarray:
    """Finite pencil eigenvalues from ``T_mu`` restricted to ``R_m``."""
    m = ladder.index if m is None else m
    if m == INFINITE:
        raise ValueError("ladder is not stationary")
    Q = ladder.R[m].basis
    if Q.shape[1] == 0:
        return np.zeros(0, dtype=complex)
    lam = np.linalg.eigvals(Q.conj().T @ op.T_mu @ Q)
    return np.sort_complex(op.mu - 1.0 / lam)


def index_report(p: RegularPencil, config: IndexConfig | None = None) -> IndexReport:
    """Run the Wong, ascent/descent and growth criteria and cross-check them."""
    cfg = config or IndexConfig()
    op = operator_part(p)
    ladder = wong_ladder(op, cfg.k_max, cfg.rank_tol, cfg.gap_ratio, cfg.subspace_tol)
    m_wong = ladder.index
    m_ad = index_by_ascent_descent(op, cfg.k_max, cfg.rank_tol, cfg.gap_ratio)

    decomposition_ok = False
    fredholm_ok = False
    bound = None
    if m_wong != INFINITE:
        m = int(m_wong)
        Nm, Rm = ladder.N[m], ladder.R[m]
        decomposition_ok = (Nm.dim + Rm.dim == p.n
                            and direct_sum_margin(Nm, Rm) > cfg.rank_tol)
        fredholm_ok = fredholm_criterion(p, ladder, m)
        if m >= 1:
            fredholm_ok = fredholm_ok and not fredholm_criterion(p, ladder, m - 1)
        ev = finite_spectrum(op, ladder, m)
        bound = float(np.max(np.abs(ev))) if ev.size else 0.0
    growth = index_by_growth(p, cfg.radii, cfg.samples_per_radius, spectral_bound=bound)

    agreement = (m_wong != INFINITE and m_wong == m_ad and decomposition_ok and fredholm_ok
                 and abs(growth.slope + 1 - m_wong) <= 0.5 + growth.residual)
    return IndexReport(
        m_wong=m_wong, m_growth=growth.m, m_ascent_descent=m_ad, spectrum_bounded=True,
        decomposition_ok=decomposition_ok, agreement=bool(agreement),
        fredholm_ok=fredholm_ok, degenerate=p.degenerate, ladder=ladder, growth=growth,
        operator=op, notes=[FINITE_DIM_NOTE, GROWTH_NOTE],
    )
