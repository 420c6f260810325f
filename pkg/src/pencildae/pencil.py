"""Regular pencils, resolvents and the reductions to bounded operators.

A pencil ``(E, A)`` is stored together with a certified point ``mu`` of its
resolvent set. From ``mu`` we get the bounded pair ``(F, B)`` with
``mu F - B = I`` and the single operator ``T_mu = (mu E - A)^{-1} E`` whose
spectrum mirrors the pencil spectrum under ``tau_mu(z) = 1 / (mu - z)``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import NotRegular, PoleAtMu, SpectrumHit

DEFAULT_TOL = 1e-8

_BASE_CANDIDATES = (0, 1, -1, 1j, -1j, 2, -2, 2j, -2j,
                    0.7 + 0.3j, -0.3 + 0.7j, 3, -3, 3j, -3j,
                    1.618 + 0.577j, -2.236 - 1.414j, 5, -5, 5j, -5j)


def spectral_norm(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


@dataclass(frozen=True, eq=False)
class RegularPencil:
    """Square pencil ``(E, A)`` with a certified resolvent point ``mu``.

    Build instances with :func:`certify_regular`; the constructor does not
    check anything.

    Attributes
    ----------
    E, A : ndarray, complex, shape (n, n)
    mu : complex
    tol : float
        Resolvent tolerance (multiply-back residual bound).
    certificate : dict
        ``cond`` and ``residual`` of ``mu E - A`` at certification time.
    """

    E: np.ndarray
    A: np.ndarray
    mu: complex
    tol: float = DEFAULT_TOL
    certificate: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.E.shape[0]

    @cached_property
    def scale(self) -> float:
        return max(spectral_norm(self.E), spectral_norm(self.A), 1.0)

    @cached_property
    def E_singular(self) -> bool:
        s = np.linalg.svd(self.E, compute_uv=False)
        return bool(s[-1] <= DEFAULT_TOL * max(s[0], np.finfo(float).tiny))

    @property
    def degenerate(self) -> bool:
        """True when ``E`` is invertible (index 0, nothing algebraic to analyze)."""
        return not self.E_singular

    def matrix_at(self, s) -> np.ndarray:
        return s * self.E - self.A

    @cached_property
    def resolvent_at_mu(self) -> np.ndarray:
        return resolvent(self, self.mu)

    def with_mu(self, mu, tol=None) -> "RegularPencil":
        return certify_regular(self.E, self.A, [mu], self.tol if tol is None else tol)


@dataclass(frozen=True, eq=False)
class OperatorPart:
    """``T_mu = (mu E - A)^{-1} E``."""

    T_mu: np.ndarray
    mu: complex

    @property
    def n(self) -> int:
        return self.T_mu.shape[0]

    @cached_property
    def norm(self) -> float:
        return spectral_norm(self.T_mu)


@dataclass(frozen=True, eq=False)
class BoundedReduction:
    """``F = E (mu E - A)^{-1}``, ``B = A (mu E - A)^{-1}``."""

    F: np.ndarray
    B: np.ndarray
    mu: complex

    def identity_defect(self) -> float:
        n = self.F.shape[0]
        return spectral_norm(self.mu * self.F - self.B - np.eye(n))


def _as_square_pair(E, A):
    E = np.atleast_2d(np.asarray(E, dtype=complex))
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ValueError(f"E must be square, got shape {E.shape}")
    if A.shape != E.shape:
        raise ValueError(f"A has shape {A.shape}, expected {E.shape}")
    return E, A


def default_candidates(E, A):
    """Deterministic candidate points scaled by ``||A|| / ||E||``."""
    nE, nA = spectral_norm(E), spectral_norm(A)
    r = nA / nE if nE > 0 and nA > 0 else 1.0
    return [complex(c) * r for c in _BASE_CANDIDATES]


def certify_regular(E, A, candidates=None, tol=DEFAULT_TOL) -> RegularPencil:
    """Find the first candidate ``mu`` at which ``mu E - A`` is safely invertible.

    A candidate qualifies when ``cond(mu E - A) < 1/tol`` and the
    multiply-back residual ``||(mu E - A) R - I||`` is at most ``tol``.

    Raises
    ------
    NotRegular
        If no candidate qualifies.
    """
    E, A = _as_square_pair(E, A)
    cands = default_candidates(E, A) if candidates is None else list(candidates)
    if not cands:
        raise ValueError("candidate set is empty")
    n = E.shape[0]
    eye = np.eye(n)
    for mu in cands:
        mu = complex(mu)
        M = mu * E - A
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] == 0 or s[0] / s[-1] >= 1.0 / tol:
            continue
        R = np.linalg.solve(M, eye)
        res = spectral_norm(M @ R - eye)
        if res <= tol:
            cert = {"cond": float(s[0] / s[-1]), "residual": res}
            return RegularPencil(E, A, mu, tol, cert)
    raise NotRegular(
        f"none of {len(cands)} candidate points certifies sE - A as invertible; "
        "the pencil may be singular"
    )


def resolvent(p: RegularPencil, s) -> np.ndarray:
    """``(sE - A)^{-1}``, verified by its multiply-back residual."""
    M = p.matrix_at(complex(s))
    eye = np.eye(p.n)
    try:
        R = np.linalg.solve(M, eye)
    except np.linalg.LinAlgError:
        raise SpectrumHit(f"sE - A is singular at s = {s}") from None
    if not np.all(np.isfinite(R)):
        raise SpectrumHit(f"sE - A is singular at s = {s}")
    res = spectral_norm(M @ R - eye)
    if res > p.tol:
        raise SpectrumHit(f"sE - A is numerically singular at s = {s} (residual {res:.2e})")
    return R


def tau(mu, z) -> complex:
    """The Moebius map ``1 / (mu - z)``."""
    d = complex(mu) - complex(z)
    if d == 0:
        raise PoleAtMu(f"tau_mu has a pole at z = mu = {mu}")
    return 1.0 / d


def reduce_to_bounded(p: RegularPencil) -> BoundedReduction:
    R = p.resolvent_at_mu
    return BoundedReduction(p.E @ R, p.A @ R, p.mu)


def operator_part(p: RegularPencil) -> OperatorPart:
    M = p.matrix_at(p.mu)
    return OperatorPart(np.linalg.solve(M, p.E), p.mu)


def finite_eigenvalues(E, A, infinite_tol=1e-6) -> np.ndarray:
    """Finite generalized eigenvalues of ``sE - A`` from the QZ algorithm.

    Pairs ``(alpha, beta)`` with ``|alpha| * ||E|| > |beta| * ||A|| / infinite_tol``
    are discarded as infinite. Jordan chains at infinity of length ``d``
    perturb ``beta`` by roughly ``eps**(1/d)``, so for high-index pencils some
    spurious large eigenvalues can slip through; callers that know the Wong
    decomposition should prefer :func:`pencildae.wong.finite_spectrum`.
    """
    if isinstance(E, RegularPencil):
        E, A = E.E, E.A
    E, A = _as_square_pair(E, A)
    w = scipy.linalg.eigvals(A, E, homogeneous_eigvals=True)
    alpha, beta = w[0], w[1]
    nE, nA = spectral_norm(E), spectral_norm(A)
    ratio = nA / nE if nE > 0 and nA > 0 else 1.0
    finite = np.abs(beta) * ratio / infinite_tol > np.abs(alpha)
    finite &= np.abs(beta) > 0
    return np.sort_complex(alpha[finite] / beta[finite])


def eat_defect(p: RegularPencil, op: OperatorPart, s) -> float:
    """Relative mismatch of ``sE - A = (s - mu)(mu E - A)(T_mu - tau_mu(s))``."""
    lhs = p.matrix_at(s)
    rhs = (s - p.mu) * p.matrix_at(p.mu) @ (op.T_mu - tau(p.mu, s) * np.eye(p.n))
    return spectral_norm(lhs - rhs) / (p.scale * max(1.0, abs(s)))


def tt_defect(p: RegularPencil, z, s) -> float:
    """Relative mismatch of ``T_z T_s = -(T_s - T_z) / (s - z)``."""
    Tz = operator_part(p.with_mu(z)).T_mu
    Ts = operator_part(p.with_mu(s)).T_mu
    lhs = Tz @ Ts
    rhs = -(Ts - Tz) / (s - z)
    return spectral_norm(lhs - rhs) / max(spectral_norm(Tz) * spectral_norm(Ts), 1e-300)


def geometric_defect(T, lam, n) -> float:
    """Relative mismatch of ``(T - lam)^{-1}(T^n - lam^n) = sum lam^k T^(n-k-1)``."""
    T = np.asarray(T, dtype=complex)
    d = T.shape[0]
    eye = np.eye(d)
    powers = [eye]
    for _ in range(n):
        powers.append(powers[-1] @ T)
    lhs = np.linalg.solve(T - lam * eye, powers[n] - lam**n * eye)
    rhs = sum(lam**k * powers[n - k - 1] for k in range(n))
    scale = max(1.0, abs(lam), spectral_norm(T)) ** (n - 1)
    return spectral_norm(lhs - rhs) / scale
