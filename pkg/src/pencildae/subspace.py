"""Orthonormal-basis subspaces and gap-checked rank decisions."""

from dataclasses import dataclass

import numpy as np

from .errors import ToleranceAmbiguous

DEFAULT_RANK_TOL = 1e-8
DEFAULT_GAP_RATIO = 10.0


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of ``C^n`` given by an orthonormal basis.

    Parameters
    ----------
    basis : ndarray, shape (n, k)
        Orthonormal columns. ``k`` may be zero.
    rank_tol : float
        Relative tolerance used for membership and comparison tests.
    """

    basis: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n, rank_tol=DEFAULT_RANK_TOL):
        return cls(np.zeros((n, 0), dtype=complex), rank_tol)

    @classmethod
    def full(cls, n, rank_tol=DEFAULT_RANK_TOL):
        return cls(np.eye(n, dtype=complex), rank_tol)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "Subspace":
        """Orthogonal complement."""
        if self.dim == 0:
            return Subspace.full(self.n, self.rank_tol)
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return Subspace(q[:, self.dim:], self.rank_tol)

    def residual(self, x) -> float:
        """Relative distance of ``x`` (vector or column block) from the subspace."""
        x = np.asarray(x, dtype=complex)
        if x.ndim == 1:
            x = x[:, None]
        nx = np.linalg.norm(x, 2)
        if nx == 0:
            return 0.0
        r = x - self.basis @ (self.basis.conj().T @ x)
        return float(np.linalg.norm(r, 2) / nx)

    def contains(self, x, tol=None) -> bool:
        tol = self.rank_tol if tol is None else tol
        return self.residual(x) <= tol

    def contains_subspace(self, other: "Subspace", tol=None) -> bool:
        if other.dim == 0:
            return True
        if other.dim > self.dim:
            return False
        return self.contains(other.basis, tol)

    def distance(self, other: "Subspace") -> float:
        """Sine of the largest principal angle; ``inf`` if dimensions differ."""
        if self.dim != other.dim:
            return np.inf
        if self.dim == 0:
            return 0.0
        return self.residual(other.basis)

    def equals(self, other: "Subspace", tol=None) -> bool:
        tol = self.rank_tol if tol is None else tol
        return self.distance(other) <= tol


def _decide_rank(s, ref, rank_tol, gap_ratio):
    thr = rank_tol * ref
    r = int(np.sum(s > thr))
    if 0 < r < len(s) and s[r] > 0 and s[r - 1] / s[r] < gap_ratio:
        raise ToleranceAmbiguous(
            f"no singular-value gap at threshold {thr:.3e}: "
            f"sigma[{r - 1}]={s[r - 1]:.3e}, sigma[{r}]={s[r]:.3e}"
        )
    return r


def orth(M, rank_tol=DEFAULT_RANK_TOL, ref_norm=None, gap_ratio=DEFAULT_GAP_RATIO):
    """Orthonormal basis of ``ran M``.

    Singular values at or below ``rank_tol * ref_norm`` are treated as zero
    (``ref_norm`` defaults to the largest singular value of ``M``). Raises
    :class:`ToleranceAmbiguous` if the two singular values straddling the
    threshold are closer than ``gap_ratio``.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if M.size == 0:
        return Subspace.zero(n, rank_tol)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    ref = s[0] if ref_norm is None else ref_norm
    if ref == 0:
        return Subspace.zero(n, rank_tol)
    r = _decide_rank(s, ref, rank_tol, gap_ratio)
    return Subspace(u[:, :r], rank_tol)


def null_space(M, rank_tol=DEFAULT_RANK_TOL, ref_norm=None, gap_ratio=DEFAULT_GAP_RATIO):
    """Orthonormal basis of ``ker M`` for an ``(m, n)`` matrix."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[1]
    if M.shape[0] == 0:
        return Subspace.full(n, rank_tol)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    ref = (s[0] if len(s) else 0.0) if ref_norm is None else ref_norm
    if ref == 0:
        return Subspace.full(n, rank_tol)
    r = _decide_rank(s, ref, rank_tol, gap_ratio)
    return Subspace(vh[r:].conj().T, rank_tol)


def preimage(M, target: Subspace, rank_tol=DEFAULT_RANK_TOL, ref_norm=None,
             gap_ratio=DEFAULT_GAP_RATIO):
    """``{x : M x in target}`` as a subspace."""
    perp = target.complement()
    return null_space(perp.basis.conj().T @ np.asarray(M, dtype=complex),
                      rank_tol, ref_norm, gap_ratio)


def principal_sines(U: Subspace, W: Subspace) -> np.ndarray:
    """Sines of the principal angles between two subspaces, ascending."""
    if U.dim == 0 or W.dim == 0:
        return np.ones(0)
    if U.dim < W.dim:
        U, W = W, U
    # residual form stays accurate for tiny angles, unlike sqrt(1 - cos^2)
    r = W.basis - U.basis @ (U.basis.conj().T @ W.basis)
    return np.sort(np.linalg.svd(r, compute_uv=False))


def trivially_intersecting(U: Subspace, W: Subspace, threshold=1e-6) -> bool:
    """True iff the smallest principal angle exceeds ``threshold``."""
    s = principal_sines(U, W)
    if s.size == 0:
        return True
    if U.dim + W.dim > U.n:
        return False
    return bool(s[0] > threshold)


def direct_sum_margin(*spaces: Subspace) -> float:
    """Smallest singular value of the stacked bases (0 if dims exceed ``n``)."""
    n = spaces[0].n
    stacked = np.hstack([s.basis for s in spaces])
    if stacked.shape[1] == 0:
        return 1.0 if n == 0 else 0.0
    if stacked.shape[1] > n:
        return 0.0
    return float(np.linalg.svd(stacked, compute_uv=False)[-1])
