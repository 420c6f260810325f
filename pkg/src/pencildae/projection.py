"""Spectral projectors by trapezoidal quadrature on circles.

Two representations of the same projector are provided: the pencil form
``(1/2 pi i) int_C (zE - A)^{-1} E dz`` and the operator form obtained by
substituting ``lambda = tau_mu(z)`` into the Riesz integral of ``T_mu``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContourTouchesSpectrum, MuInsideContour
from .parallel import pmap
from .pencil import (OperatorPart, RegularPencil, finite_eigenvalues, operator_part,
                     spectral_norm)

MARGIN = 0.05
CONVERGENCE_TOL = 1e-11
MAX_NODES = 1024


@dataclass(frozen=True)
class Contour:
    """Positively oriented circle."""

    center: complex
    radius: float
    nodes: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.nodes < 2:
            raise ValueError("need at least two quadrature nodes")

    def points(self, nodes=None, offset=0.0):
        """Nodes ``z_j`` and ``dz/dtheta`` at ``theta_j = 2 pi (j + offset) / nodes``."""
        N = self.nodes if nodes is None else nodes
        w = np.exp(2j * np.pi * (np.arange(N) + offset) / N)
        return self.center + self.radius * w, 1j * self.radius * w

    def encloses(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def in_annulus(self, z, margin=MARGIN) -> np.ndarray:
        d = np.abs(np.asarray(z) - self.center)
        return (d >= self.radius * (1 - margin)) & (d <= self.radius * (1 + margin))


@dataclass(frozen=True, eq=False)
class SpectralProjector:
    P: np.ndarray
    idempotency_defect: float
    enclosed_eigenvalues: list
    nodes_used: int
    converged: bool
    contour: Contour | None = None
    meta: dict = field(default_factory=dict)

    def diagnostics(self) -> dict:
        return {
            "idempotency_defect": self.idempotency_defect,
            "nodes_used": self.nodes_used,
            "converged": self.converged,
            "enclosed_eigenvalues": [[float(z.real) + 0.0, float(z.imag) + 0.0]
                                     for z in self.enclosed_eigenvalues],
        }


def _idempotency(P):
    return spectral_norm(P @ P - P)


def _trapezoid(integrand, contour: Contour):
    """Trapezoidal rule ``(1/N) sum_j f(theta_j)`` with automatic node doubling.

    ``integrand(z, dz)`` returns the matrix-valued integrand times
    ``dz/dtheta / (2 pi i)`` up to sign conventions handled by the caller.
    Doubling reuses the previous nodes: the midpoint sum is added.
    """
    N = contour.nodes

    def total(N, offset):
        zs, dzs = contour.points(N, offset)
        terms = pmap(lambda zd: integrand(*zd), list(zip(zs, dzs)))
        return sum(terms) / N

    P = total(N, 0.0)
    converged = False
    while N < MAX_NODES:
        P2 = 0.5 * (P + total(N, 0.5))
        N *= 2
        diff = spectral_norm(P2 - P)
        P = P2
        if diff < CONVERGENCE_TOL * max(1.0, spectral_norm(P)):
            converged = True
            break
    return P, N, converged


def check_contour(p: RegularPencil, c: Contour, eigenvalues=None):
    """Validate the contour against the pencil and return enclosed eigenvalues."""
    ev = finite_eigenvalues(p.E, p.A) if eigenvalues is None else np.asarray(eigenvalues)
    if np.any(c.in_annulus(ev)):
        raise ContourTouchesSpectrum(
            f"pencil eigenvalue within {MARGIN:.0%} of the circle |z - {c.center}| = {c.radius}")
    if abs(p.mu - c.center) <= c.radius * (1 + MARGIN):
        raise MuInsideContour(f"mu = {p.mu} is not in the exterior of the contour")
    return [complex(z) for z in ev[c.encloses(ev)]]


def project_pencil_form(p: RegularPencil, c: Contour, eigenvalues=None) -> SpectralProjector:
    """``P = (1/2 pi i) int_C (zE - A)^{-1} E dz``."""
    enclosed = check_contour(p, c, eigenvalues)
    E, A = p.E, p.A

    def integrand(z, dz):
        # dz/(2 pi i) per unit of theta/(2 pi); dz = i r w
        return np.linalg.solve(z * E - A, E) * (dz / 1j)

    P, N, ok = _trapezoid(integrand, c)
    return SpectralProjector(P, _idempotency(P), enclosed, N, ok, c, {"form": "pencil"})


def project_operator_form(p: RegularPencil, c: Contour, eigenvalues=None,
                          op: OperatorPart | None = None) -> SpectralProjector:
    """``P = -(1/2 pi i) int_C tau(z)^2 (T_mu - tau(z))^{-1} dz``.

    This is the Riesz projection of ``T_mu`` along the image contour
    ``tau_mu(C)``, written back on ``C`` through the substitution
    ``d lambda = tau(z)^2 dz``; no reparametrization of the image is needed.
    """
    enclosed = check_contour(p, c, eigenvalues)
    op = operator_part(p) if op is None else op
    T = op.T_mu
    eye = np.eye(p.n)
    mu = p.mu

    def integrand(z, dz):
        t = 1.0 / (mu - z)
        return -np.linalg.solve(T - t * eye, eye) * (t * t * dz / 1j)

    P, N, ok = _trapezoid(integrand, c)
    return SpectralProjector(P, _idempotency(P), enclosed, N, ok, c, {"form": "operator"})


def riesz_at_zero(op: OperatorPart, radius, nodes=64) -> SpectralProjector:
    """``P_0 = -(1/2 pi i) int_{|lambda| = radius} (T_mu - lambda)^{-1} d lambda``."""
    c = Contour(0.0, float(radius), nodes)
    T = op.T_mu
    ev = np.linalg.eigvals(T)
    if np.any(c.in_annulus(ev)):
        raise ContourTouchesSpectrum(f"eigenvalue of T_mu within {MARGIN:.0%} of radius {radius}")
    eye = np.eye(op.n)

    def integrand(lam, dlam):
        return -np.linalg.solve(T - lam * eye, eye) * (dlam / 1j)

    P, N, ok = _trapezoid(integrand, c)
    enclosed = [complex(z) for z in ev[c.encloses(ev)]]
    return SpectralProjector(P, _idempotency(P), enclosed, N, ok, c, {"form": "riesz"})


def oblique_projector(onto, along) -> np.ndarray:
    """Projector onto ``onto`` along ``along`` (two complementary subspaces)."""
    V = np.hstack([onto.basis, along.basis])
    k = onto.dim
    D = np.zeros(V.shape[1])
    D[:k] = 1.0
    return (V * D) @ np.linalg.inv(V)


def riesz_radius(op: OperatorPart, finite_part_eigs) -> float:
    """Radius isolating zero: half the smallest nonzero ``|lambda|`` of ``T_mu``."""
    lam = np.asarray(finite_part_eigs)
    if lam.size == 0:
        return max(op.norm, 1.0)
    return 0.5 * float(np.min(np.abs(lam)))
