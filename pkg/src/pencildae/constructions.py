"""Pencils with known Weierstrass structure, used by presets and tests."""

import numpy as np


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_invertible(n, rng, cond=3.0):
    """Random complex matrix with singular values in ``[1, cond]``."""
    s = np.exp(rng.uniform(0.0, np.log(cond), n))
    return random_unitary(n, rng) @ np.diag(s) @ random_unitary(n, rng)


def nilpotent_jordan(sizes):
    """Block diagonal matrix of upper shift Jordan blocks of the given sizes."""
    total = int(sum(sizes))
    J = np.zeros((total, total))
    o = 0
    for b in sizes:
        for i in range(b - 1):
            J[o + i, o + i + 1] = 1.0
        o += b
    return J


def weierstrass_pencil(M, nilpotent_sizes, U=None, W=None, rng=None, cond=3.0):
    """``E = U diag(I, J) W``, ``A = U diag(M, I) W``.

    ``J`` is built from Jordan blocks of the given sizes, so the index equals
    ``max(nilpotent_sizes)`` (0 if there are none) and the finite spectrum is
    the spectrum of ``M``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex)) if np.size(M) else np.zeros((0, 0), complex)
    nf = M.shape[0]
    J = nilpotent_jordan(nilpotent_sizes)
    nn = J.shape[0]
    n = nf + nn
    if U is None or W is None:
        rng = np.random.default_rng() if rng is None else rng
        U = random_invertible(n, rng, cond) if U is None else U
        W = random_invertible(n, rng, cond) if W is None else W
    Ed = np.zeros((n, n), dtype=complex)
    Ad = np.zeros((n, n), dtype=complex)
    Ed[:nf, :nf] = np.eye(nf)
    Ed[nf:, nf:] = J
    Ad[:nf, :nf] = M
    Ad[nf:, nf:] = np.eye(nn)
    return U @ Ed @ W, U @ Ad @ W


def random_weierstrass(rng, d=None, n_max=20, eig_radius=3.0, cond=3.0):
    """Random pencil of index ``d`` (drawn from 1..5 if omitted) with ``n <= n_max``.

    Returns ``(E, A, d, finite_eigenvalues)``.
    """
    d = int(rng.integers(1, 6)) if d is None else int(d)
    n = int(rng.integers(d + 1, n_max + 1))
    nn = int(rng.integers(d, n))
    sizes = [d]
    rest = nn - d
    while rest > 0:
        b = int(rng.integers(1, min(d, rest) + 1))
        sizes.append(b)
        rest -= b
    nf = n - nn
    eigs = eig_radius * (rng.uniform(-1, 1, nf) + 1j * rng.uniform(-1, 1, nf))
    E, A = weierstrass_pencil(np.diag(eigs), sizes, rng=rng, cond=cond)
    return E, A, d, eigs


def random_index1(rng, n=None, n_max=12, eig_radius=3.0):
    """Generic pencil with singular ``E`` (index 1 with probability one)."""
    n = int(rng.integers(3, n_max + 1)) if n is None else n
    r = int(rng.integers(1, n))
    E = (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))) @ \
        (rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))) / np.sqrt(2 * r)
    A = eig_radius * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    return E, A
