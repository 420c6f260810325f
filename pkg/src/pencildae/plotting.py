"""Figures for the command-line reports. Rendered off-screen to files."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_index_report(report, path):
    """Wong dimensions per level and the resolvent growth fit."""
    fig, (a0, a1) = plt.subplots(1, 2, figsize=(9, 3.6))
    lv = np.arange(report.ladder.levels)
    a0.step(lv, report.ladder.dims_N, where="post", label="dim N_k")
    a0.step(lv, report.ladder.dims_R, where="post", label="dim R_k")
    a0.set_xlabel("k")
    a0.set_title(f"Wong sequences, m = {report.m_wong}")
    a0.legend()
    g = report.growth
    if g.radii:
        r, v = np.array(g.radii), np.array(g.g)
        a1.loglog(r, v, "o", label="max ||(sE-A)^{-1}||")
        c = np.mean(np.log(v) - g.slope * np.log(r))
        a1.loglog(r, np.exp(c) * r ** g.slope, "-", label=f"slope {g.slope:.3f}")
        a1.legend()
    a1.set_xlabel("|s|")
    a1.set_title(f"growth fit, m = {report.m_growth}")
    return _save(fig, path)


def plot_trajectory(times, states, path, title="trajectory"):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    X = np.abs(np.asarray(states))
    for i in range(X.shape[1]):
        ax.plot(times, X[:, i], lw=1, label=f"|x_{i + 1}|" if X.shape[1] <= 8 else None)
    if X.shape[1] <= 8:
        ax.legend(fontsize="small")
    ax.set_xlabel("t")
    ax.set_title(title)
    return _save(fig, path)


def plot_projector(E_eigs, contour, path):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ev = np.asarray(E_eigs)
    ax.plot(ev.real, ev.imag, "kx", label="eigenvalues")
    th = np.linspace(0, 2 * np.pi, 200)
    z = contour.center + contour.radius * np.exp(1j * th)
    ax.plot(z.real, z.imag, "-", label="contour")
    ax.set_aspect("equal")
    ax.legend(fontsize="small")
    ax.set_title("spectral projector contour")
    return _save(fig, path)


def plot_volterra_asymptotic(rows, path):
    k = np.array([r[0] for r in rows])
    f = np.array([r[1] for r in rows])
    a = np.array([r[2] for r in rows])
    fig, (a0, a1) = plt.subplots(1, 2, figsize=(9, 3.6))
    a0.plot(k, f, "o-")
    a0.axhline(0.5, color="gray", ls="--")
    a0.set_xlabel("k")
    a0.set_title("k! ||V^k||")
    a1.plot(k, a, "o-")
    a1.axhline(np.e, color="gray", ls="--")
    a1.set_xlabel("k")
    a1.set_title("k ||V^k||^(1/k)")
    return _save(fig, path)


def plot_fourier(sol, traj, model, path):
    fig, (a0, a1) = plt.subplots(1, 2, figsize=(9, 3.6))
    norms = sol.meta["coefficient_norms"]
    pos = sol.ks > 0
    a0.loglog(sol.ks[pos], norms[pos], ".", ms=3, label="k > 0")
    a0.loglog(-sol.ks[sol.ks < 0], norms[sol.ks < 0], ".", ms=3, label="k < 0")
    a0.set_xlabel("|k|")
    a0.set_title("||c_k||")
    a0.legend()
    a1.plot(traj.times, model.norm(traj.states, axis=1))
    a1.set_xlabel("t")
    a1.set_title("||x(t)||")
    return _save(fig, path)


def plot_linf(report, path):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    n = np.arange(report.profile.size)
    prof = np.where(np.isfinite(report.profile), report.profile, np.nan)
    ax.semilogy(n, prof, "o-", ms=3, label="max over s")
    ax.axhline(report.x0_norm, color="gray", ls="--", label="||x0||")
    ax.set_xlabel("n")
    ax.set_title("||[(T-s)^{-1}T]^{n+1} x0||")
    ax.legend()
    return _save(fig, path)
