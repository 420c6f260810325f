"""Command-line entry point.

Exit codes: 0 ok, 1 input/parse error, 2 index criteria disagree,
3 ambiguous rank decision, 4 infeasible initial value, 5 singular pencil,
6 contour or evaluation point hits the spectrum, 7 no usable finite-index
splitting, 8 quasi-nilpotent solver precondition failed. Failures print a
JSON object on stderr.
"""

import argparse
import io as _io
import math
import os
import sys

import numpy as np

from . import io, plotting, qnlab
from .errors import Infeasible, PencilError
from .pencil import DEFAULT_TOL, certify_regular, finite_eigenvalues, operator_part
from .presets import PENCIL_PRESETS, PRESETS, QN_PRESETS, pencil_preset, qn_preset
from .projection import (Contour, project_operator_form, project_pencil_form, riesz_at_zero,
                         riesz_radius)
from .subspace import DEFAULT_RANK_TOL
from .weierstrass import FEASIBILITY_TOL, decouple, solve_ivp
from .wong import INFINITE, IndexConfig, finite_spectrum, index_report

TOL_KEYS = ("certify", "rank", "subspace", "feasibility", "range")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _tol_map(items):
    """``--tol 1e-8`` sets certify and rank; ``--tol key=value`` sets one entry."""
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        try:
            if not sep:
                v = float(key)
                out["certify"] = out["rank"] = v
                continue
            if key not in TOL_KEYS:
                raise UsageError(f"unknown tolerance {key!r}; choose from {', '.join(TOL_KEYS)}")
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"bad tolerance {item!r}") from None
    return out


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="pencil JSON file")
    p.add_argument("--preset", choices=PRESETS, help="built-in problem")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized presets")
    p.add_argument("--tol", action="append", metavar="[KEY=]VALUE",
                   help=f"tolerance override; keys: {', '.join(TOL_KEYS)}")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--plot", nargs="?", const="", default=None, metavar="PNG",
                   help="render a figure; without a path it goes next to --out")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="pencildae", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("analyze", parents=[common], help="index report and Riesz projector")

    s = sub.add_parser("solve", parents=[common], help="homogeneous IVP on a time grid")
    s.add_argument("--x0-file", help="initial value vector file")
    s.add_argument("--x0", help="comma-separated initial value, e.g. 1,0")
    s.add_argument("--t-end", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1e-3)

    p = sub.add_parser("project", parents=[common], help="spectral projector for a circle")
    p.add_argument("--center", type=complex, default=0j)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--form", choices=("pencil", "operator"), default="pencil")

    q = sub.add_parser("qnlab", help="quasi-nilpotent DAE experiments")
    qs = q.add_subparsers(dest="qn_command", required=True, parser_class=_Parser)
    a = qs.add_parser("volterra-asymptotic", parents=[common])
    a.add_argument("--n", type=int, default=2000)
    a.add_argument("--kmax", type=int, default=15)
    f = qs.add_parser("l2solve", parents=[common])
    f.add_argument("--n", type=int, default=400)
    f.add_argument("--tau", type=float, default=1.0)
    f.add_argument("--kmax", type=int, default=512)
    f.add_argument("--y-file", help="boundary difference y (default T sin(pi s))")
    f.add_argument("--nt", type=int, default=257, help="number of output times")
    ls = qs.add_parser("linf-score", parents=[common])
    ls.add_argument("--n", type=int, default=400)
    ls.add_argument("--x0-file", help="initial function (default s(1-s))")
    ls.add_argument("--smin", type=float, default=2.0**-20)
    ls.add_argument("--nmax", type=int, default=64)
    return parser


def _load_pencil(args, tols):
    if (args.input is None) == (args.preset is None):
        raise UsageError("give exactly one of --input and --preset")
    mu = None
    if args.input:
        E, A, mu = io.read_pencil(args.input)
    else:
        if args.preset not in PENCIL_PRESETS:
            raise UsageError(f"preset {args.preset!r} is not a pencil")
        E, A = pencil_preset(args.preset, args.seed)
    return certify_regular(E, A, candidates=None if mu is None else [mu],
                           tol=tols.get("certify", DEFAULT_TOL))


def _qn_model(args):
    if args.input:
        raise UsageError("qnlab commands take --preset volterra or neg-volterra")
    name = args.preset or "neg-volterra"
    if name not in QN_PRESETS:
        raise UsageError(f"preset {name!r} is not a quasi-nilpotent model")
    return qn_preset(name, args.n)


def _index_config(tols):
    kw = {"rank_tol": tols.get("rank", DEFAULT_RANK_TOL)}
    if "subspace" in tols:
        kw["subspace_tol"] = tols["subspace"]
    return IndexConfig(**kw)


def _plot_path(args, stem):
    if args.plot is None:
        return None
    if args.plot:
        return args.plot
    if args.out:
        return os.path.splitext(args.out)[0] + ".png"
    return f"pencildae-{stem}.png"


def cmd_analyze(args, tols):
    p = _load_pencil(args, tols)
    rep = index_report(p, _index_config(tols))
    data = rep.to_dict()
    data["mu"] = io.encode_complex(p.mu)
    data["n"] = p.n
    if rep.m_wong != INFINITE:
        op = operator_part(p)
        s = finite_spectrum(op, rep.ladder, int(rep.m_wong))
        lam = 1.0 / (p.mu - s)
        P = riesz_at_zero(op, riesz_radius(op, lam))
        data["riesz_projector"] = P.diagnostics()
        data["riesz_projector"]["rank"] = int(round(np.trace(P.P).real))
        data["finite_eigenvalues"] = [io.encode_complex(z) for z in s]
    code = 0 if rep.agreement else 2
    if args.format == "csv":
        buf = _io.StringIO()
        io.write_table_csv(buf, ["k", "dim_N", "dim_R"],
                           [(k, a, b) for k, (a, b) in
                            enumerate(zip(rep.ladder.dims_N, rep.ladder.dims_R))])
        text = buf.getvalue()
    else:
        text = io.dumps(data)
    plot = _plot_path(args, "analyze")
    if plot:
        plotting.plot_index_report(rep, plot)
    return text, code, None


def _x0(args, n):
    if args.x0_file and args.x0:
        raise UsageError("give only one of --x0-file and --x0")
    if args.x0_file:
        x0 = io.read_vector(args.x0_file)
    elif args.x0:
        x0 = np.array([complex(t.strip().replace("i", "j")) for t in args.x0.split(",")])
    else:
        raise UsageError("solve needs --x0-file or --x0")
    if x0.size != n:
        raise UsageError(f"x0 has {x0.size} entries, pencil has n = {n}")
    return x0


def cmd_solve(args, tols):
    p = _load_pencil(args, tols)
    x0 = _x0(args, p.n)
    if not (args.dt > 0 and args.t_end > 0):
        raise UsageError("--dt and --t-end must be positive")
    steps = int(round(args.t_end / args.dt))
    times = np.linspace(0.0, steps * args.dt, steps + 1)
    dec = decouple(p, index_report(p, _index_config(tols)))
    traj = solve_ivp(p, dec, x0, times, tols.get("feasibility", FEASIBILITY_TOL))
    side = {"feasible": True, "residual": traj.residual, "m": dec.m,
            "consistent": traj.consistent, "violation": traj.meta["violation"]}
    if args.format == "json":
        side["t"] = [float(t) for t in times]
        side["x"] = [[io.encode_complex(v) for v in row] for row in traj.states]
        text = io.dumps(side)
        sidecar = None
    else:
        buf = _io.StringIO()
        io.write_trajectory_csv(buf, times, traj.states)
        text = buf.getvalue()
        sidecar = side
    plot = _plot_path(args, "solve")
    if plot:
        plotting.plot_trajectory(times, traj.states, plot, f"index {dec.m} solution")
    return text, 0, sidecar


def cmd_project(args, tols):
    p = _load_pencil(args, tols)
    c = Contour(args.center, args.radius, args.nodes)
    ev = finite_eigenvalues(p.E, p.A)
    form = project_pencil_form if args.form == "pencil" else project_operator_form
    P = form(p, c, ev)
    data = P.diagnostics()
    data["form"] = args.form
    data["P"] = io.encode_matrix(P.P)
    plot = _plot_path(args, "project")
    if plot:
        plotting.plot_projector(ev, c, plot)
    return io.dumps(data), 0, None


def cmd_volterra_asymptotic(args, tols):
    if args.kmax < 1:
        raise UsageError("--kmax must be >= 1")
    rows = qnlab.volterra_norm_asymptotic(args.n, range(1, args.kmax + 1))
    if args.format == "json":
        text = io.dumps({"n": args.n, "rows": [{"k": k, "k_factorial_norm": f, "a_k": a}
                                                for k, f, a in rows]})
    else:
        buf = _io.StringIO()
        io.write_table_csv(buf, ["k", "k_factorial_norm", "a_k"], rows)
        text = buf.getvalue()
    plot = _plot_path(args, "volterra-asymptotic")
    if plot:
        plotting.plot_volterra_asymptotic(rows, plot)
    return text, 0, None


def cmd_l2solve(args, tols):
    model = _qn_model(args)
    if args.y_file:
        y = io.read_vector(args.y_file)
        if y.size != model.n:
            raise UsageError(f"y has {y.size} entries, model has n = {model.n}")
    else:
        y = model.apply(np.sin(np.pi * model.grid))
    t = np.linspace(0.0, args.tau, args.nt)
    sol, traj = qnlab.l2_fourier_solve(model, y, args.tau, args.kmax, t,
                                       range_tol=tols.get("range", 1e-8))
    summary = {"tau": sol.tau, "k_max": sol.k_max, "boundary_defect": sol.boundary_defect,
               "dae_residual": sol.dae_residual, "tail_ratio": sol.tail_ratio,
               "ell2_tail": sol.ell2_tail if math.isfinite(sol.ell2_tail) else "inf",
               "model": model.kind, "n": model.n}
    if args.format == "csv":
        buf = _io.StringIO()
        io.write_trajectory_csv(buf, traj.times, traj.states)
        text, side = buf.getvalue(), summary
    else:
        summary["t"] = [float(v) for v in traj.times]
        summary["x_norm"] = [float(v) for v in model.norm(traj.states, axis=1)]
        text, side = io.dumps(summary), None
    plot = _plot_path(args, "l2solve")
    if plot:
        plotting.plot_fourier(sol, traj, model, plot)
    return text, 0, side


def cmd_linf_score(args, tols):
    model = _qn_model(args)
    if args.x0_file:
        x0 = io.read_vector(args.x0_file)
        if x0.size != model.n:
            raise UsageError(f"x0 has {x0.size} entries, model has n = {model.n}")
    else:
        x0 = model.grid * (1 - model.grid)
    if not 0 < args.smin <= 1:
        raise UsageError("--smin must lie in (0, 1]")
    j_max = int(math.floor(math.log2(1.0 / args.smin) + 1e-12))
    rep = qnlab.linf_condition(model, x0, qnlab.default_s_grid(1.0, j_max), args.nmax)
    if args.format == "csv":
        buf = _io.StringIO()
        io.write_table_csv(buf, ["n", "max_over_s"],
                           [(k, v) for k, v in enumerate(rep.profile)])
        text = buf.getvalue()
    else:
        data = rep.to_dict()
        data["model"] = model.kind
        text = io.dumps(data)
    plot = _plot_path(args, "linf-score")
    if plot:
        plotting.plot_linf(rep, plot)
    return text, 0, None


COMMANDS = {
    "analyze": cmd_analyze,
    "solve": cmd_solve,
    "project": cmd_project,
    "volterra-asymptotic": cmd_volterra_asymptotic,
    "l2solve": cmd_l2solve,
    "linf-score": cmd_linf_score,
}


def _fail(code, kind, message, **extra):
    sys.stderr.write(io.dumps({"error": kind, "message": message, "exit_code": code, **extra}))
    return code


def _emit(args, text, sidecar):
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        if sidecar is not None:
            with open(os.path.splitext(args.out)[0] + ".json", "w") as f:
                f.write(io.dumps(sidecar))
    else:
        sys.stdout.write(text)
        if sidecar is not None:
            sys.stderr.write(io.dumps(sidecar))


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        tols = _tol_map(args.tol)
        name = args.qn_command if args.command == "qnlab" else args.command
        text, code, sidecar = COMMANDS[name](args, tols)
        _emit(args, text, sidecar)
        return code
    except UsageError as e:
        return _fail(1, "usage", str(e))
    except Infeasible as e:
        return _fail(e.exit_code, "Infeasible", str(e), violation=float(e.violation),
                     feasible=False)
    except PencilError as e:
        return _fail(e.exit_code, type(e).__name__, str(e))
    except (OSError, ValueError) as e:
        return _fail(1, type(e).__name__, str(e))


if __name__ == "__main__":
    sys.exit(main())
