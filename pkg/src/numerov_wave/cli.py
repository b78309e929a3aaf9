"""``numerov-wave`` command line front end.

Every subcommand accepts ``--config FILE`` (see :mod:`numerov_wave.config`);
explicit flags override values from the file.  Outputs go to ``--out`` and
are written atomically; the effective configuration is saved next to them
as ``config.ini``.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, modal, reference, spectral
from .config import ExperimentConfig, parse_complex, parse_real
from .errors import ConvergenceError, MeshError, ReferenceAccuracyError, SingularOperatorError
from .mesh import MeshFamilySpec, extend_mesh
from .scheme import SchemeConfig, run

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_NUMERICAL = 3


# output ---------------------------------------------------------------------------

@contextlib.contextmanager
def _atomic_path(path: Path):
    """Yield a temporary path in the target directory; rename onto ``path`` on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _write_with(path: Path, writer) -> Path:
    with _atomic_path(path) as tmp:
        writer(tmp)
    return path


def _write_text(path: Path, text: str) -> Path:
    def w(tmp):
        with open(tmp, "w") as fh:
            fh.write(text)
    return _write_with(path, w)


def _write_rows(path: Path, header, rows) -> Path:
    def w(tmp):
        with open(tmp, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(header)
            out.writerows(rows)
    return _write_with(path, w)


def _r(x) -> str:
    return repr(float(x))


# helpers --------------------------------------------------------------------------

def _mesh(cfg: ExperimentConfig):
    base = cfg.resolve_mesh()
    return base, (extend_mesh(MeshFamilySpec(base, cfg.K)) if cfg.K > 1 else base)


def _tau(cfg: ExperimentConfig, K: int) -> float:
    if cfg.tau is not None:
        return cfg.tau
    if cfg.tau_rule is not None:
        return cfg.tau_rule / K
    raise ValueError("no time step: give --tau or --tau-rule")


def _scheme_config(cfg: ExperimentConfig, T: float) -> SchemeConfig:
    if cfg.M is not None:
        return SchemeConfig(cfg.a, T / cfg.M, cfg.M, cfg.sigma)
    return SchemeConfig.for_time(T, _tau(cfg, cfg.K), cfg.a, cfg.sigma)


def _initial_profile(name: str):
    if name == "bump":
        return reference.bump
    if name == "sine":
        return lambda x: np.sin(np.pi * np.asarray(x, dtype=float))
    if name == "zero":
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))
    raise ValueError(f"unknown initial profile {name!r}; use bump, sine or zero")


def _meta(path: Path, **items) -> Path:
    lines = [f"{k} = {v}" for k, v in items.items()]
    return _write_text(path, "\n".join(lines) + "\n")


# subcommands ----------------------------------------------------------------------

def cmd_eig(cfg: ExperimentConfig, out: Path) -> int:
    _, mesh = _mesh(cfg)
    spec = spectral.generalized_spectrum(mesh)
    _write_with(out / "spectrum.csv", spec.to_csv)
    print(f"N = {mesh.N}, {spec.summary()}")
    if mesh.is_uniform:
        closed = spectral.uniform_lambda_max(float(mesh.X), mesh.N)
        top = float(max(spec.eigenvalues.real))
        print(f"lambda_max = {top!r}, closed form {closed!r}, relative gap {abs(top - closed) / closed:.3e}")
    return EXIT_OK


def cmd_run(cfg: ExperimentConfig, out: Path) -> int:
    u0 = _initial_profile(cfg.u0)
    X = float(cfg.resolve_mesh().X)
    if X != 1.0 and cfg.u0 == "bump":
        raise ValueError("the bump profile is defined on [0, 1]")
    _, mesh = _mesh(cfg)
    T_end = max(cfg.T)
    sc = _scheme_config(cfg, T_end)
    ref = reference.project(u0, X=X, a=cfg.a) if cfg.u0 != "zero" else None
    times = sorted(set(cfg.T) | set(cfg.snapshots))
    result = run(u0(mesh.interior), np.zeros(mesh.N - 1), mesh, sc, times)

    _write_with(out / "snapshots.csv", result.write_snapshots)
    _write_with(out / "history.csv", result.write_history)
    _write_rows(out / "growth.csv", ["t", "l2h"], [(_r(t), _r(y)) for t, y in analysis.growth_curve(result)])
    rows = []
    for t in cfg.T:
        m = round(t / sc.tau)
        if m in result.snapshots:
            exact = ref if ref is not None else (lambda x, _t: np.zeros_like(x))
            err = analysis.nodal_error(result.snapshots[m], mesh, exact, t)
        else:
            err = math.inf
        rows.append((cfg.K, _r(t), _r(sc.tau), m, _r(err)))
        print(f"e_{cfg.K}({t:g}) = {err:.6e}")
    _write_rows(out / "errors.csv", ["K", "T", "tau", "M", "error"], rows)
    _meta(out / "meta.txt", N=mesh.N, tau=repr(sc.tau), M=sc.M, T=repr(sc.T), saturated=result.saturated)
    if result.saturated:
        print("run saturated: max |v| exceeded 1e300, errors past that level reported as inf")
    return EXIT_OK


def cmd_table(cfg: ExperimentConfig, out: Path, kappa_pr: bool = False) -> int:
    base = cfg.resolve_mesh()
    if kappa_pr:
        K = cfg.K if cfg.K > 1 else 20
        M = cfg.M if cfg.M is not None else 14400
        T1, T2 = (cfg.T[0], cfg.T[1]) if len(cfg.T) >= 2 else (4.0, 6.0)
        rep = analysis.kappa_pr_experiment(base, K, M, T1, T2, cfg.mode, cfg.a, cfg.sigma)
        _write_rows(
            out / "kappa.csv",
            ["mode", "K", "T", "tau", "M", "error"],
            [(rep.mode, r.K, _r(r.T), _r(r.tau), r.M, _r(r.error)) for r in rep.rows],
        )
        print(f"{rep.mode}: e({T1:g}) = {rep.rows[0].error:.6e}, e({T2:g}) = {rep.rows[1].error:.6e}")
        print(f"kappa_pr = {rep.kappa_pr:.6f}, kappa0 = {rep.kappa0:.6f}, relative gap {rep.relative_gap:.3%}")
        return EXIT_OK
    if cfg.tau is not None:
        rule = lambda K: cfg.tau  # noqa: E731
    else:
        rule = analysis.tau_rule(cfg.tau_rule if cfg.tau_rule is not None else 0.01)
    table = analysis.error_table(base, cfg.K_list, rule, cfg.T, cfg.a, cfg.sigma, workers=cfg.workers)
    _write_with(out / "table.csv", table.to_csv)
    for r in table.rows:
        print(f"e_{r.K}({r.T:g}) = {r.error:.6e}  (tau = {r.tau:.6g}, M = {r.M})")
    return EXIT_OK


def cmd_search(cfg: ExperimentConfig, out: Path) -> int:
    lo, hi = (cfg.n0[0], cfg.n0[-1])
    search = analysis.MeshSearch(range(lo, hi + 1), cfg.alphabet, cfg.budget, cfg.include)
    for rep in search:
        print(f"{' '.join(map(str, rep.steps))} /{rep.denominator}: lambda = {rep.dominant:.6g}, kappa0 = {rep.kappa0:.6g}")
    _write_with(out / "search.csv", search.to_csv)
    status = "complete" if search.complete else "incomplete (budget exhausted)"
    _meta(out / "meta.txt", visited=search.visited, hits=len(search.hits), status=status)
    print(f"visited {search.visited} candidates, {len(search.hits)} hits, enumeration {status}")
    return EXIT_OK


def cmd_check(cfg: ExperimentConfig, out: Path) -> int:
    base, mesh = _mesh(cfg)
    tau = _tau(cfg, cfg.K)
    rows = []
    if mesh.is_uniform:
        if cfg.eps0 is None:
            raise ValueError("the uniform-mesh check needs --eps0")
        rep = analysis.check_cfl_uniform(mesh, cfg.a, tau, cfg.eps0)
        rows.append(("cfl_ratio", _r(rep.ratio_lhs), _r(rep.rhs), _r(rep.ratio_margin), int(rep.passed)))
        rows.append(("cfl_eigenvalue", _r(rep.eig_lhs), _r(rep.rhs), _r(rep.eig_margin), int(rep.eig_passed)))
        print(f"CFL ratio form: {rep.ratio_lhs:.6g} <= {rep.rhs:.6g}: {'pass' if rep.passed else 'fail'}")
        print(f"CFL eigenvalue form: {rep.eig_lhs:.6g} <= {rep.rhs:.6g}: {'pass' if rep.eig_passed else 'fail'}")
    else:
        base_spec = spectral.generalized_spectrum(base)
        fam = analysis.check_family_condition(base, cfg.K, tau, cfg.kappa, cfg.a, base_spec)
        if fam.vacuous:
            print("base spectrum is real: family condition vacuous")
            rows.append(("family", "", "", "", 1))
        else:
            rows.append(("family", _r(fam.lhs), _r(fam.rhs), _r(fam.margin), int(fam.passed)))
            print(f"family condition: {fam.lhs:.6g} <= {fam.rhs:.6g}: {'pass' if fam.passed else 'fail'}")
            print(f"implied bound tau <= {fam.tau_bound:.6g} = {fam.tau_bound_over_hmin_sq:.6g} h_min^2")
        lam = base_spec.pairs[0].lam * cfg.K**2
        nc = modal.necessary_conditions(modal.ModalParams(lam, tau, cfg.a, cfg.sigma), cfg.kappa)
        for c in nc.checks:
            rows.append((c.name, _r(c.lhs), _r(c.rhs), _r(c.margin), int(c.passed())))
            print(f"{c.name}: {c.lhs:.6g} <= {c.rhs:.6g}: {'pass' if c.passed() else 'fail'}")
    _write_rows(out / "check.csv", ["condition", "lhs", "rhs", "margin", "pass"], rows)
    return EXIT_OK


def cmd_modal(cfg: ExperimentConfig, out: Path) -> int:
    if cfg.lam is None:
        _, mesh = _mesh(cfg)
        lam = spectral.generalized_spectrum(mesh).pairs[0].lam
    else:
        lam = cfg.lam
    taus = cfg.taus or ((cfg.tau,) if cfg.tau is not None else tuple(1e-3 * 2.0**-k for k in range(6)))
    params = [modal.ModalParams(lam, t, cfg.a, cfg.sigma) for t in taus]
    _write_with(out / "modal.csv", lambda p: modal.write_modal_report(params, p, cfg.kappa))
    for p in params:
        amp = modal.amplification(p)
        print(f"tau = {p.tau:.6g}: |q| = {amp.abs_q!r}, kappa0 = {modal.kappa0(p.lam, p.a):.6f}")
    return EXIT_OK


# argument parsing -----------------------------------------------------------------

def _float_list(text: str) -> tuple[float, ...]:
    return tuple(parse_real(t) for t in text.replace(",", " ").split())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI experiment configuration")
    src = common.add_mutually_exclusive_group()
    src.add_argument("--mesh", metavar="FILE", help="mesh file (X and integer steps over a denominator)")
    src.add_argument("--steps", metavar="N1,N2,.../DEN", help="inline integer steps")
    src.add_argument("--uniform", type=int, metavar="N", help="uniform mesh with N intervals on [0, 1]")
    src.add_argument("--critical", action="store_true", help="the 14-interval critical mesh (default)")
    common.add_argument("--K", type=int, help="family refinement factor")
    common.add_argument("--a", type=parse_real, help="wave speed")
    common.add_argument("--sigma", type=parse_real, help="scheme weight, default 1/12")
    common.add_argument("--tau", type=parse_real, help="time step")
    common.add_argument("--tau-rule", type=parse_real, metavar="C", help="time step C/K")
    common.add_argument("--T", type=_float_list, metavar="T1,T2,...", help="final/report times")
    common.add_argument("--M", type=int, help="number of time steps (overrides the time step)")
    common.add_argument("--out", help="output directory")

    parser = argparse.ArgumentParser(prog="numerov-wave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("eig", parents=[common], help="generalized mesh spectrum")

    p = sub.add_parser("run", parents=[common], help="run the scheme and compare with the exact solution")
    p.add_argument("--snapshots", type=_float_list, metavar="T1,T2,...")
    p.add_argument("--u0", choices=("bump", "sine", "zero"))

    p = sub.add_parser("table", parents=[common], help="error table over family meshes")
    p.add_argument("--K-list", type=_int_list, metavar="K1,K2,...")
    p.add_argument("--kappa-pr", action="store_true", help="practical growth rate between two times instead")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--fixed-M", dest="mode", action="store_const", const="fixed-M")
    mode.add_argument("--fixed-tau", dest="mode", action="store_const", const="fixed-tau")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("search", parents=[common], help="brute-force search for critical meshes")
    p.add_argument("--n0", type=_int_list, metavar="LO,HI", help="range of interval counts")
    p.add_argument("--alphabet", type=_int_list, metavar="S1,S2,...")
    p.add_argument("--budget", type=int)
    p.add_argument("--include", action="append", type=_int_list, metavar="N1,N2,...",
                   help="step vector visited before the enumeration (repeatable)")

    p = sub.add_parser("check", parents=[common], help="stability conditions")
    p.add_argument("--eps0", type=parse_real)
    p.add_argument("--kappa", type=parse_real)

    p = sub.add_parser("modal", parents=[common], help="amplification factors for one eigenvalue")
    p.add_argument("--lam", type=parse_complex, help="eigenvalue, e.g. 3529.9+27.2044i (default: dominant of the mesh)")
    p.add_argument("--taus", type=_float_list, metavar="TAU1,TAU2,...")
    p.add_argument("--kappa", type=parse_real)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config is not None:
        cfg = ExperimentConfig.from_ini(args.config.read_text())
    mesh = None
    if args.mesh is not None:
        mesh = f"file:{args.mesh}"
    elif args.steps is not None:
        mesh = f"steps:{args.steps}"
    elif args.uniform is not None:
        mesh = f"uniform:{args.uniform}"
    elif args.critical:
        mesh = "critical"
    overrides = dict(mesh=mesh, K=args.K, a=args.a, sigma=args.sigma, T=args.T, M=args.M, out=args.out)
    for name in ("snapshots", "u0", "mode", "workers", "n0", "alphabet", "budget", "eps0", "kappa", "lam", "taus"):
        overrides[name] = getattr(args, name, None)
    overrides["K_list"] = getattr(args, "K_list", None)
    if getattr(args, "include", None):
        overrides["include"] = tuple(args.include)
    # a step given on the command line replaces the other kind from the file
    if args.tau is not None:
        cfg = replace(cfg, tau_rule=None)
        overrides["tau"] = args.tau
    if args.tau_rule is not None:
        cfg = replace(cfg, tau=None)
        overrides["tau_rule"] = args.tau_rule
    return cfg.with_overrides(**overrides)


COMMANDS = {
    "eig": cmd_eig,
    "run": cmd_run,
    "table": cmd_table,
    "search": cmd_search,
    "check": cmd_check,
    "modal": cmd_modal,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        out = Path(cfg.out)
        if args.command == "table":
            code = cmd_table(cfg, out, kappa_pr=args.kappa_pr)
        else:
            code = COMMANDS[args.command](cfg, out)
        _write_text(out / "config.ini", cfg.to_ini())
        return code
    except (SingularOperatorError, ConvergenceError, ReferenceAccuracyError, ArithmeticError) as exc:
        print(f"numerov-wave: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (MeshError, ValueError, OSError) as exc:
        print(f"numerov-wave: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
