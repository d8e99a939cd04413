"""Command line front end.

Every subcommand writes a JSON report (stdout by default, --out for a
file).  All randomness derives from --seed, so identical invocations
produce byte-identical reports.  Exit codes: 0 when every section passes,
1 when a verdict fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import em as em_mod
from . import multigrid as mg
from . import noether as nt
from .report import ResidualReport
from .timescale import GridFunction, TimeScale, parse_scale_spec, read_csv, write_csv
from .variational import BoundaryData, ConvergenceError, Lagrangian, catalog
from .variational import el_residual, solve_extremal
from .timescale import delta_derivative, delta_integral

SCHEMA_VERSION = 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.cmd is None:
        parser.print_help()
        return 2
    _threads_cap()  # orchestration is sequential; the cap is validated, never exceeded
    try:
        report, ok = args.run(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(report, args)
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noether", description=__doc__)
    parser.set_defaults(cmd=None)
    sub = parser.add_subparsers(dest="cmd")

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--out", default=None, help="write the JSON report here")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--verbose", action="store_true", help="include per-point arrays")
        p.set_defaults(run=fn)
        return p

    p = add("scale", _cmd_scale, help="inspect a scale spec")
    p.add_argument("--scale", required=True)

    for name, fn in (("derive", _cmd_derive), ("integrate", _cmd_integrate)):
        p = add(name, fn, help=f"{name} a grid function")
        p.add_argument("--scale", required=True)
        p.add_argument("--poly", help="semicolon-separated component polynomials 'c0,c1,...'")
        p.add_argument("--csv", help="grid function CSV produced by this tool")
        if name == "derive":
            p.add_argument("--order", type=int, default=1)
            p.add_argument("--result-csv", help="write the derivative here")

    p = add("el", _cmd_el, help="Euler-Lagrange residual along a path")
    p.add_argument("--scale", required=True)
    p.add_argument("--lagrangian", required=True)
    p.add_argument("--poly", help="path polynomials")
    p.add_argument("--csv")
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("solve", _cmd_solve, help="solve the Euler-Lagrange boundary value problem")
    p.add_argument("--scale", required=True)
    p.add_argument("--lagrangian", required=True)
    p.add_argument("--alpha", required=True, help="comma-separated left boundary values")
    p.add_argument("--beta", required=True, help="comma-separated right boundary values")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--result-csv", help="write the extremal here")

    p = add("check-invariance", _cmd_check_invariance, help="random-probe invariance check")
    _family_args(p)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-12)

    p = add("check-noether", _cmd_check_noether, help="gauge identity residual")
    _family_args(p)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("check-noether-time", _cmd_check_noether_time, help="time-transformed identity residual")
    _family_args(p)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("check2d", _cmd_check2d, help="double-integral invariance and identity")
    p.add_argument("--grid", required=True, help="comma-separated scale specs, one per axis")
    p.add_argument("--lagrangian", default="curl2")
    p.add_argument("--family", default="grad2")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--inv-tol", type=float, default=1e-12)

    p = add("em", _cmd_em, help="electromagnetic density checks on a 4-d lattice")
    p.add_argument("--lattice", default="default", help='"default" or 4 comma-separated scale specs')
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("oracle-fl", _cmd_oracle_fl, help="fundamental lemma brute-force oracle")
    p.add_argument("--scale", required=True)
    p.add_argument("--order", type=int, default=1, help="highest derivative order m")
    p.add_argument("--mode", choices=["vanishing", "impulse"], default="vanishing")
    p.add_argument("--tol", type=float, default=1e-10)

    return parser


def _family_args(p):
    p.add_argument("--scale", required=True)
    p.add_argument("--lagrangian", required=True)
    p.add_argument("--family", required=True, help="JSON family file or builtin name")
    p.add_argument("--y-poly", help="path polynomials; default is a seeded random polynomial")


def _emit(report: dict, args) -> None:
    report["schema_version"] = SCHEMA_VERSION
    report["command"] = args.cmd
    report["seed"] = getattr(args, "seed", 0)
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _threads_cap() -> int:
    # Orchestration is sequential; the cap is honored trivially.
    try:
        return max(1, int(os.environ.get("NOETHER_THREADS", "1")))
    except ValueError:
        return 1


def _report_sections(sections: list[dict]) -> tuple[dict, bool]:
    ok = all(s.get("verdict", "pass") == "pass" for s in sections)
    return {"sections": sections, "verdict": "pass" if ok else "fail"}, ok


def _section(name: str, rep: ResidualReport, verbose: bool) -> dict:
    out = rep.to_json(include_per_point=verbose)
    out["name"] = name
    return out


def _load_path(args, ts: TimeScale, n: int, lo: int = 0, hi: int | None = None) -> GridFunction:
    hi = len(ts) - 1 if hi is None else hi
    poly = getattr(args, "poly", None) or getattr(args, "y_poly", None)
    if getattr(args, "csv", None):
        return read_csv(ts, args.csv)
    if poly:
        comps = poly.split(";")
        if len(comps) != n:
            raise ValueError(f"expected {n} component polynomials")
        cols = []
        t = ts.points[lo : hi + 1]
        for comp in comps:
            coeffs = [float(c) for c in comp.split(",")]
            cols.append(np.polynomial.polynomial.polyval(t, coeffs))
        return GridFunction(ts, lo, np.column_stack(cols))
    rng = np.random.default_rng([args.seed, 97])
    vals = np.column_stack(
        [
            np.polynomial.polynomial.polyval(
                ts.points[lo : hi + 1] / max(1.0, np.max(np.abs(ts.points))),
                rng.uniform(-1, 1, 4),
            )
            for _ in range(n)
        ]
    )
    return GridFunction(ts, lo, vals)


# Built-in gauge families keyed by name; files override these.

def _builtin_family(name: str, ts: TimeScale):
    if name == "pairdiff":
        return nt.GaugeFamily.constant(ts, [[[1.0], [1.0]]])
    if name == "pairdiff-broken":
        return nt.GaugeFamily.constant(ts, [[[1.1], [1.0]]])
    if name == "pairdiff-time0":
        return nt.GaugeFamily.constant(ts, [[[1.0], [1.0]]], f=[[0.0]])
    if name == "time-translation":
        return nt.GaugeFamily.constant(ts, [[[0.0]]], f=[[1.0]])
    return None


def _coeff_grid(ts: TimeScale, spec, lo: int, hi: int) -> GridFunction:
    t = ts.points[lo : hi + 1]
    if isinstance(spec, (int, float)):
        vals = np.full(t.size, float(spec))
    elif isinstance(spec, dict) and "poly" in spec:
        vals = np.polynomial.polynomial.polyval(t, [float(c) for c in spec["poly"]])
    elif isinstance(spec, dict) and "csv" in spec:
        return read_csv(ts, spec["csv"]).restrict(lo, hi)
    else:
        raise ValueError(f"bad coefficient spec {spec!r}")
    return GridFunction(ts, lo, vals)


def load_family(path_or_name: str, ts: TimeScale):
    builtin = _builtin_family(path_or_name, ts)
    if builtin is not None:
        return builtin
    with open(path_or_name) as fh:
        data = json.load(fh)
    r, m, n = int(data["r"]), int(data["m"]), int(data["n"])
    lo, hi = 0, len(ts) - 1 - m
    g_spec = data["g"]
    if len(g_spec) != r or any(len(comp) != n for comp in g_spec):
        raise ValueError("family table shape does not match r and n")
    g = tuple(
        tuple(tuple(_coeff_grid(ts, g_spec[j][k][i], lo, hi) for i in range(m + 1)) for k in range(n))
        for j in range(r)
    )
    f = None
    if data.get("f") is not None:
        f = tuple(
            tuple(_coeff_grid(ts, data["f"][j][i], lo, hi) for i in range(m + 1)) for j in range(r)
        )
    return nt.GaugeFamily(g, f)


def _cmd_scale(args):
    ts = parse_scale_spec(args.scale)
    section = {
        "name": "scale",
        "kind": ts.kind,
        "n_points": len(ts),
        "condition_h": list(ts.condition_h) if ts.condition_h else None,
        "points": list(map(float, ts.points)),
        "verdict": "pass",
    }
    return _report_sections([section])


def _cmd_derive(args):
    ts = parse_scale_spec(args.scale)
    f = _load_path(args, ts, 1)
    d = delta_derivative(f, args.order)
    if args.result_csv:
        write_csv(d, args.result_csv)
    section = {
        "name": "derive",
        "order": args.order,
        "domain": list(d.window),
        "values": d.values.tolist() if args.verbose else None,
        "verdict": "pass",
    }
    return _report_sections([section])


def _cmd_integrate(args):
    ts = parse_scale_spec(args.scale)
    f = _load_path(args, ts, 1)
    val = delta_integral(f)
    section = {"name": "integrate", "value": [float(v) for v in val], "verdict": "pass"}
    return _report_sections([section])


def _cmd_el(args):
    ts = parse_scale_spec(args.scale)
    L = catalog(args.lagrangian)
    y = _load_path(args, ts, L.n)
    rep = el_residual(L, y, tolerance=args.tol)
    return _report_sections([_section("el", rep, args.verbose)])


def _cmd_solve(args):
    ts = parse_scale_spec(args.scale)
    L = catalog(args.lagrangian)
    bd = BoundaryData(
        np.array([float(x) for x in args.alpha.split(",")]),
        np.array([float(x) for x in args.beta.split(",")]),
    )
    y = solve_extremal(L, ts, bd, tol=args.tol)
    if args.result_csv:
        write_csv(y, args.result_csv)
    rep = el_residual(L, y, tolerance=args.tol)
    section = _section("solve", rep, args.verbose)
    section["solution"] = y.values.tolist() if args.verbose else None
    return _report_sections([section])


def _cmd_check_invariance(args):
    ts = parse_scale_spec(args.scale)
    L = catalog(args.lagrangian)
    fam = load_family(args.family, ts)
    y = _load_path(args, ts, L.n, hi=len(ts) - 1 - fam.m)
    rep = nt.check_invariance(L, fam, y, trials=args.trials, seed=args.seed, tolerance=args.tol)
    return _report_sections([_section("invariance", rep, args.verbose)])


def _identity_sections(args, time_variant: bool):
    ts = parse_scale_spec(args.scale)
    L = catalog(args.lagrangian)
    fam = load_family(args.family, ts)
    y = _load_path(args, ts, L.n, hi=len(ts) - 1 - fam.m)
    fn = nt.noether_identity_time if time_variant else nt.noether_identity
    reports = fn(L, fam, y, tolerance=args.tol)
    return [_section(f"identity-j{j}", rep, args.verbose) for j, rep in enumerate(reports)]


def _cmd_check_noether(args):
    return _report_sections(_identity_sections(args, time_variant=False))


def _cmd_check_noether_time(args):
    return _report_sections(_identity_sections(args, time_variant=True))


def catalog2d(name: str, d: int = 2) -> mg.LagrangianD:
    if name == "curl2":
        def density(coords, U, G):
            return 0.5 * (G[0][1] - G[1][0]) ** 2

        def d_u(coords, U, G):
            return np.zeros_like(U)

        def d_g(coords, U, G):
            out = np.zeros_like(G)
            F = G[0][1] - G[1][0]
            out[0][1] = F
            out[1][0] = -F
            return out

        return mg.LagrangianD(d=2, n=2, density=density, d_u=d_u, d_g=d_g)
    if name == "dirichlet2":
        def density(coords, U, G):
            return 0.5 * (G[0][0] ** 2 + G[1][0] ** 2)

        def d_u(coords, U, G):
            return np.zeros_like(U)

        def d_g(coords, U, G):
            return G.copy()

        return mg.LagrangianD(d=2, n=1, density=density, d_u=d_u, d_g=d_g)
    raise ValueError(f"unknown 2-d Lagrangian {name!r}")


def _builtin_family2d(name: str, grid: mg.GridD):
    if name == "grad2":
        return mg.GaugeFamilyD.constant(grid, [(0.0, 1.0, 0.0), (0.0, 0.0, 1.0)])
    if name == "grad2-broken":
        return mg.GaugeFamilyD.constant(grid, [(0.0, 1.1, 0.0), (0.0, 0.0, 1.0)])
    return None


def load_family2d(path_or_name: str, grid: mg.GridD):
    builtin = _builtin_family2d(path_or_name, grid)
    if builtin is not None:
        return builtin
    with open(path_or_name) as fh:
        data = json.load(fh)
    return mg.GaugeFamilyD.constant(grid, [tuple(map(float, row)) for row in data["a"]])


def _cmd_check2d(args):
    specs = args.grid.split(",")
    grid = mg.GridD(tuple(parse_scale_spec(s) for s in specs))
    L = catalog2d(args.lagrangian)
    fam = load_family2d(args.family, grid)
    u = tuple(
        mg.random_polynomial_field(grid, seed=[args.seed, 7 + k], degree=2, amplitude=1.0)
        for k in range(L.n)
    )
    inv = mg.check_invariance_d(L, fam, u, trials=args.trials, seed=args.seed, tolerance=args.inv_tol)
    ident = mg.noether_identity_d(L, fam, u, tolerance=args.tol)
    return _report_sections(
        [_section("invariance", inv, args.verbose), _section("identity", ident, args.verbose)]
    )


def _cmd_em(args):
    if args.lattice == "default":
        grid = em_mod.default_lattice(6)
    else:
        specs = args.lattice.split(",")
        if len(specs) != 4:
            raise ValueError("the lattice needs 4 scale specs")
        grid = mg.GridD(tuple(parse_scale_spec(s) for s in specs))
    devs = np.empty(args.trials)
    worst_base = 1.0
    for trial in range(args.trials):
        F_t = em_mod.random_em_field(grid, seed=[args.seed, 1, trial])
        base = em_mod.em_functional(F_t)
        worst_base = max(worst_base, abs(base))
        p = mg.random_polynomial_field(grid, seed=[args.seed, 2, trial])
        devs[trial] = abs(em_mod.em_functional(em_mod.em_gauge(F_t, p)) - base)
    gauge_rep = ResidualReport.from_per_point((0, args.trials - 1), devs, 1e-12 * worst_base)
    F = em_mod.random_em_field(grid, seed=[args.seed, 1])
    ident = em_mod.em_noether_residual(F, tolerance=args.tol)
    FL = em_mod.lorentz_field(grid)
    lorentz = em_mod.em_lorentz_check(FL, tolerance=1e-10)
    wave = em_mod.em_wave_reduction_residual(FL, tolerance=args.tol)
    sections = [
        _section("gauge-invariance", gauge_rep, args.verbose),
        _section("identity", ident, args.verbose),
        _section("lorentz", lorentz, args.verbose),
        _section("wave-form", wave, args.verbose),
    ]
    return _report_sections(sections)


def _cmd_oracle_fl(args):
    ts = parse_scale_spec(args.scale)
    m = args.order
    b1 = ts.condition_h[0] if ts.condition_h else None
    if b1 is None:
        raise ValueError("the oracle needs a scale with an affine jump law")
    rng = np.random.default_rng([args.seed, 5])
    upper = len(ts) - m if m >= 1 else len(ts) - 1
    fs = [
        GridFunction(ts, 0, rng.uniform(-1, 1, upper)) for _ in range(m)
    ]
    # Make the weighted combination vanish by solving for f_0.
    target = np.zeros(upper)
    from .timescale import delta_derivative as dd

    for i, f in enumerate(fs, start=1):
        term = dd(f, i)
        w = (-1.0) ** i * (1.0 / b1) ** ((i * (i - 1)) // 2)
        target[: term.values.shape[0]] -= w * term.values[:, 0]
    f0 = GridFunction(ts, 0, target)
    fs = [f0] + fs
    if args.mode == "impulse":
        bump = f0.values.copy()
        mid = max(0, min(upper - 1 - m, upper // 2))
        bump[mid] += 0.5
        fs[0] = GridFunction(ts, 0, bump)
    rep = nt.fundamental_lemma_oracle(ts, fs, tolerance=args.tol)
    section = {
        "name": "fundamental-lemma",
        "order": rep.m,
        "domain": list(rep.domain),
        "max_integral": rep.max_integral,
        "conclusion_sup": rep.conclusion_sup,
        "consistent": rep.consistent,
        "verdict": "pass" if rep.verdict else "fail",
    }
    return _report_sections([section])


if __name__ == "__main__":
    sys.exit(main())
