"""Command line front end.

Usage examples::

    plapbound bound --kind neumann --m 1 --p 2 --kappa1 1 --kappa2 0 --diameter 1.5707963268
    plapbound bound --kind dirichlet --m 2 --p 1.5 --kappa1 0.5 --kappa2 -1 --lambda 0.2 --radius 0.6 --check
    plapbound verify --mode torus --p 1.5 --side 1 --nodes 64
    plapbound verify --mode heatflow --p 2 --side 1 --nodes 48 --time 0.05
    plapbound sweep --kind neumann --m 1 --kappa1 0 --kappa2 0 --diameter 2 \\
        --axis p:1.2:2.0:5 --output sweep.csv --profiles profiles/
    plapbound selftest

Reports go to stdout as JSON. Exit codes: 0 success or PASS, 2 invalid
input, 3 solver failure, 4 verification FAIL.
"""

import argparse
import configparser
import csv
import datetime
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import oracle, specfun
from .eigensolve1d import (
    ProblemKind,
    SolverConfig,
    SpectralParams,
    closed_form_bound,
    rayleigh_oracle,
    solve,
)
from .errors import DomainError, SolverError
from .reports import BoundReport, Provenance, Status, relative_margin

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_SOLVER = 3
EXIT_FAIL = 4

CONFIG_ENV = "PLAPBOUND_CONFIG"
P_NOTE = "comparison proven for p in (1,2] only"

CSV_HEADER = [
    "index", "kind", "m", "p", "kappa1", "kappa2", "halfwidth", "lambda",
    "bound", "closed_form", "method", "residual", "iterations", "status", "reason",
]

DEFAULTS = {
    "solver": {"rtol": 1e-10, "atol": 1e-12, "method": "DOP853", "tol": 1e-13,
               "residual_tol": 1e-7, "n_samples": 401},
    "check": {"nodes": 4096, "tol": 1e-11, "agreement": 2e-3},
    "oracle": {"slack": oracle.DEFAULT_SLACK, "abs_slack": oracle.DEFAULT_ABS_SLACK,
               "c_stab": oracle.DEFAULT_C_STAB, "tol": 1e-7, "seed": 0},
    "sweep": {"workers": 1},
}


def load_config(path=None):
    """Settings from an INI file layered over :data:`DEFAULTS`.

    ``path`` falls back to the ``PLAPBOUND_CONFIG`` environment variable.
    Unknown keys are rejected so typos do not pass silently.
    """
    settings = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return settings
    parser = configparser.ConfigParser()
    if not parser.read(path, encoding="utf-8"):
        raise DomainError(f"cannot read config file {path!r}")
    for section in parser.sections():
        if section not in settings:
            raise DomainError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in settings[section]:
                raise DomainError(f"unknown config key {section}.{key}")
            kind = type(settings[section][key])
            settings[section][key] = raw.strip() if kind is str else kind(float(raw))
    return settings


def solver_config(settings):
    s = settings["solver"]
    return SolverConfig(rtol=s["rtol"], atol=s["atol"], method=s["method"],
                        residual_tol=s["residual_tol"], n_samples=s["n_samples"])


def _timestamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _params_from_args(args):
    kind = ProblemKind(args.kind)
    if kind is ProblemKind.NEUMANN:
        if args.diameter is None:
            raise DomainError("the neumann problem needs --diameter")
        halfwidth = args.diameter / 2.0
    else:
        if args.radius is None:
            raise DomainError("the dirichlet problem needs --radius")
        halfwidth = args.radius
    return SpectralParams(args.m, args.p, args.kappa1, args.kappa2, halfwidth,
                          lam=args.lam, kind=kind)


def _request(args, params, tol):
    req = {"kind": params.kind.value, "m": params.m, "p": params.p,
           "kappa1": params.kappa1, "kappa2": params.kappa2}
    if params.kind is ProblemKind.NEUMANN:
        req["diameter"] = float(args.diameter)
    else:
        req["radius"] = float(args.radius)
        req["lambda"] = params.lam
    req["halfwidth"] = params.halfwidth
    req["tol"] = tol
    req["check"] = bool(args.check)
    return req


def _is_flat_neumann(params):
    return (params.kind is ProblemKind.NEUMANN and params.kappa1 == 0
            and params.kappa2 == 0)


def cmd_bound(args, settings):
    """Compute one comparison eigenvalue; optionally cross-check it."""
    params = _params_from_args(args)
    tol = settings["solver"]["tol"] if args.tol is None else args.tol
    config = solver_config(settings)
    if _is_flat_neumann(params):
        bound = closed_form_bound(params.p, 2.0 * params.halfwidth)
        bound_src = Provenance.CLOSED_FORM
        meta = {"iterations": 0, "residual": 0.0}
    else:
        res = solve(params, tol=tol, config=config)
        bound = res.eigenvalue
        bound_src = Provenance.SHOOTING
        meta = {"iterations": res.iterations, "residual": res.residual,
                "bracket": list(res.bracket), "singular_end": params.singular_end}
    meta.update({"tol": tol, "rtol": config.rtol, "atol": config.atol})
    proven = True
    if params.kind is ProblemKind.NEUMANN and params.p > 2:
        proven = False
        meta["note"] = P_NOTE

    oracle_value, margin, status = None, None, Status.BOUND_ONLY
    if args.check:
        chk = settings["check"]
        ray = rayleigh_oracle(params, n=chk["nodes"], tol=chk["tol"], config=config)
        oracle_value = ray.eigenvalue
        margin = relative_margin(oracle_value, bound)
        status = Status.PASS if abs(margin) <= chk["agreement"] else Status.FAIL
        meta.update({"oracle_nodes": chk["nodes"], "oracle_iterations": ray.iterations,
                     "agreement": chk["agreement"]})
    return BoundReport(
        request=_request(args, params, tol), bound=float(bound),
        provenance={"bound": bound_src,
                    "oracle": Provenance.RAYLEIGH if args.check else None},
        status=status, oracle=oracle_value, margin=margin, proven=proven,
        meta=meta, timestamp=_timestamp(),
    )


def cmd_verify(args, settings):
    """Run one torus eigenvalue check or one heat-flow comparison."""
    o = settings["oracle"]
    if args.mode == "torus":
        nodes = 64 if args.nodes is None else args.nodes
        report = oracle.verify_neumann_bound(
            oracle.TorusGrid(nodes, args.side), args.p, slack=o["slack"],
            abs_slack=o["abs_slack"], tol=o["tol"], seed=o["seed"])
    else:
        nodes = 48 if args.nodes is None else args.nodes
        report = oracle.verify_modulus_comparison(
            oracle.TorusGrid(nodes, args.side), args.p, args.time, dt=args.dt,
            seed=o["seed"], slack=o["slack"], abs_slack=o["abs_slack"],
            c_stab=o["c_stab"])
    report.timestamp = _timestamp()
    return report


def parse_axis(text):
    """``name:start:stop:count[:linear|log]`` to ``(name, values)``."""
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise DomainError(f"axis {text!r} is not name:start:stop:count[:spacing]")
    name = parts[0]
    if name not in SWEEP_AXES:
        raise DomainError(f"cannot sweep {name!r}; choose from {sorted(SWEEP_AXES)}")
    try:
        start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError as exc:
        raise DomainError(f"bad axis {text!r}: {exc}") from None
    spacing = parts[4] if len(parts) == 5 else "linear"
    if count < 1:
        raise DomainError(f"axis {name} needs a positive count")
    if spacing == "linear":
        values = np.linspace(start, stop, count)
    elif spacing == "log":
        if start <= 0 or stop <= 0:
            raise DomainError(f"log axis {name} needs positive endpoints")
        values = np.geomspace(start, stop, count)
    else:
        raise DomainError(f"unknown spacing {spacing!r}")
    if name == "m":
        values = np.round(values)
    return name, [float(v) for v in values]


SWEEP_AXES = {"m", "p", "kappa1", "kappa2", "diameter", "radius", "lambda"}


def _fmt(x):
    if x is None or x == "":
        return ""
    return format(x, ".12g")


def _sweep_instance(task):
    """Solve one sweep instance; runs in a worker process."""
    index, values, tol, config, want_profile = task
    kind = ProblemKind(values["kind"])
    if kind is ProblemKind.NEUMANN:
        halfwidth = values["diameter"] / 2.0
    else:
        halfwidth = values["radius"]
    row = {"index": index, "kind": kind.value, "m": values["m"], "p": values["p"],
           "kappa1": values["kappa1"], "kappa2": values["kappa2"],
           "halfwidth": halfwidth, "lambda": values["lambda"], "bound": None,
           "closed_form": None, "method": "", "residual": None,
           "iterations": None, "status": "OK", "reason": ""}
    profile = None
    try:
        params = SpectralParams(int(values["m"]), values["p"], values["kappa1"],
                                values["kappa2"], halfwidth, lam=values["lambda"],
                                kind=kind)
        if _is_flat_neumann(params):
            row["closed_form"] = closed_form_bound(params.p, 2.0 * halfwidth)
        res = solve(params, tol=tol, config=config)
        row.update(bound=res.eigenvalue, method=res.method, residual=res.residual,
                   iterations=res.iterations)
        if want_profile:
            profile = (res.grid, res.phi_samples, res.w_samples)
    except DomainError as exc:
        row.update(status="SKIPPED", reason=f"{type(exc).__name__}: {exc}")
    except SolverError as exc:
        row.update(status="FAILED", reason=f"{type(exc).__name__}: {exc}")
    return row, profile


def _write_profile(directory, row, profile):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    s, phi, w = profile
    stem = directory / f"instance_{row['index']:04d}"
    with open(stem.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["s", "phi", "w"])
        for a, b, c in zip(s, phi, w):
            out.writerow([_fmt(a), _fmt(b), _fmt(c)])
    plt.rcParams["svg.hashsalt"] = "plapbound"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(s, phi)
    ax.set_xlabel("s")
    ax.set_ylabel("phi")
    ax.set_title(f"{row['kind']} m={row['m']:g} p={row['p']:g} mu={row['bound']:.6g}")
    fig.tight_layout()
    fig.savefig(stem.with_suffix(".svg"), metadata={"Date": None})
    plt.close(fig)


def sweep_tasks(args, settings):
    axes = [parse_axis(a) for a in args.axis]
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise DomainError("each parameter may be swept at most once")
    base = {"kind": args.kind, "m": float(args.m), "p": args.p,
            "kappa1": args.kappa1, "kappa2": args.kappa2,
            "diameter": args.diameter, "radius": args.radius, "lambda": args.lam}
    tol = settings["solver"]["tol"] if args.tol is None else args.tol
    config = solver_config(settings)
    length_key = "diameter" if args.kind == "neumann" else "radius"
    tasks = []
    for i, combo in enumerate(itertools.product(*(v for _, v in axes))):
        values = dict(base)
        values.update(zip(names, combo))
        if values[length_key] is None:
            raise DomainError(f"the {args.kind} sweep needs --{length_key} or an axis")
        if values["p"] is None:
            raise DomainError("the sweep needs --p or a p axis")
        tasks.append((i, values, tol, config, args.profiles is not None))
    return tasks


def cmd_sweep(args, settings):
    """Write one CSV row per instance, in product order of the axes."""
    tasks = sweep_tasks(args, settings)
    workers = args.workers or settings["sweep"]["workers"]
    profiles = Path(args.profiles) if args.profiles else None
    if profiles:
        profiles.mkdir(parents=True, exist_ok=True)
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    skipped, failed = [], []
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers)
            results = pool.map(_sweep_instance, tasks)
        else:
            pool = None
            results = map(_sweep_instance, tasks)
        try:
            for row, profile in results:
                writer.writerow({k: (_fmt(v) if isinstance(v, float) else v)
                                 for k, v in row.items()})
                fh.flush()
                if row["status"] == "SKIPPED":
                    skipped.append(row["index"])
                elif row["status"] == "FAILED":
                    failed.append(row["index"])
                if profiles and profile is not None:
                    _write_profile(profiles, row, profile)
        finally:
            if pool is not None:
                pool.shutdown()
    return {"output": str(out_path), "rows": len(tasks), "skipped": skipped,
            "failed": failed}


def _selftest_checks():
    yield "pi_p identity", all(
        abs(specfun.pi_p(p) - specfun.pi_p_quadrature(p)) < 1e-8
        for p in (1.1, 1.5, 2.0, 3.0, 10.0))
    flat = solve(SpectralParams(1, 1.5, 0, 0, 0.5)).eigenvalue
    yield "closed form", abs(flat / closed_form_bound(1.5, 1.0) - 1) < 1e-8
    sphere = solve(SpectralParams(1, 2, 1, 0, math.pi / 4)).eigenvalue
    yield "sphere case", abs(sphere / 8.0 - 1) < 1e-8
    grid = oracle.TorusGrid(16, 1.0)
    rep = oracle.verify_neumann_bound(grid, 2.0)
    yield "torus p=2", rep.status is Status.PASS and abs(
        rep.oracle / oracle.discrete_laplacian_eigenvalue(grid) - 1) < 1e-6


def cmd_selftest(args, settings):
    ok = True
    for name, passed in _selftest_checks():
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return ok


def _add_instance_flags(sub, sweep=False):
    sub.add_argument("--kind", choices=[k.value for k in ProblemKind], default="neumann")
    sub.add_argument("--m", type=int, default=1, help="complex dimension")
    sub.add_argument("--p", type=float, default=None if sweep else 2.0)
    sub.add_argument("--kappa1", type=float, default=0.0,
                     help="lower bound of holomorphic sectional curvature / 4")
    sub.add_argument("--kappa2", type=float, default=0.0,
                     help="lower bound of orthogonal Ricci curvature / (2m-2)")
    length = sub if sweep else sub.add_mutually_exclusive_group(required=True)
    length.add_argument("--diameter", type=float, help="diameter D (neumann)")
    length.add_argument("--radius", type=float, help="radius R (dirichlet)")
    sub.add_argument("--lambda", dest="lam", type=float, default=0.0,
                     help="second fundamental form lower bound (dirichlet)")
    sub.add_argument("--tol", type=float, default=None,
                     help="relative tolerance of the eigenvalue root search")


def build_parser():
    ap = argparse.ArgumentParser(prog="plapbound", description=__doc__.split("\n")[0])
    ap.add_argument("--config", default=None,
                    help=f"INI file with solver settings (default ${CONFIG_ENV})")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="compute a comparison eigenvalue")
    _add_instance_flags(b)
    b.add_argument("--check", action="store_true",
                   help="cross-check against the discrete Rayleigh minimiser")
    b.add_argument("--output", default=None, help="also write the JSON report here")

    v = sub.add_parser("verify", help="brute-force check on the flat torus")
    v.add_argument("--mode", choices=["torus", "heatflow"], required=True)
    v.add_argument("--p", type=float, required=True)
    v.add_argument("--side", type=float, default=1.0)
    v.add_argument("--nodes", type=int, default=None)
    v.add_argument("--time", type=float, default=0.05)
    v.add_argument("--dt", type=float, default=None)
    v.add_argument("--output", default=None)

    s = sub.add_parser("sweep", help="tabulate bounds over a parameter grid")
    _add_instance_flags(s, sweep=True)
    s.add_argument("--axis", action="append", default=[],
                   help="name:start:stop:count[:linear|log], repeatable")
    s.add_argument("--output", required=True, help="CSV path")
    s.add_argument("--profiles", default=None,
                   help="directory for per-instance eigenfunction CSV and SVG")
    s.add_argument("--workers", type=int, default=None)

    sub.add_parser("selftest", help="run a few fast consistency checks")
    return ap


def _emit(report, output):
    text = report.to_json()
    print(text)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        settings = load_config(args.config)
        if args.command == "bound":
            report = cmd_bound(args, settings)
            _emit(report, args.output)
            return EXIT_OK if report.passed else EXIT_FAIL
        if args.command == "verify":
            report = cmd_verify(args, settings)
            _emit(report, args.output)
            return EXIT_OK if report.passed else EXIT_FAIL
        if args.command == "sweep":
            summary = cmd_sweep(args, settings)
            print(json.dumps(summary, indent=2))
            return EXIT_SOLVER if summary["failed"] else EXIT_OK
        return EXIT_OK if cmd_selftest(args, settings) else EXIT_FAIL
    except DomainError as exc:
        detail = {"error": type(exc).__name__, "message": str(exc)}
        location = getattr(exc, "location", None)
        if location is not None:
            detail["location"] = location
        print(json.dumps(detail), file=sys.stderr)
        return EXIT_DOMAIN
    except SolverError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
