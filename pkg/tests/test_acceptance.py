"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are also
collected into the pytest terminal summary. Run this file directly to get
just those lines.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from plapbound import specfun
from plapbound.eigensolve1d import (
    ProblemKind,
    SpectralParams,
    closed_form_bound,
    rayleigh_oracle,
    solve,
    solve_dirichlet,
    solve_neumann,
)
from plapbound.oracle import (
    TorusGrid,
    discrete_laplacian_eigenvalue,
    first_eigenfield,
    verify_modulus_comparison,
    verify_neumann_bound,
)
from plapbound.reports import BoundReport, Status

DIR = ProblemKind.DIRICHLET
DATA = Path(__file__).parent / "data"


def record(log, number, title, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    print(line)
    log.append(line)
    assert ok, line


def test_criterion_01_pi_p_identity(acceptance_log):
    t0 = time.perf_counter()
    errs = {p: abs(specfun.pi_p(p) - specfun.pi_p_quadrature(p)) for p in (1.1, 1.5, 2, 3, 10)}
    elapsed = time.perf_counter() - t0
    worst = max(errs.values())
    record(acceptance_log, 1, "pi_p closed form vs quadrature",
           worst < 1e-8 and elapsed < 1.0, f"max abs err {worst:.1e}, {elapsed:.2f}s")


def test_criterion_02_closed_form_regression(acceptance_log):
    t0 = time.perf_counter()
    worst = 0.0
    for p in (1.2, 1.5, 2.0):
        for D in (1.0, math.pi):
            mu = solve_neumann(SpectralParams(1, p, 0.0, 0.0, D / 2)).eigenvalue
            worst = max(worst, abs(mu / closed_form_bound(p, D) - 1))
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 2, "flat shooting vs (p-1)(pi_p/D)^p",
           worst < 1e-8 and elapsed < 10.0, f"max rel err {worst:.1e}, {elapsed:.1f}s")


def test_criterion_03_sphere_case(acceptance_log):
    neu = solve_neumann(SpectralParams(1, 2.0, 1.0, 0.0, math.pi / 4)).eigenvalue
    dir_ = solve_dirichlet(SpectralParams(1, 2.0, 1.0, 0.0, math.pi / 4, 0.0, DIR)).eigenvalue
    # independent check: sin(2s) satisfies phi'' - 2 tan(2s) phi' = -8 phi exactly
    s = np.linspace(0.01, math.pi / 4 - 0.01, 100)
    defect = np.max(np.abs(-4 * np.sin(2 * s) - 2 * np.tan(2 * s) * 2 * np.cos(2 * s) + 8 * np.sin(2 * s)))
    e1, e2 = abs(neu / 8 - 1), abs(dir_ / 8 - 1)
    record(acceptance_log, 3, "sphere case eigenvalue 8 (Neumann and Dirichlet)",
           e1 < 1e-8 and e2 < 1e-8 and defect < 1e-12,
           f"neumann rel err {e1:.1e}, dirichlet rel err {e2:.1e}, sin(2s) defect {defect:.0e}")


MATRIX = [(p, m, k1, k2) for p in (1.2, 1.5, 2.0, 3.0)
          for m, k1, k2 in [(1, 0, 0), (1, 1, 0), (2, 0, 1), (2, -1, -1), (3, 1, -1), (3, -1, 1)]]


def test_criterion_04_dual_solver_agreement(acceptance_log):
    t0 = time.perf_counter()
    worst = 0.0
    for p, m, k1, k2 in MATRIX:
        params = SpectralParams(m, p, k1, k2, 0.6)
        a = solve_neumann(params).eigenvalue
        b = rayleigh_oracle(params, n=4096).eigenvalue
        worst = max(worst, abs(a - b) / a)
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 4, f"shooting vs Rayleigh (n=4096) on {len(MATRIX)} instances",
           worst < 2e-3 and elapsed < 300, f"max rel diff {worst:.1e}, {elapsed:.1f}s")


REFLECTION = [(1, 1.2, 0.0, 0.0, 0.6), (1, 2.0, 1.0, 0.0, 0.7), (2, 1.5, -1.0, 1.0, 0.5),
              (2, 3.0, 0.5, -0.5, 0.6), (3, 1.8, 1.0, 1.0, 0.4), (3, 2.5, -1.0, -1.0, 0.9),
              (2, 1.3, 0.0, 2.0, 0.5), (1, 4.0, -2.0, 0.0, 1.2)]


def test_criterion_05_reflection_equivalence(acceptance_log):
    worst = 0.0
    for m, p, k1, k2, h in REFLECTION:
        neu = solve_neumann(SpectralParams(m, p, k1, k2, h)).eigenvalue
        dir_ = solve_dirichlet(SpectralParams(m, p, k1, k2, h, 0.0, DIR)).eigenvalue
        worst = max(worst, abs(neu - dir_) / neu)
    # the root search is converged to 1e-13; allow the integrator tolerance on top
    record(acceptance_log, 5, "Neumann(h) = Dirichlet(Lambda=0, R=h), 8 instances",
           worst < 1e-10, f"max rel diff {worst:.1e}")


SCALING = [SpectralParams(1, 1.5, 1.0, 0.0, 0.6), SpectralParams(2, 2.0, -1.0, 0.5, 0.5),
           SpectralParams(3, 1.2, 0.5, -1.0, 0.4), SpectralParams(2, 3.0, 0.0, 1.0, 0.7),
           SpectralParams(2, 1.7, 0.5, 0.5, 0.5, 0.4, DIR),
           SpectralParams(1, 2.5, -1.0, 0.0, 0.8, -0.3, DIR)]


def test_criterion_06_scaling_law(acceptance_log):
    worst = 0.0
    for params in SCALING:
        base = solve(params).eigenvalue
        for c in (0.5, 2.0):
            scaled = solve(params.scaled(c)).eigenvalue
            worst = max(worst, abs(scaled / (c ** -params.p * base) - 1))
    record(acceptance_log, 6, "eigenvalue(kappa/c^2, cD) = c^-p eigenvalue, 6 instances x 2",
           worst < 1e-8, f"max rel err {worst:.1e}")


def test_criterion_07_torus_inequality(acceptance_log):
    t0 = time.perf_counter()
    reports = {}
    for p in (2.0, 1.5, 1.2):
        for L in (1.0, 2.0):
            reports[p, L] = verify_neumann_bound(TorusGrid(64, L), p)
    elapsed = time.perf_counter() - t0
    all_pass = all(r.status is Status.PASS for r in reports.values())
    ref = reports[2.0, 1.0]
    oracle_err = abs(ref.oracle / (4 * math.pi**2) - 1)
    bound_err = abs(ref.bound - 2 * math.pi**2)
    worst_margin = min(r.margin for r in reports.values())
    record(acceptance_log, 7, "torus eigenvalue >= flat bound on 6 grids",
           all_pass and oracle_err < 0.01 and bound_err < 1e-10 and elapsed < 300,
           f"min margin {worst_margin:+.3f}, p=2 oracle err {oracle_err:.1e}, "
           f"bound err {bound_err:.0e}, {elapsed:.1f}s")


def test_criterion_08_heat_flow_comparison(acceptance_log):
    t0 = time.perf_counter()
    g = TorusGrid(48, 1.0)
    lam = discrete_laplacian_eigenvalue(g)
    smooth2 = verify_modulus_comparison(g, 2.0, 0.05)
    smooth15 = verify_modulus_comparison(g, 1.5, 0.05)
    eigen2 = verify_modulus_comparison(g, 2.0, 0.05, initial=first_eigenfield(g))
    elapsed = time.perf_counter() - t0
    rate_err = abs(eigen2.meta["observed_rate"] / lam - 1)
    smooth_err = abs(smooth2.meta["observed_rate"] / (4 * math.pi**2) - 1)
    ok = (smooth2.status is Status.PASS and smooth15.status is Status.PASS
          and eigen2.status is Status.PASS and rate_err < 0.1 and smooth_err < 0.1
          and elapsed < 300)
    record(acceptance_log, 8, "modulus comparison on 48x48 to T=0.05, p=2 and p=1.5", ok,
           f"eigenfield rate err {rate_err:.1e}, smooth rate vs 4pi^2 {smooth_err:.1e}, "
           f"{elapsed:.1f}s")


LADDERS = [(1, 1.5, 0.0, 0.0), (2, 2.0, 1.0, -1.0), (3, 1.2, -1.0, 1.0), (2, 3.0, 0.5, 0.5)]


def test_criterion_09_monotonicity_and_m1_invariance(acceptance_log):
    strict = True
    for m, p, k1, k2 in LADDERS:
        values = [solve(SpectralParams(m, p, k1, k2, h)).eigenvalue
                  for h in (0.3, 0.4, 0.5, 0.6, 0.7)]
        strict &= all(a > b for a, b in zip(values, values[1:]))
    for m, p, k1, k2, lam in [(2, 1.6, 0.5, 0.0, 0.3), (1, 2.2, -0.5, 0.0, -0.4)]:
        values = [solve(SpectralParams(m, p, k1, k2, h, lam, DIR)).eigenvalue
                  for h in (0.3, 0.45, 0.6)]
        strict &= all(a > b for a, b in zip(values, values[1:]))
    same = True
    for kind, lam in ((ProblemKind.NEUMANN, 0.0), (DIR, 0.3)):
        outs = {solve(SpectralParams(1, 1.7, 0.5, k2, 0.5, lam, kind)).eigenvalue
                for k2 in (-2.0, -1.0, 0.0, 1.0, 2.0)}
        same &= len(outs) == 1
    record(acceptance_log, 9, "strict domain monotonicity; m=1 output independent of kappa2",
           strict and same, f"ladders strictly decreasing: {strict}, m=1 identical: {same}")


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "plapbound", *args],
                          capture_output=True, text=True, check=True).stdout


def test_criterion_10_cli_determinism(acceptance_log, tmp_path):
    argv = ["bound", "--kind", "neumann", "--m", "2", "--p", "1.5", "--kappa1", "0.5",
            "--kappa2", "-1", "--diameter", "1.2"]
    a, b = _cli(*argv), _cli(*argv)
    da, db = json.loads(a), json.loads(b)
    ta, tb = da.pop("timestamp"), db.pop("timestamp")
    identical = (json.dumps(da) == json.dumps(db)
                 and a.replace(ta, "") == b.replace(tb, ""))
    round_trip = BoundReport.from_json(a).to_json() == a.rstrip("\n")

    out = tmp_path / "flat.csv"
    _cli("sweep", "--kind", "neumann", "--kappa1", "0", "--kappa2", "0", "--diameter", "2",
         "--axis", "p:1.2:2.0:5", "--output", str(out))
    golden = (DATA / "sweep_flat_golden.csv").read_text().splitlines()
    got = out.read_text().splitlines()
    golden_ok = got[0] == golden[0] and len(got) == len(golden)
    for g_line, o_line in zip(golden[1:], got[1:]):
        g_cells, o_cells = g_line.split(","), o_line.split(",")
        golden_ok &= g_cells[:8] == o_cells[:8] and g_cells[10] == o_cells[10]
        golden_ok &= g_cells[13:] == o_cells[13:]
        golden_ok &= math.isclose(float(g_cells[8]), float(o_cells[8]), rel_tol=1e-10)
    record(acceptance_log, 10, "bound output byte-identical, JSON round trip, CSV golden",
           identical and round_trip and golden_ok,
           f"identical: {identical}, round trip: {round_trip}, golden: {golden_ok}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
