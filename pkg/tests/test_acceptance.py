"""Acceptance criteria 1-10, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL: ...`` line (also
collected into the end-of-run summary) before asserting.  Run alone with
``pytest tests/test_acceptance.py -v``.
"""
import ast
import json
import time
from pathlib import Path

import numpy as np
import pytest

import torsionflow
from torsionflow.cli import main
from torsionflow.flow import FlowConfig, FlowState, dissipation_residual, integrate
from torsionflow.frame import j_from_chart
from torsionflow.suites import chart_grid, run_suite

from conftest import ACCEPTANCE_LINES


def record(capsys, n, ok, detail):
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def test_criterion_01_conformal_identities(capsys):
    res, secs = timed(run_suite, "conformal", cases=100, degree=3, seed=7)
    ok = res.passed and res.n_cases == 100 and res.worst_residual == 0.0 and secs < 60
    record(capsys, 1, ok, f"curvature-gradient, divergence, P_1- and P_0-covariance identities exact zero in {res.n_passed}/100 cases, {secs:.1f}s (< 60s)")


def test_criterion_02_gauge_bianchi(capsys):
    res, secs = timed(run_suite, "gauge", cases=50, degree=3, seed=7)
    ok = res.passed and res.n_cases == 50 and secs < 30
    record(capsys, 2, ok, f"eta_1 + i F_11,1bar exact zero for (A_hat, -W_hat) in {res.n_passed}/50 pluriharmonic cases, {secs:.1f}s (< 30s)")


def test_criterion_03_commutation_and_bianchi(capsys):
    res, secs = timed(run_suite, "commutations", cases=50, degree=3, seed=7)
    ok = res.passed and res.n_cases == 50
    record(capsys, 3, ok, f"commutation relations + W,0 Bianchi exact on flat and hatted structures: {res.n_passed}/50, {secs:.1f}s")


def _jet_engine_imports_in_oracle():
    tree = ast.parse((Path(torsionflow.__file__).parent / "oracle.py").read_text())
    mods = {n.module for n in ast.walk(tree) if isinstance(n, ast.ImportFrom) and n.module}
    return mods & {"jet", "heisenberg", "conformal", "variation"}


def test_criterion_04_oracle_cross_check(capsys):
    res, secs = timed(run_suite, "oracle", cases=3, degree=3, seed=7)
    independent = not _jet_engine_imports_in_oracle()
    ok = res.passed and independent
    record(
        capsys, 4, ok,
        f"A_hat_11, W_hat, P_1 f, P_0 f vs coordinate oracle at 27 points x {res.n_cases} exponents: "
        f"worst rel {res.worst_residual:.1e} (<= 1e-6); oracle independent of jet engine: {independent}",
    )


def test_criterion_05_canonical_shrinker(capsys):
    res = run_suite("shrinker", cases=1)
    record(capsys, 5, res.passed, f"(A, W) = (0, 2), s(0.2) = 1 - 4t, extinction at 0.25: worst deviation {res.worst_residual:.1e}")


def test_criterion_06_dissipation(capsys):
    canon = run_suite("dissipation", cases=5, seed=7)
    worst, ratios = 0.0, []
    for a, b in [p for p in chart_grid() if p != (0.0, -1.0)][::2]:  # skip J_can itself (both errors at round-off)
        start = FlowState(j_from_chart(a, b), 1.0)
        errs = []
        for dt in (1e-3, 5e-4):
            traj = integrate(start, FlowConfig(dt=dt, t_end=0.02))
            errs.append(max(abs(r) for r in dissipation_residual(traj)))
        worst = max(worst, errs[0])
        ratios.append(errs[0] / errs[1])
    ok = canon.passed and canon.worst_residual <= 1e-8 and worst <= 1e-4 and all(3.2 <= r <= 4.8 for r in ratios)
    record(
        capsys, 6, ok,
        f"canonical -16 vs -16 within {canon.worst_residual:.1e}; perturbed residual {worst:.1e} (<= 1e-4), "
        f"Richardson {min(ratios):.3f}..{max(ratios):.3f}",
    )


def test_criterion_07_variation_formulas(capsys):
    res = run_suite("variations", cases=24, seed=7)
    ok = res.passed and res.n_cases >= 20
    record(capsys, 7, ok, f"torsion, connection, Ricci and Webster variations vs centered FD on {res.n_passed}/{res.n_cases} families: worst abs {res.worst_residual:.1e}, ratios in [3.2, 4.8]")


def test_criterion_08_normalized_convergence(capsys):
    res, secs = timed(run_suite, "convergence", cases=9)
    ok = res.passed and secs < 120
    times = ", ".join(c.detail for c in res.cases)
    record(
        capsys, 8, ok,
        f"[conditional on volume normalization] 9/9 grid points reach dist_can < 1e-6 ({times}); "
        f"|A_11| monotone after t = 0.5; {secs:.1f}s (< 120s)",
    )


def test_criterion_09_linearization(capsys):
    res = run_suite("linearization", cases=5, seed=7)
    record(capsys, 9, res.passed, "H(zbar, 2y) = 0, scalar coefficient 10, E-part = Delta_b componentwise (exact)")


@pytest.mark.parametrize("dummy", [None])
def test_criterion_10_determinism(tmp_path, capsys, dummy):
    suites = [("conformal", "5"), ("gauge", "5"), ("commutations", "5"), ("variations", "6"), ("oracle", "1")]
    same = []
    for name, cases in suites:
        blobs = []
        for k, jobs in enumerate(("1", "1", "2")):
            out = tmp_path / f"{name}{k}"
            code = main(["verify", "--suite", name, "--cases", cases, "--seed", "13", "--jobs", jobs, "--out", str(out)])
            blobs.append((code, (out / f"verify_{name}.json").read_bytes()))
        same.append(blobs[0] == blobs[1] == blobs[2] and blobs[0][0] == 0)
    capsys.readouterr()
    ok = all(same)
    record(capsys, 10, ok, f"byte-identical reports across repeated and parallel runs for {len(suites)} seeded suites")
