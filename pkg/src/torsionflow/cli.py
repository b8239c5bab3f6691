"""``torsionflow`` command line: run scenarios, verify identity suites, summarize reports.

Exit codes: 0 pass, 2 assertion failure, 3 configuration error.
"""
from __future__ import annotations

import csv
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from .errors import ConfigInvalid, UnknownSuite
from .flow import FlowConfig, FlowState, Trajectory, dissipation_residual, integrate
from .frame import J_CANONICAL, j_from_chart
from .suites import SUITES, SuiteResult, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 2, 3

CSV_HEADER = ("t", "s", "W", "A_abs", "J_a", "J_b", "J_c", "energy", "volume", "dist_can")
REPORT_KEYS = ("scenario", "status", "cases", "passed", "worst_residual", "seed", "wall_ms")

FLOW_SCENARIOS = ("su2_flow", "su2_normalized_flow", "dissipation_check")
SUITE_SCENARIOS = {
    "verify_conformal": "conformal",
    "verify_variations": "variations",
    "verify_commutations": "commutations",
}
SCENARIOS = FLOW_SCENARIOS + tuple(SUITE_SCENARIOS)

FLOW_PARAMS = {"a", "b", "c", "J", "s0", "dt", "t_end", "record_every", "record_timing"}
SUITE_PARAMS = {"cases", "degree", "seed", "jobs", "record_timing"}

# dissipation_check thresholds
DISSIPATION_TOL = 1e-4
DISSIPATION_ROUNDOFF = 1e-8
RICHARDSON_BAND = (3.2, 4.8)


# ---- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: dict
    output_dir: Path

    @property
    def record_timing(self) -> bool:
        return bool(self.params.get("record_timing", False))


def _number(params: dict, key: str, *, positive: bool = False, integer: bool = False):
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigInvalid(f"param {key!r} must be a finite number")
    if integer and not float(v).is_integer():
        raise ConfigInvalid(f"param {key!r} must be an integer")
    if positive and not v > 0:
        raise ConfigInvalid(f"param {key!r} must be positive")
    return int(v) if integer else float(v)


def validate_config(doc, out_override: str | None = None) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigInvalid("config must be a JSON object")
    extra = set(doc) - {"scenario", "params", "output_dir"}
    if extra:
        raise ConfigInvalid(f"unknown top-level keys: {sorted(extra)}")
    scenario = doc.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigInvalid(f"scenario must be one of {', '.join(SCENARIOS)}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigInvalid("params must be an object")
    out = out_override or doc.get("output_dir")
    if not isinstance(out, str) or not out:
        raise ConfigInvalid("output_dir missing (set it in the config or pass --out)")

    allowed = FLOW_PARAMS if scenario in FLOW_SCENARIOS else SUITE_PARAMS
    unknown = set(params) - allowed
    if unknown:
        raise ConfigInvalid(f"unknown params for {scenario}: {sorted(unknown)}")
    if scenario in FLOW_SCENARIOS:
        for key in ("s0", "dt", "t_end"):
            if key not in params:
                raise ConfigInvalid(f"{scenario} needs param {key!r}")
            _number(params, key, positive=key != "t_end")
        if _number(params, "t_end") < 0:
            raise ConfigInvalid("t_end must be >= 0")
        if "record_every" in params:
            _number(params, "record_every", positive=True, integer=True)
        initial_J(params)
    else:
        if "seed" not in params:
            raise ConfigInvalid(f"{scenario} is randomized and needs a 'seed'")
        _number(params, "seed", integer=True)
        for key in ("cases", "jobs"):
            if key in params:
                _number(params, key, positive=True, integer=True)
        if "degree" in params:
            if _number(params, "degree", integer=True) < 0:
                raise ConfigInvalid("degree must be >= 0")
    return ScenarioConfig(scenario, dict(params), Path(out))


def initial_J(params: dict) -> np.ndarray:
    """J from the (a, b[, c]) chart, or J_can for ``"J": "canonical"`` / no chart at all."""
    has_chart = "a" in params or "b" in params
    if params.get("J", "canonical") != "canonical":
        raise ConfigInvalid("param J only accepts 'canonical'")
    if "J" in params and has_chart:
        raise ConfigInvalid("give either J or the (a, b) chart, not both")
    if not has_chart:
        if "c" in params:
            raise ConfigInvalid("c given without a and b")
        return J_CANONICAL.copy()
    if "a" not in params or "b" not in params:
        raise ConfigInvalid("the chart needs both a and b")
    a, b = _number(params, "a"), _number(params, "b")
    if not b < 0:
        raise ConfigInvalid("chart parameter b must be negative")
    J = j_from_chart(a, b)
    if "c" in params and abs(_number(params, "c") - J[1, 0]) > 1e-12:
        raise ConfigInvalid(f"c is determined by a, b (c = {J[1, 0]!r}); got {params['c']!r}")
    return J


def load_config(path: str, out_override: str | None = None) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    return validate_config(doc, out_override)


# ---- outputs -------------------------------------------------------------------


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in traj.samples:
            a, b, c = s.state.chart
            w.writerow([fmt(v) for v in (s.time, s.state.s, s.W, s.A_abs, a, b, c, s.energy, s.volume, s.dist_can)])


def make_report(scenario: str, status: str, cases: int, passed: int, worst: float, seed: int, wall_ms: int) -> dict:
    return dict(zip(REPORT_KEYS, (scenario, status, int(cases), int(passed), float(worst), int(seed), int(wall_ms))))


def write_report(report: dict, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report['scenario']}.json"
    path.write_text(json.dumps(report) + "\n")
    return path


def _wall_ms(start: float, record: bool) -> int:
    # timings differ run to run; they are only recorded on request so that
    # reports stay byte-identical by default
    return int(round((time.perf_counter() - start) * 1000)) if record else 0


def _exit_for(status: str) -> int:
    return EXIT_FAIL if status == "fail" else EXIT_PASS


# ---- scenarios -------------------------------------------------------------------


def _flow(params: dict, normalized: bool, dt: float | None = None) -> Trajectory:
    state = FlowState(initial_J(params), float(params["s0"]))
    cfg = FlowConfig(
        normalized=normalized,
        dt=float(dt if dt is not None else params["dt"]),
        t_end=float(params["t_end"]),
        record_every=int(params.get("record_every", 1)),
    )
    return integrate(state, cfg)


def _compatibility_residual(traj: Trajectory) -> float:
    eye = np.eye(2)
    return max(float(np.max(np.abs(s.state.J @ s.state.J + eye))) for s in traj.samples)


def run_flow_scenario(cfg: ScenarioConfig) -> dict:
    start = time.perf_counter()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    normalized = cfg.scenario == "su2_normalized_flow"
    if cfg.scenario == "dissipation_check":
        return run_dissipation_check(cfg, start)
    traj = _flow(cfg.params, normalized)
    write_trajectory_csv(traj, cfg.output_dir / "trajectory.csv")
    worst = _compatibility_residual(traj)
    ok = worst <= 1e-10
    status = "fail" if not ok else ("halted(extinction)" if traj.halt_reason == "extinction" else "pass")
    n = len(traj.samples)
    return make_report(cfg.scenario, status, n, n if ok else 0, worst, 0, _wall_ms(start, cfg.record_timing))


def dissipation_errors(params: dict, dt: float) -> tuple[Trajectory, float]:
    """Trajectory at step dt and the worst centered-FD dissipation residual on its samples."""
    traj = _flow({**params, "record_every": 1}, False, dt)
    return traj, max(abs(r) for r in dissipation_residual(traj))


def run_dissipation_check(cfg: ScenarioConfig, start: float) -> dict:
    """dE/dt = -2(|A|^2 + W^2) Vol at steps dt and dt/2, with the Richardson ratio of the two errors."""
    dt = float(cfg.params["dt"])
    traj, e1 = dissipation_errors(cfg.params, dt)
    _, e2 = dissipation_errors(cfg.params, dt / 2)
    write_trajectory_csv(traj, cfg.output_dir / "trajectory.csv")
    if e2 <= DISSIPATION_ROUNDOFF:  # exact (e.g. canonical) case: both errors at round-off
        ok = e1 <= DISSIPATION_ROUNDOFF
    else:
        ratio = e1 / e2
        ok = e1 <= DISSIPATION_TOL and RICHARDSON_BAND[0] <= ratio <= RICHARDSON_BAND[1]
    return make_report(cfg.scenario, "pass" if ok else "fail", 2, 2 if ok else 0, e1, 0, _wall_ms(start, cfg.record_timing))


def suite_report(scenario: str, result: SuiteResult, wall_ms: int) -> dict:
    status = "pass" if result.passed else "fail"
    return make_report(scenario, status, result.n_cases, result.n_passed, result.worst_residual, result.seed, wall_ms)


def run_suite_scenario(cfg: ScenarioConfig) -> dict:
    start = time.perf_counter()
    p = cfg.params
    result = run_suite(
        SUITE_SCENARIOS[cfg.scenario],
        cases=p.get("cases"),
        degree=p.get("degree"),
        seed=int(p["seed"]),
        jobs=int(p.get("jobs", 1)),
    )
    return suite_report(cfg.scenario, result, _wall_ms(start, cfg.record_timing))


def run_scenario(cfg: ScenarioConfig) -> dict:
    report = run_flow_scenario(cfg) if cfg.scenario in FLOW_SCENARIOS else run_suite_scenario(cfg)
    write_report(report, cfg.output_dir)
    return report


# ---- report table -------------------------------------------------------------------


def collect_reports(run_dir: Path) -> tuple[list[dict], list[str]]:
    rows, warnings = [], []
    for path in sorted(run_dir.glob("*.json")):
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            warnings.append(f"skipping {path.name}: {exc}")
            continue
        if not isinstance(doc, dict) or not set(REPORT_KEYS) <= set(doc):
            warnings.append(f"skipping {path.name}: not a run report")
            continue
        rows.append(doc)
    rows.sort(key=lambda r: (r["status"] != "fail", str(r["scenario"])))
    return rows, warnings


def format_table(rows: list[dict]) -> str:
    header = ("scenario", "status", "passed", "worst_residual")
    body = [(str(r["scenario"]), str(r["status"]), f"{r['passed']}/{r['cases']}", f"{float(r['worst_residual']):.3e}") for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
    return "\n".join([line(header), line(["-" * w for w in widths])] + [line(b) for b in body])


# ---- click front end -------------------------------------------------------------------


@click.group()
def cli():
    """Torsion flow scenarios and exact identity verification."""


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Scenario JSON file.")
@click.option("--out", "out_dir", default=None, help="Output directory (overrides output_dir in the config).")
def run(config_path, out_dir):
    """Run one scenario and write its CSV/JSON artifacts."""
    cfg = load_config(config_path, out_dir)
    report = run_scenario(cfg)
    click.echo(json.dumps(report))
    sys.exit(_exit_for(report["status"]))


@cli.command()
@click.option("--suite", required=True, help=f"One of: {', '.join(SUITES)}.")
@click.option("--cases", type=int, default=None, help="Number of cases (suite default if omitted).")
@click.option("--degree", type=int, default=None, help="Polynomial degree cap.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes for case-level parallelism.")
@click.option("--out", "out_dir", default=None, help="Write the report JSON into this directory.")
@click.option("--timing/--no-timing", default=False, help="Record wall time in the report (breaks byte-identity).")
def verify(suite, cases, degree, seed, jobs, out_dir, timing):
    """Run a named identity suite."""
    if suite not in SUITES:
        raise UnknownSuite(f"unknown suite {suite!r}; known: {', '.join(SUITES)}")
    if (cases is not None and cases < 1) or (degree is not None and degree < 0) or jobs < 1:
        raise ConfigInvalid("cases and jobs must be >= 1, degree >= 0")
    start = time.perf_counter()
    result = run_suite(suite, cases=cases, degree=degree, seed=seed, jobs=jobs)
    report = suite_report(f"verify_{suite}", result, _wall_ms(start, timing))
    for c in result.failures():
        click.echo(f"case {c.index} failed: residual {c.residual:.3e} {c.detail}", err=True)
    if out_dir is not None:
        write_report(report, Path(out_dir))
    click.echo(json.dumps(report))
    sys.exit(_exit_for(report["status"]))


@cli.command()
@click.argument("run_dir", type=click.Path(file_okay=False))
def report(run_dir):
    """Summarize the run reports in RUN_DIR (failures first)."""
    path = Path(run_dir)
    rows, warnings = collect_reports(path) if path.is_dir() else ([], [f"{run_dir} is not a directory"])
    for w in warnings:
        click.echo(f"warning: {w}", err=True)
    if not rows:
        click.echo(f"warning: no run reports found in {run_dir}", err=True)
    click.echo(format_table(rows))
    sys.exit(EXIT_PASS)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="torsionflow", standalone_mode=False)
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.exceptions.Abort:
        return EXIT_CONFIG
    except click.UsageError as exc:
        exc.show()
        return EXIT_CONFIG
    except (ConfigInvalid, UnknownSuite) as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    return EXIT_PASS


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
