"""Seeded verification suites shared by the command line and the test-suite.

Each suite is a list of independent cases.  Case ``i`` draws its inputs from
its own generator ``random.Random(seed * CASE_STRIDE + i)``, so results do not
depend on evaluation order or on how cases are spread over worker processes;
results are always reduced in case-index order.
"""
from __future__ import annotations

import cmath
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conformal import (
    ConformalChange,
    Identity,
    identity_residual,
    max_abs_at_samples,
    pluriharmonic_generator,
    random_holomorphic,
    random_real_polynomial,
)
from .errors import UnknownSuite
from .flow import (
    FlowConfig,
    FlowState,
    canonical_structure,
    dissipation_residual,
    geometry,
    integrate,
)
from .frame import LeftInvariantStructure, j_from_chart, sigma, su2
from .heisenberg import Component, FlatStructure, HattedStructure
from .oracle import CoordinateOracle, sample_points
from .poly import Poly
from .variation import Deformation, HomogeneousFamily, gauge_operator_H, linearization_L

CASE_STRIDE = 1_000_003


@dataclass
class CaseResult:
    index: int
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    seed: int
    cases: list[CaseResult] = field(default_factory=list)

    @property
    def n_cases(self) -> int:
        return len(self.cases)

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.cases)

    @property
    def passed(self) -> bool:
        return bool(self.cases) and self.n_passed == self.n_cases

    @property
    def worst_residual(self) -> float:
        vals = [c.residual for c in self.cases if not math.isnan(c.residual)]
        return max(vals) if vals else 0.0

    def failures(self) -> list[CaseResult]:
        return [c for c in self.cases if not c.passed]


def case_rng(seed: int, index: int) -> random.Random:
    return random.Random(seed * CASE_STRIDE + index)


# ---- exact jet suites ---------------------------------------------------------

CONFORMAL_IDENTITIES = (Identity.LEE_33, Identity.LEE_331, Identity.PANEITZ_33B, Identity.PANEITZ_P0_COV)


def conformal_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    f = random_real_polynomial(case_rng(seed, index), degree)
    change = ConformalChange(f)
    worst, bad = 0.0, []
    for ident in CONFORMAL_IDENTITIES:
        rep = identity_residual(ident, change, samples=False)
        if not rep.is_zero:
            bad.append(ident.value)
            worst = max(worst, max_abs_at_samples(rep.residual))
    return CaseResult(index, not bad, worst, ",".join(bad))


def gauge_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    f = pluriharmonic_generator(random_holomorphic(case_rng(seed, index), degree))
    rep = identity_residual(Identity.GAUGE_BIANCHI, f, samples=False)
    res = 0.0 if rep.is_zero else max_abs_at_samples(rep.residual)
    return CaseResult(index, rep.is_zero, res)


def commutation_residuals(struct, phi: Poly) -> dict[str, object]:
    """phi_{11bar} - phi_{1bar1} - i phi_0 and phi_{01} - phi_{10} - A_11 phi_{1bar}."""
    s = struct.scalar(phi)
    mixed = struct.nabla(s, "1", "1bar").value - struct.nabla(s, "1bar", "1").value
    reeb = struct.frame("0", struct.jet(phi)).scale((0, 1))
    torsion_term = struct.torsion * struct.covariant(s, "1bar").value
    return {
        "horizontal": mixed - reeb,
        "reeb": struct.nabla(s, "0", "1").value - struct.nabla(s, "1", "0").value - torsion_term,
    }


def bianchi_residual(struct):
    """W_,0 - (A_11,1bar1bar + conj)."""
    w0 = struct.covariant(Component(struct.webster), "0").value
    a = struct.nabla(struct.torsion_component(), "1bar", "1bar").value
    return w0 - (a + a.conj())


def commutation_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    rng = case_rng(seed, index)
    f = random_real_polynomial(rng, degree)
    phi = random_real_polynomial(rng, degree + 1)
    flat, hat = ConformalChange(f).structures()
    jets = {}
    for label, struct in (("flat", flat), ("hatted", hat)):
        for name, jet in commutation_residuals(struct, phi).items():
            jets[f"{label}:{name}"] = jet
        jets[f"{label}:bianchi"] = bianchi_residual(struct)
    bad = [k for k, j in jets.items() if not j.is_zero()]
    worst = max((max_abs_at_samples(jets[k]) for k in bad), default=0.0)
    return CaseResult(index, not bad, worst, ",".join(bad))


def bianchi_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    f = random_real_polynomial(case_rng(seed, index), degree)
    rep = identity_residual(Identity.BIANCHI_W0, f, samples=False)
    res = 0.0 if rep.is_zero else max_abs_at_samples(rep.residual)
    return CaseResult(index, rep.is_zero, res)


# ---- oracle cross-check ---------------------------------------------------------

ORACLE_RTOL = 1e-6


def oracle_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    """Hatted A_11, W, P_1 f, P_0 f from jets against the coordinate oracle at 27 points.

    The residual is |jet - oracle| / max(|jet|, 1): relative for values of
    order one and above, absolute for values near zero.
    """
    f = random_real_polynomial(case_rng(seed, index), degree)
    hat = HattedStructure(f)
    jets = (hat.torsion, hat.webster, hat.paneitz_p1(f), hat.paneitz_p0(f))
    worst = 0.0
    for p in sample_points():
        o = CoordinateOracle(f, p)
        ref = (o.torsion(), o.webster(), o.paneitz_p1(), o.paneitz_p0())
        for jet, val in zip(jets, ref):
            a = jet.evaluate(*p)
            worst = max(worst, abs(a - complex(val)) / max(abs(a), 1.0))
    return CaseResult(index, worst <= ORACLE_RTOL, worst)


# ---- homogeneous (SU(2)) suites -----------------------------------------------------

VARIATION_TOL = 1e-6
VARIATION_RATIO = (3.2, 4.8)


def random_su2_base(rng: random.Random):
    a = rng.uniform(-0.3, 0.3)
    b = -rng.uniform(0.7, 1.4)
    s = rng.uniform(0.7, 1.5)
    return LeftInvariantStructure(su2(), s * sigma(3), j_from_chart(a, b))


def variation_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    """One homogeneous family; even cases are pure rescalings, odd cases move J as well."""
    rng = case_rng(seed, index)
    base = random_su2_base(rng)
    eta = rng.uniform(-0.4, 0.4)
    E11 = 0j if index % 2 == 0 else cmath.rect(rng.uniform(0.02, 0.15), rng.uniform(-math.pi, math.pi))
    reports = HomogeneousFamily(base, E11, eta).reports()
    ok = all(r.passed(VARIATION_TOL, VARIATION_RATIO) for r in reports)
    worst = max(r.abs_error for r in reports)
    bad = [r.name for r in reports if not r.passed(VARIATION_TOL, VARIATION_RATIO)]
    return CaseResult(index, ok, worst, ",".join(bad))


DISSIPATION_CANONICAL_TOL = 1e-8


def dissipation_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    """Canonical shrinker from a seeded scale s0: dE/dt against -2(|A|^2 + W^2) Vol.

    Both sides equal -16 for every s; the centered difference is exact because
    E = 4 s is linear in time.
    """
    s0 = case_rng(seed, index).uniform(0.5, 2.0)
    traj = integrate(canonical_structure(s0), FlowConfig(dt=1e-3, t_end=0.01))
    res = max(abs(r) for r in dissipation_residual(traj))
    return CaseResult(index, res <= DISSIPATION_CANONICAL_TOL, res)


CONVERGENCE_TOL = 1e-6
CONVERGENCE_T_MAX = 100.0


def chart_grid() -> list[tuple[float, float]]:
    """9 (a, b) chart points; every J has ||J - J_can||_F <= 0.5."""
    return [(a, b) for a in (-0.15, 0.0, 0.15) for b in (-1.2, -1.0, -0.85)]


def convergence_case(seed: int, index: int, degree: int = 3, *, dt: float = 1e-2) -> CaseResult:
    """Normalized flow from grid point ``index``: dist_can < 1e-6 before t = 100, |A_11| eventually monotone.

    The flow is integrated in unit-time chunks and stops once converged.
    """
    a, b = chart_grid()[index % 9]
    state = FlowState(j_from_chart(a, b), 1.0)
    samples = []
    while True:
        traj = integrate(state, FlowConfig(normalized=True, dt=dt, t_end=state.time + 1.0))
        samples.extend(traj.samples if not samples else traj.samples[1:])
        state = traj.final.state
        if traj.final.dist_can < CONVERGENCE_TOL or state.time >= CONVERGENCE_T_MAX:
            break
    A = np.array([s.A_abs for s in samples])
    t = np.array([s.time for s in samples])
    tail = A[t >= 0.5]
    monotone = bool(np.all(np.diff(tail) <= 1e-14))
    dist = samples[-1].dist_can
    ok = dist < CONVERGENCE_TOL and monotone
    reached = next((s.time for s in samples if s.dist_can < CONVERGENCE_TOL), math.inf)
    return CaseResult(index, ok, dist, f"t={reached:.2f}" + ("" if monotone else ",non-monotone"))


def shrinker_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    """(A, W) = (0, 2) at s = 1, s(0.2) = 0.2 and extinction at t = 0.25."""
    g = geometry(canonical_structure(1.0))
    r_geom = max(abs(g.A11), abs(g.W - 2.0), g.residual)
    traj = integrate(canonical_structure(1.0), FlowConfig(dt=1e-3, t_end=0.2))
    r_s = max(abs(s.state.s - (1 - 4 * s.time)) for s in traj.samples)
    ext = integrate(canonical_structure(1.0), FlowConfig(dt=1e-3, t_end=0.3))
    r_ext = abs((ext.extinction_time or math.inf) - 0.25)
    ok = r_geom <= 1e-12 and r_s <= 1e-10 and ext.halt_reason == "extinction" and r_ext <= 1e-6
    return CaseResult(index, ok, max(r_geom, r_s, r_ext))


def linearization_case(seed: int, index: int, degree: int = 3) -> CaseResult:
    """H(zbar, 2y) = 0; scalar coefficient 10; E-part proportional to Delta_b E componentwise."""
    flat = FlatStructure()
    y, zbar = Poly.y(), Poly.zbar()
    h_ok = gauge_operator_H(Deformation(zbar, y.scale(2))).is_zero()
    rng = case_rng(seed, index)
    h = random_real_polynomial(rng, degree + 1)
    E = random_real_polynomial(rng, degree + 1) + random_real_polynomial(rng, degree + 1).scale(0, 1)
    lin = linearization_L(Deformation(E, h))
    scalar_ok = (lin.scalar - flat.sublaplacian(h).scale(10)).is_zero()
    e_ok = (lin.E_operator - flat.sublaplacian(E)).is_zero()
    ok = h_ok and scalar_ok and e_ok
    return CaseResult(index, ok, 0.0 if ok else math.inf)


# ---- registry ------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteSpec:
    case: object
    cases: int
    degree: int = 3


SUITES: dict[str, SuiteSpec] = {
    "conformal": SuiteSpec(conformal_case, 100),
    "gauge": SuiteSpec(gauge_case, 50),
    "commutations": SuiteSpec(commutation_case, 50),
    "bianchi": SuiteSpec(bianchi_case, 50),
    "oracle": SuiteSpec(oracle_case, 3),
    "variations": SuiteSpec(variation_case, 24),
    "dissipation": SuiteSpec(dissipation_case, 5),
    "convergence": SuiteSpec(convergence_case, 9),
    "shrinker": SuiteSpec(shrinker_case, 1),
    "linearization": SuiteSpec(linearization_case, 5),
}


def _run_one(args):
    name, seed, index, degree = args
    return SUITES[name].case(seed, index, degree)


def run_suite(name: str, *, cases: int | None = None, degree: int | None = None, seed: int = 7, jobs: int = 1) -> SuiteResult:
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    spec = SUITES[name]
    n = spec.cases if cases is None else cases
    d = spec.degree if degree is None else degree
    if n < 1 or d < 0:
        raise ValueError("cases must be >= 1 and degree >= 0")
    work = [(name, seed, i, d) for i in range(n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, work))  # map preserves case order
    else:
        results = [_run_one(w) for w in work]
    return SuiteResult(name, seed, results)

