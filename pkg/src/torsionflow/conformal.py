"""Contact-form rescalings of the flat Heisenberg structure and the identities they satisfy.

Every residual is returned as an exact :class:`WeightedJet`; the identity holds
precisely when that jet is zero.  A float max-abs over 27 fixed sample points
is attached for cross-checking against the coordinate oracle.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from itertools import product

from gmpy2 import mpq

from .errors import NonRealFactor, PreconditionViolated
from .heisenberg import Component, FlatStructure, HattedStructure
from .jet import Background, WeightedJet
from .oracle import sample_points
from .poly import Poly, gaussian, pack


class Identity(str, Enum):
    LEE_33 = "LEE_33"
    LEE_331 = "LEE_331"
    PANEITZ_33B = "PANEITZ_33B"
    PANEITZ_P0_COV = "PANEITZ_P0_COV"
    GAUGE_BIANCHI = "GAUGE_BIANCHI"
    BIANCHI_W0 = "BIANCHI_W0"


@dataclass(frozen=True)
class ConformalChange:
    """theta_hat = e^{2f} theta_0 for a real polynomial f."""

    f: Poly

    def __post_init__(self):
        if not self.f.is_real():
            raise NonRealFactor("conformal exponent must be real-valued")

    def background(self) -> Background:
        return Background(self.f)

    def structures(self) -> tuple[FlatStructure, HattedStructure]:
        """(flat, hatted) structures sharing one background, so their jets combine."""
        bg = self.background()
        flat = FlatStructure(bg)
        return flat, HattedStructure(flat)


@dataclass
class IdentityResidualReport:
    identity_id: Identity
    residual: WeightedJet
    is_zero: bool
    max_abs_at_samples: float
    extra: dict = field(default_factory=dict)


def _change(change) -> ConformalChange:
    return change if isinstance(change, ConformalChange) else ConformalChange(change)


def hat_torsion(change) -> WeightedJet:
    """A_hat_11 = e^{-2f}(2i f_11 - 4i f_1^2) over the flat model."""
    return _change(change).structures()[1].torsion


def hat_webster(change) -> WeightedJet:
    """W_hat = e^{-2f}(-4 Delta_b f - 8 f_1 f_1bar) over the flat model."""
    return _change(change).structures()[1].webster


# ---- pluriharmonic functions ------------------------------------------------

def cr_coordinate_w() -> Poly:
    """w = t + i(x^2 + y^2), annihilated by Z_1bar."""
    x, y = Poly.x(), Poly.y()
    return Poly.t() + (x * x + y * y).scale(0, 1)


def pluriharmonic_generator(holo) -> Poly:
    """Re(h(z, w)) for a polynomial h given as {(j, k): coeff} meaning coeff z^j w^k."""
    z, w = Poly.z(), cr_coordinate_w()
    total = Poly()
    zpow = {0: Poly.constant(1)}
    wpow = {0: Poly.constant(1)}
    for (j, k), c in sorted(holo.items()):
        for cache, base, n in ((zpow, z, j), (wpow, w, k)):
            while n not in cache:
                m = max(cache)
                cache[m + 1] = cache[m] * base
        re, im = gaussian(c)
        total = total + (zpow[j] * wpow[k]).scale(re, im)
    return total.real_part()


def is_pluriharmonic(g: Poly, *, cross_check: bool = True) -> bool:
    """P_1 g == 0 exactly on the flat model; optionally assert P_0 g == 0 as well."""
    if not g.is_real():
        raise NonRealFactor("pluriharmonic test needs a real function")
    flat = FlatStructure()
    result = flat.paneitz_p1(g).is_zero()
    if result and cross_check and not flat.paneitz_p0(g).is_zero():
        raise AssertionError("P_1 g = 0 but P_0 g != 0")  # cannot happen: P_0 = delta_b P_1
    return result


# ---- identities -----------------------------------------------------------

def _curvature_gradient(hat: HattedStructure) -> WeightedJet:
    """W_hat_1 - i A_hat_11,1bar."""
    w1 = hat.covariant(Component(hat.webster), "1").value
    a1 = hat.covariant(hat.torsion_component(), "1bar").value
    return w1 - a1.scale((0, 1))


def max_abs_at_samples(jet: WeightedJet, points=None) -> float:
    if jet.is_zero():
        return 0.0
    pts = points if points is not None else sample_points()
    return max(abs(jet.evaluate(*p)) for p in pts)


def identity_residual(identity_id, change, *, samples: bool = True) -> IdentityResidualReport:
    """Left side minus right side of one identity for theta_hat = e^{2f} theta_0."""
    ident = Identity(identity_id)
    change = _change(change)
    flat, hat = change.structures()
    f = change.f
    if ident is Identity.LEE_33:
        residual = _curvature_gradient(hat) - flat.paneitz_p1(f).scale(-6).with_weight(-3)
    elif ident is Identity.LEE_331:
        sigma = Component(_curvature_gradient(hat), ("1",))
        residual = hat.divergence(sigma) - flat.paneitz_p0(f).scale(-6).with_weight(-4)
    elif ident is Identity.PANEITZ_33B:
        residual = hat.paneitz_p1(f) - flat.paneitz_p1(f).with_weight(-3)
    elif ident is Identity.PANEITZ_P0_COV:
        residual = hat.paneitz_p0(f) - flat.paneitz_p0(f).with_weight(-4)
    elif ident is Identity.GAUGE_BIANCHI:
        if not is_pluriharmonic(f):
            raise PreconditionViolated("GAUGE_BIANCHI needs a CR-pluriharmonic exponent")
        residual = gauge_bianchi_residual(hat.torsion, hat.webster.scale(-1), hat)
    elif ident is Identity.BIANCHI_W0:
        w0 = hat.covariant(Component(hat.webster), "0").value
        a = hat.nabla(hat.torsion_component(), "1bar", "1bar").value
        residual = w0 - (a + a.conj())
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(ident)
    mx = max_abs_at_samples(residual) if samples else float("nan")
    return IdentityResidualReport(ident, residual, residual.is_zero(), mx)


def gauge_bianchi_residual(F: WeightedJet, eta: WeightedJet, struct) -> WeightedJet:
    """eta_1 + i F_11,1bar for a symmetric (F_11) and a real scalar eta."""
    e1 = struct.covariant(Component(eta), "1").value
    div = struct.covariant(Component(F, ("1", "1")), "1bar").value
    return e1 + div.scale((0, 1))


# ---- random inputs ------------------------------------------------------------

def _rational(rng: random.Random, allow_zero: bool = True) -> mpq:
    while True:
        p = rng.randint(-9, 9)
        if p or allow_zero:
            return mpq(p, rng.randint(1, 9))


def monomials(degree: int) -> list[tuple[int, int, int]]:
    return [(a, b, c) for a, b, c in product(range(degree + 1), repeat=3) if a + b + c <= degree]


def random_real_polynomial(rng: random.Random, degree: int, *, terms: int | None = None) -> Poly:
    """Real polynomial in (x, y, t) with p/q coefficients, p in [-9, 9], q in [1, 9].

    ``terms`` limits how many monomials are drawn (default: all of degree
    <= ``degree``); one monomial of top degree is always included so the
    degree is attained.
    """
    monos = monomials(degree)
    top = [m for m in monos if sum(m) == degree]
    n = terms if terms is not None else len(monos)
    chosen = {rng.choice(top)} if top else set()
    rest = [m for m in monos if m not in chosen]
    chosen.update(rng.sample(rest, min(len(rest), max(0, n - len(chosen)))))
    out = {}
    for m in sorted(chosen):
        out[pack(*m)] = (_rational(rng, allow_zero=False), mpq(0))
    return Poly(out)


def random_holomorphic(rng: random.Random, degree: int) -> dict[tuple[int, int], tuple[mpq, mpq]]:
    """Random polynomial in (z, w) of total degree <= ``degree`` with Gaussian rational coefficients."""
    out = {}
    for j in range(degree + 1):
        for k in range(degree + 1 - j):
            if rng.random() < 0.6:
                out[(j, k)] = (_rational(rng), _rational(rng))
    if not any(v[0] or v[1] for v in out.values()):
        out[(1, 0)] = (mpq(1), mpq(0))
    return out
