import math
from fractions import Fraction

import numpy as np
import pytest

from torsionflow.errors import FamilyEvaluationFailed, UnsupportedBackground
from torsionflow.frame import (
    J_CANONICAL,
    LeftInvariantStructure,
    adapted_coframe,
    j_from_chart,
    sigma,
    solve_structure_equations,
    su2,
    torsion_endomorphism,
)
from torsionflow.heisenberg import FlatStructure, HattedStructure
from torsionflow.jet import Background, WeightedJet
from torsionflow.poly import Poly
from torsionflow.suites import run_suite
from torsionflow.variation import (
    Deformation,
    HomogeneousFamily,
    HomogeneousStructure,
    Scalar,
    connection_ricci_variation,
    coframe_variation,
    fd_verify,
    gauge_operator_H,
    linearization_L,
    torsion_variation,
    webster_variation,
)

X, Y, T = Poly.x(), Poly.y(), Poly.t()
R2 = X * X + Y * Y
CANON = LeftInvariantStructure(su2(), sigma(3), J_CANONICAL)


def hom(structure=CANON):
    return HomogeneousStructure(structure)


def jet(p):
    return WeightedJet.lift(Background(), p)


def sqrt2(c):
    return WeightedJet.sqrt2(Background()).scale(c)


# ---- coframe variation --------------------------------------------------------------------

def test_coframe_variation_pure_rescaling():
    a, b, c = coframe_variation(Deformation(0, Fraction(3, 2)))
    assert a.is_zero() and c.is_zero() and b == jet(Poly.constant(Fraction(3, 2)))
    a, b, c = coframe_variation(Deformation(0, 0.7, hom()))
    assert a.is_zero() and complex(b) == 0.7 and c.is_zero()


def test_coframe_variation_jet_eta_x():
    a, _, _ = coframe_variation(Deformation(0, X))
    assert a == sqrt2(Fraction(1, 4)).scale((0, 2))
    assert not a.is_zero()


# ---- torsion variation ----------------------------------------------------------------------

def test_torsion_variation_rescaling_only():
    assert torsion_variation(Deformation(0, 0.4, hom())).is_zero(1e-15)
    assert torsion_variation(Deformation(0, X)).is_zero()


def test_torsion_variation_canonical_fixture():
    # E_1bar1bar,0 = 4i conj(E) from omega(T) = -2i, so A_dot_1bar1bar = -4 conj(E)
    for E in (1.0, 0.3 - 0.2j):
        val = complex(torsion_variation(Deformation(E, 0, hom())))
        assert val == pytest.approx(-4 * np.conj(E), abs=1e-12)


def test_torsion_variation_on_chart_family():
    """u -> J(u) = chart(u, -1) through J_can; its tangent is 2E for a unique E11."""
    cf = adapted_coframe(CANON)
    tangent = np.array([[1.0, 0.0], [0.0, -1.0]])  # d/da of the (a, -1) chart at a = 0
    basis = [torsion_endomorphism(cf, 1.0), torsion_endomorphism(cf, 1j)]
    coeffs, *_ = np.linalg.lstsq(np.array([m.ravel() for m in basis]).T, tangent.ravel() / 2, rcond=None)
    E11 = complex(coeffs[0], coeffs[1])
    fam = HomogeneousFamily(CANON, E11, 0.0)
    np.testing.assert_allclose(2 * fam.E_matrix(), tangent, atol=1e-14)

    def chart_torsion(u):
        c = adapted_coframe(LeftInvariantStructure(su2(), sigma(3), j_from_chart(u, -1.0)))
        return torsion_endomorphism(c, solve_structure_equations(c).A11)

    rep = fd_verify(chart_torsion, fam.analytic_torsion_endomorphism, eps=1e-3, name="chart torsion")
    assert rep.abs_error <= 1e-6
    assert 3.2 <= rep.richardson_ratio <= 4.8


# ---- connection and Ricci ----------------------------------------------------------------------

def test_connection_ricci_constant_eta():
    rec = connection_ricci_variation(Deformation(0, Poly.constant(2)))
    for v in (rec.theta1, rec.theta1bar, rec.theta, rec.ricci):
        assert v.is_zero()
    c = 0.35
    rec = connection_ricci_variation(Deformation(0, c, hom()))
    assert complex(rec.ricci) == pytest.approx(-4 * c)


def test_connection_variation_eta_x():
    rec = connection_ricci_variation(Deformation(0, X))
    assert rec.theta.is_zero()  # i Delta_b x = 0
    assert rec.theta1 == sqrt2(Fraction(3, 4))


# ---- Webster variation ----------------------------------------------------------------------------

def test_webster_variation_examples():
    c = -0.45
    assert complex(webster_variation(Deformation(0, c, hom()))) == pytest.approx(-4 * c)
    assert webster_variation(Deformation(0, 0)).is_zero()
    assert webster_variation(Deformation(0, 0, hom())).is_zero()


def test_webster_variation_J_direction_fd():
    fam = HomogeneousFamily(CANON, 0.1 + 0.05j, 0.0)
    rep = fd_verify(fam.webster, lambda: complex(webster_variation(fam.deformation())), name="webster")
    assert rep.passed()


def test_webster_variation_jet_matches_hatted_law():
    """Differentiating W_hat = e^{-2uf}(-4u Delta f - 8u^2 |f_1|^2) at u = 0 gives -4 Delta_b f."""
    f = X * T + Y * Y * X
    assert webster_variation(Deformation(0, f)) == FlatStructure().sublaplacian(f).scale(-4)


# ---- gauge operator and linearization ------------------------------------------------------------

def test_gauge_operator_examples():
    assert gauge_operator_H(Deformation(Poly.z(), Poly.constant(5))).is_zero()
    assert gauge_operator_H(Deformation(Poly.zbar(), Y.scale(2))).is_zero()
    assert gauge_operator_H(Deformation(0, Poly.constant(1))).is_zero()
    assert not gauge_operator_H(Deformation(Poly.zbar(), Y)).is_zero()
    with pytest.raises(UnsupportedBackground):
        gauge_operator_H(Deformation(Poly.z(), 0, HattedStructure(X)))


def test_linearization_examples():
    lin = linearization_L(Deformation(0, R2))
    assert lin.scalar == jet(Poly.constant(10))
    assert lin.E_part.is_zero()
    lin = linearization_L(Deformation(Poly.constant(3), Poly.constant(2)))
    assert lin.scalar.is_zero() and lin.E_part.is_zero()
    lin = linearization_L(Deformation(R2, 0))
    assert lin.E_operator == jet(Poly.constant(1))
    assert lin.E_part == jet(Poly.constant(4))


def test_linearization_e_part_is_componentwise_sublaplacian():
    E = X * X * T + Y.scale((0, 1)) * T * T
    lin = linearization_L(Deformation(E, 0))
    flat = FlatStructure()
    assert lin.E_operator == flat.sublaplacian(E.real_part()) + flat.sublaplacian(E.imag_part()).scale((0, 1))
    with pytest.raises(UnsupportedBackground):
        linearization_L(Deformation(E, 0), n=2)


# ---- finite-difference verifier ------------------------------------------------------------------

def test_fd_verify_rescaling_family():
    c = 0.3
    fam = HomogeneousFamily(CANON, 0j, c)
    rep = fd_verify(fam.webster, lambda: complex(webster_variation(fam.deformation())), eps=1e-3)
    assert rep.abs_error <= 1e-7
    assert complex(rep.analytic) == pytest.approx(-4 * c)


def test_fd_verify_constant_family():
    rep = fd_verify(lambda u: 2.0, 0.0)
    assert rep.abs_error == 0 and math.isnan(rep.richardson_ratio) and rep.passed()


def test_fd_verify_errors():
    with pytest.raises(ValueError):
        fd_verify(lambda u: u, 1.0, eps=0.0)

    def broken(u):
        raise ZeroDivisionError("boom")

    with pytest.raises(FamilyEvaluationFailed):
        fd_verify(broken, 0.0)


def test_richardson_detects_wrong_formula():
    fam = HomogeneousFamily(CANON, 0j, 0.3)
    rep = fd_verify(fam.webster, -1.0)
    assert not rep.passed()


def test_variation_battery():
    res = run_suite("variations", cases=24, seed=3)
    assert res.passed, res.failures()


def test_scalar_wrapper():
    s = Scalar(1 + 2j)
    assert complex(s.conj()) == 1 - 2j
    assert complex(s.scale((0, 1))) == pytest.approx(-2 + 1j)
    assert (s - s).is_zero()
    assert complex(s.real_part()) == 1
