import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torsionflow.errors import DegenerateContact, NonCompatibleJ
from torsionflow.frame import (
    J_CANONICAL,
    LeftInvariantStructure,
    LieAlgebra3,
    adapted_coframe,
    geometry_of,
    heisenberg,
    jacobi_check,
    j_from_chart,
    reeb_vector,
    sigma,
    solve_structure_equations,
    structure_residual,
    su2,
)

SU2, HEIS = su2(), heisenberg()
E1, E2, E3 = np.eye(3)


def standard(alg=SU2, s=1.0, J=J_CANONICAL):
    return LeftInvariantStructure(alg, s * sigma(3), J)


charts = st.tuples(st.floats(-0.5, 0.5), st.floats(-1.6, -0.6))
scales = st.floats(0.3, 3.0)


# ---- Lie algebras ------------------------------------------------------------------

def test_jacobi_examples():
    assert jacobi_check(SU2)
    assert jacobi_check(HEIS)


def test_jacobi_sign_flip_of_diagonal_algebra_still_holds():
    # [e1,e2] = e3, [e2,e3] = e1, [e3,e1] = e2 with any single sign flipped is still a Lie algebra:
    # each bracket [e_i, e_j] is a multiple of the third vector, so every Jacobi sum vanishes
    flipped = LieAlgebra3.from_brackets({(1, 2): {3: -1}, (2, 3): {1: 1}, (3, 1): {2: 1}})
    assert jacobi_check(flipped)


def test_jacobi_failure_detected():
    bad = LieAlgebra3.from_brackets({(1, 2): {3: 1}, (1, 3): {1: 1}})
    assert not jacobi_check(bad)


def test_structure_constants_must_be_antisymmetric():
    c = np.zeros((3, 3, 3))
    c[2, 0, 1] = 1
    with pytest.raises(ValueError):
        LieAlgebra3(c)


# ---- Reeb field and coframe --------------------------------------------------------

def test_reeb_examples():
    np.testing.assert_allclose(reeb_vector(standard()), E3)
    np.testing.assert_allclose(reeb_vector(standard(s=2.0)), E3 / 2)
    np.testing.assert_allclose(reeb_vector(standard(HEIS)), E3)


def test_degenerate_contact_form():
    with pytest.raises(DegenerateContact):
        reeb_vector(LeftInvariantStructure(HEIS, sigma(1), J_CANONICAL))


def test_standard_coframe():
    cf = adapted_coframe(standard())
    np.testing.assert_allclose(cf.Z1, (E1 + 1j * E2) / 2, atol=1e-15)
    assert abs(cf.Z1[0]) == pytest.approx(0.5)


def test_rescaled_coframe():
    for s in (0.5, 2.0, 3.7):
        cf = adapted_coframe(standard(s=s))
        np.testing.assert_allclose(cf.Z1, adapted_coframe(standard()).Z1 / np.sqrt(s), atol=1e-14)


def test_heisenberg_coframe_is_closed():
    cf = adapted_coframe(standard(HEIS))
    np.testing.assert_allclose(HEIS.d(cf.theta1), 0, atol=1e-15)


def test_incompatible_J_rejected():
    with pytest.raises(NonCompatibleJ):
        adapted_coframe(standard(J=np.eye(2)))
    with pytest.raises(NonCompatibleJ):
        adapted_coframe(standard(J=-J_CANONICAL))  # wrong orientation: d theta(X, JX) < 0
    with pytest.raises(NonCompatibleJ):
        j_from_chart(0.1, 0.5)


@given(charts, scales)
def test_coframe_invariants(chart, s):
    cf = adapted_coframe(standard(s=s, J=j_from_chart(*chart)))
    for name, r in cf.invariant_residuals().items():
        assert r <= 1e-12 * max(1.0, s), name


# ---- structure equations -------------------------------------------------------------

def test_geometry_examples():
    g = geometry_of(standard())
    assert abs(g.A11) <= 1e-14 and g.W == pytest.approx(2, abs=1e-12)
    assert g.omega[2] == pytest.approx(-2j)
    h = geometry_of(standard(HEIS))
    assert abs(h.A11) <= 1e-14 and abs(h.W) <= 1e-14
    for s in (0.5, 2.0, 4.0):
        g = geometry_of(standard(s=s))
        assert g.W == pytest.approx(2 / s, rel=1e-12) and abs(g.A11) <= 1e-14
        assert g.ricci == g.W


@given(charts, scales)
def test_reality_and_residual(chart, s):
    g = geometry_of(standard(s=s, J=j_from_chart(*chart)))
    p, q, r = g.omega
    assert abs(p + np.conj(q)) <= 1e-12
    assert abs(r.real) <= 1e-12
    assert g.residual <= 1e-12


@given(charts, scales)
def test_scaling_law(chart, c):
    J = j_from_chart(*chart)
    g1 = geometry_of(standard(J=J))
    gc = geometry_of(standard(s=c, J=J))
    assert gc.W == pytest.approx(g1.W / c, rel=1e-12)
    assert abs(gc.A11) == pytest.approx(abs(g1.A11) / c, rel=1e-10, abs=1e-14)


@given(charts, st.sampled_from(range(4)), st.floats(1e-6, 1e-2))
def test_solution_is_unique(chart, which, delta):
    cf = adapted_coframe(standard(J=j_from_chart(*chart)))
    g = solve_structure_equations(cf)
    base = structure_residual(cf, g.omega, g.A11)
    omega, A = list(g.omega), g.A11
    if which < 3:
        omega[which] += delta
        # keep omega antihermitian: p = -conj(q), r imaginary
        if which == 0:
            omega[1] = -np.conj(omega[0])
        elif which == 1:
            omega[0] = -np.conj(omega[1])
        else:
            omega[2] = omega[2] + 1j * delta - delta
    else:
        A = A + delta
    assert structure_residual(cf, tuple(omega), A) > base


def test_perturbed_structure_has_torsion():
    # ||J - J_can||_F = 0.1 with b = -1: 2a^2 + a^4 = 0.01
    a = np.sqrt(np.sqrt(1.01) - 1)
    J = j_from_chart(a, -1.0)
    assert np.linalg.norm(J - J_CANONICAL) == pytest.approx(0.1, abs=1e-14)
    g = geometry_of(standard(J=J))
    assert g.A_abs == pytest.approx(0.1413333797238916, rel=1e-10)  # regression fixture
    assert g.W == pytest.approx(2.004987562112088, rel=1e-10)
