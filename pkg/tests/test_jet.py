from fractions import Fraction

import pytest
from hypothesis import given

from torsionflow.errors import BackgroundMismatch
from torsionflow.jet import Background, WeightedJet
from torsionflow.poly import Poly

from conftest import polys

X, Y, T = Poly.x(), Poly.y(), Poly.t()


def jets(bg, p, q):
    return WeightedJet.lift(bg, p) + WeightedJet.lift(bg, q, weight=-2)


@given(polys(real=True, max_degree=2), polys(), polys())
def test_frame_derivatives_are_derivations(f, p, q):
    bg = Background(f)
    a, b = jets(bg, p, q), jets(bg, q, p)
    for d in ("z1", "z1bar", "t_deriv"):
        assert getattr(a * b, d)() == getattr(a, d)() * b + a * getattr(b, d)()


@given(polys(real=True, max_degree=2), polys())
def test_flat_frame_bracket(f, p):
    """[Z1, Z1bar] = -i T on the flat model."""
    a = jets(Background(f), p, p)
    lhs = a.z1bar().z1() - a.z1().z1bar()
    assert lhs == a.t_deriv().scale((0, -1))


@given(polys(real=True, max_degree=2), polys())
def test_weight_set_is_preserved(f, p):
    a = WeightedJet.lift(Background(f), p, weight=3)
    if not p.is_zero():
        assert a.z1().weights() <= {3}
        assert a.t_deriv().weights() <= {3}


def test_derivative_of_exponential_weight():
    f = X * Y
    bg = Background(f)
    one = WeightedJet.const(bg, 1, weight=1)  # e^{f}
    assert one.t_deriv().is_zero()
    # Z1 e^{f} = e^{f} Z1 f
    assert one.z1() == WeightedJet.lift(bg, Poly.constant(1), 1) * WeightedJet.lift(bg, f).z1()


def test_sqrt2_is_exact():
    bg = Background()
    r2 = WeightedJet.sqrt2(bg)
    assert r2 * r2 == WeightedJet.const(bg, 2)
    assert WeightedJet.lift(bg, X).z1() == r2.scale(Fraction(1, 4))


def test_equality_decidable_and_evaluate():
    bg = Background(X)
    a = WeightedJet.lift(bg, Y, weight=1)
    assert a != WeightedJet.lift(bg, Y, weight=2)
    v = a.evaluate(Fraction(1, 2), 3, 0)
    assert v == pytest.approx(3 * 2.718281828459045**0.5)


def test_background_mismatch():
    with pytest.raises(BackgroundMismatch):
        WeightedJet.lift(Background(X), Y) + WeightedJet.lift(Background(Y), Y)
