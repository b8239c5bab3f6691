"""Variation formulas of the general CR flow  dJ/dt = 2E, d theta/dt = 2 eta theta  at n = 1.

The same formula code runs in two contexts:

* **jet** -- a Heisenberg structure (flat or rescaled) whose values are exact
  :class:`WeightedJet` objects;
* **homogeneous** -- a left-invariant structure on a 3-dimensional Lie group,
  with E and eta constant in the adapted frame.  Frame derivatives of
  constants vanish and covariant derivatives reduce to connection terms.

Index conventions: h_{1 1bar} = 1, E_1^{1bar} = E_11, E_{1bar}^1 = E_{1bar1bar} =
conj(E_11), and the frame moves as  dZ_1/dt = -eta Z_1 - i E_11 Z_1bar.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FamilyEvaluationFailed, UnsupportedBackground
from .frame import (
    AdaptedCoframe,
    LeftInvariantStructure,
    PseudohermitianGeometry,
    adapted_coframe,
    solve_structure_equations,
    torsion_endomorphism,
)
from .heisenberg import Component, FlatStructure, JetStructure
from .jet import WeightedJet

I = (0, 1)


# ---- homogeneous context ----------------------------------------------------

class Scalar:
    """A complex constant with the small arithmetic surface the formulas use."""

    __slots__ = ("v",)

    def __init__(self, v=0):
        self.v = complex(v.v if isinstance(v, Scalar) else v)

    @staticmethod
    def _c(c) -> complex:
        if isinstance(c, tuple):
            return complex(float(c[0]), float(c[1]))
        return complex(c)

    def scale(self, c) -> "Scalar":
        return Scalar(self.v * self._c(c))

    def conj(self) -> "Scalar":
        return Scalar(self.v.conjugate())

    def real_part(self) -> "Scalar":
        return Scalar(self.v.real)

    def _o(self, other) -> complex:
        return other.v if isinstance(other, Scalar) else complex(other)

    def __add__(self, other):
        return Scalar(self.v + self._o(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self.v - self._o(other))

    def __rsub__(self, other):
        return Scalar(self._o(other) - self.v)

    def __neg__(self):
        return Scalar(-self.v)

    def __mul__(self, other):
        return Scalar(self.v * self._o(other))

    __rmul__ = __mul__

    def is_zero(self, tol: float = 0.0) -> bool:
        return abs(self.v) <= tol

    def __complex__(self):
        return self.v

    def __repr__(self):
        return f"Scalar({self.v!r})"


class HomogeneousStructure(JetStructure):
    """Left-invariant structure: constants only, omega = p theta^1 + q theta^1bar + r theta."""

    def __init__(self, structure: LeftInvariantStructure):
        self.left_invariant = structure
        self.coframe: AdaptedCoframe = adapted_coframe(structure)
        self.geometry: PseudohermitianGeometry = solve_structure_equations(self.coframe)
        p, q, r = self.geometry.omega
        self._omega = {"1": Scalar(p), "1bar": Scalar(q), "0": Scalar(r)}

    def jet(self, p, weight: int = 0):
        return p if isinstance(p, Scalar) else Scalar(p)

    def const(self, c):
        return Scalar(c)

    def frame(self, direction, g):
        return Scalar(0)

    def omega(self, direction):
        return self._omega[direction]

    @property
    def torsion(self):
        return Scalar(self.geometry.A11)

    @property
    def webster(self):
        return Scalar(self.geometry.W)


def homogeneous_context(structure: LeftInvariantStructure) -> HomogeneousStructure:
    return HomogeneousStructure(structure)


# ---- deformations -------------------------------------------------------------

@dataclass
class Deformation:
    """G = E (+) eta theta: E through its component E_11, eta a real scalar.

    ``context`` is the structure the variation is taken at (a Heisenberg jet
    structure or a :class:`HomogeneousStructure`).
    """

    E11: object = 0
    eta: object = 0
    context: JetStructure | None = None

    def resolved(self, state=None) -> tuple[JetStructure, object, object]:
        ctx = state if state is not None else self.context
        if ctx is None:
            ctx = FlatStructure()
        if isinstance(ctx, LeftInvariantStructure):
            ctx = HomogeneousStructure(ctx)
        return ctx, ctx.jet(self.E11), ctx.jet(self.eta)


@dataclass
class ConnectionRicciVariation:
    """omega_dot = theta1 * theta^1 + theta1bar * theta^1bar + theta * theta, and R_dot_{1 1bar}."""

    theta1: object
    theta1bar: object
    theta: object
    ricci: object


def _i(v):
    return v.scale(I)


def _re2(v):
    """2 Re(v) = v + conj(v)."""
    return v + v.conj()


def coframe_variation(d: Deformation, state=None):
    """Coefficients of theta_dot^1 on (theta, theta^1, theta^1bar): (2i eta^1, eta, -i E^1_1bar)."""
    ctx, E, eta = d.resolved(state)
    eta_up = ctx.covariant(Component(eta), "1bar").value  # eta^1 = eta_{1bar}
    return _i(eta_up).scale(2), eta, _i(E.conj()).scale(-1)


def torsion_variation(d: Deformation, state=None):
    """A_dot_{1bar1bar} = -2(i eta_{1bar1bar} + eta A_{1bar1bar}) - i E_{1bar1bar,0}."""
    ctx, E, eta = d.resolved(state)
    eta_bb = ctx.nabla(Component(eta), "1bar", "1bar").value
    abar = ctx.torsion.conj()
    e0 = ctx.covariant(Component(E.conj(), ("1bar", "1bar")), "0").value
    return (_i(eta_bb) + eta * abar).scale(-2) - _i(e0)


def connection_ricci_variation(d: Deformation, state=None) -> ConnectionRicciVariation:
    ctx, E, eta = d.resolved(state)
    A = ctx.torsion
    contraction = _re2(A * E.conj())  # A_1^1bar E_1bar^1 + A_1bar^1 E_1^1bar
    lap = ctx.sublaplacian(eta)
    eta1 = ctx.covariant(Component(eta), "1").value
    eta1b = ctx.covariant(Component(eta), "1bar").value
    divE = ctx.covariant(Component(E, ("1", "1")), "1bar").value  # E_11,^1
    divEb = ctx.covariant(Component(E.conj(), ("1bar", "1bar")), "1").value  # E_1bar1bar,^1bar
    c1 = eta1.scale(3) - _i(divE)
    c1b = eta1b.scale(3) + _i(divEb)
    theta_coeff = _i(contraction + lap)
    ricci = (
        (contraction + lap).scale(-1)
        - (eta * ctx.webster).scale(2)
        - ctx.covariant(Component(c1, ("1",)), "1bar").value
        - ctx.covariant(Component(c1b, ("1bar",)), "1").value
    )
    return ConnectionRicciVariation(theta1=c1, theta1bar=c1b.scale(-1), theta=theta_coeff, ricci=ricci)


def webster_variation(d: Deformation, state=None):
    """W_dot = 2 Re(i E_11,^{11} - A_1^1bar E_1bar^1) - (4 Delta_b eta + 2 W eta)."""
    ctx, E, eta = d.resolved(state)
    e2 = ctx.nabla(Component(E, ("1", "1")), "1bar", "1bar").value
    A = ctx.torsion
    return _re2(_i(e2) - A * E.conj()) - (ctx.sublaplacian(eta).scale(4) + (ctx.webster * eta).scale(2))


# ---- gauge operator and linearization ---------------------------------------------

def gauge_operator_H(G: Deformation, background: JetStructure | None = None) -> WeightedJet:
    """H(G) = h_1 + i E_11,^1 on the flat Heisenberg model (n = 1).

    The lower-order part of H is only specified up to terms that vanish on
    the flat model, so other backgrounds are refused.
    """
    ctx = background if background is not None else (G.context or FlatStructure())
    if not isinstance(ctx, FlatStructure):
        raise UnsupportedBackground("H is only pinned down on the flat Heisenberg background")
    E, h = ctx.jet(G.E11), ctx.jet(G.eta)
    h1 = ctx.covariant(Component(h), "1").value
    div = ctx.covariant(Component(E, ("1", "1")), "1bar").value
    return h1 + _i(div)


@dataclass
class Linearization:
    """Highest-weight part of the linearized flow at n = 1.

    ``E_operator`` is L_0 E_11 = Delta_b E_11 (the Folland-Stein operator at
    alpha = 0); the E-part of L is ``E_factor * E_operator`` = 4 Delta_b E_11.
    ``scalar`` is 2(2n + 2 + 1/n) Delta_b h = 10 Delta_b h.
    """

    E_operator: WeightedJet
    E_factor: int
    scalar: WeightedJet

    @property
    def E_part(self) -> WeightedJet:
        return self.E_operator.scale(self.E_factor)


def linearization_L(G: Deformation, n: int = 1) -> Linearization:
    ctx = G.context or FlatStructure()
    if not isinstance(ctx, FlatStructure) or n != 1:
        raise UnsupportedBackground("linearization is implemented on the flat model at n = 1")
    alpha = -((n - 1) ** 2) / n
    E, h = ctx.jet(G.E11), ctx.jet(G.eta)
    L0E = ctx.folland_stein(int(alpha), E)
    coeff = 2 * (2 * n + 2) + 2  # 2(2n + 2 + 1/n) at n = 1
    return Linearization(E_operator=L0E, E_factor=4 * n, scalar=ctx.sublaplacian(h).scale(coeff))


# ---- finite-difference verification ---------------------------------------------

@dataclass
class VariationReport:
    analytic: object
    finite_difference: object
    abs_error: float
    richardson_ratio: float
    eps: float = 1e-3
    name: str = ""
    extra: dict = field(default_factory=dict)

    def passed(self, tol: float = 1e-6, ratio: tuple[float, float] = (3.2, 4.8)) -> bool:
        if not self.abs_error <= tol:
            return False
        # NaN ratio: the eps/2 error is already at round-off, which bounds any
        # error in the formula itself by the floor; the ratio carries no information
        if np.isnan(self.richardson_ratio):
            return True
        return ratio[0] <= self.richardson_ratio <= ratio[1]


def _centered(family, u0, eps):
    try:
        plus, minus = np.asarray(family(u0 + eps)), np.asarray(family(u0 - eps))
    except Exception as exc:  # noqa: BLE001 - any failure of the family is reported uniformly
        raise FamilyEvaluationFailed(f"family could not be evaluated near u = {u0}: {exc}") from exc
    return (plus - minus) / (2 * eps)


def fd_verify(
    family: Callable[[float], object],
    formula,
    u0: float = 0.0,
    eps: float = 1e-3,
    *,
    name: str = "",
    floor: float = 1e-11,
) -> VariationReport:
    """Centered difference of ``family`` at u0 against the analytic derivative ``formula``.

    ``formula`` may be a value or a zero-argument callable.  The Richardson
    ratio err(eps) / err(eps/2) should be near 4 for an exact formula; it is
    NaN when err(eps/2) is at round-off level (below ``floor``).
    """
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 0.1]")
    analytic = np.asarray(formula() if callable(formula) else formula, dtype=complex)
    fd1 = _centered(family, u0, eps)
    fd2 = _centered(family, u0, eps / 2)
    e1 = float(np.max(np.abs(fd1 - analytic)))
    e2 = float(np.max(np.abs(fd2 - analytic)))
    ratio = e1 / e2 if e2 > floor else float("nan")
    return VariationReport(analytic, fd1, e1, ratio, eps, name)


# ---- homogeneous families ------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousFamily:
    """u -> (J(u), theta(u)) = (retract(J0 + 2u E), e^{2u eta} theta0) on a Lie algebra.

    E is the real endomorphism of the constant component ``E11`` in the
    adapted frame of the base structure.
    """

    base: LeftInvariantStructure
    E11: complex = 0j
    eta: float = 0.0

    def E_matrix(self) -> np.ndarray:
        return torsion_endomorphism(adapted_coframe(self.base), self.E11)

    def structure(self, u: float) -> LeftInvariantStructure:
        from .flow import retract

        J = retract(self.base.J + 2 * u * self.E_matrix())
        return LeftInvariantStructure(self.base.algebra, np.exp(2 * u * self.eta) * self.base.theta, J)

    def deformation(self) -> Deformation:
        return Deformation(self.E11, self.eta, HomogeneousStructure(self.base))

    # quantities along the family
    def webster(self, u: float) -> float:
        return solve_structure_equations(adapted_coframe(self.structure(u))).W

    def torsion_endomorphism(self, u: float) -> np.ndarray:
        cf = adapted_coframe(self.structure(u))
        return torsion_endomorphism(cf, solve_structure_equations(cf).A11)

    def connection_form(self, u: float) -> np.ndarray:
        cf = adapted_coframe(self.structure(u))
        p, q, r = solve_structure_equations(cf).omega
        return p * cf.theta1 + q * cf.theta1.conj() + r * cf.theta

    # analytic derivatives at u = 0
    def analytic_torsion_endomorphism(self) -> np.ndarray:
        """d/du of A11 Zbar (x) theta^1 + conj, from the torsion variation and the moving frame."""
        d = self.deformation()
        ctx = d.context
        cf = ctx.coframe
        A = ctx.geometry.A11
        Adot = complex(torsion_variation(d)).conjugate()  # d/du A_11
        E, eta = self.E11, self.eta
        Z = cf.Z1
        th1 = cf.theta1
        Zb_dot = -eta * Z.conj() + 1j * np.conj(E) * Z
        th1_dot = eta * th1 - 1j * np.conj(E) * th1.conj()
        U = cf.basis
        coords = lambda v: np.linalg.lstsq(U.T.astype(complex), v, rcond=None)[0]  # noqa: E731
        zb, zb_dot = coords(Z.conj()), coords(Zb_dot)
        out = np.zeros((2, 2))
        for j in range(2):
            uj = U[j]
            img = Adot * (th1 @ uj) * zb + A * (th1_dot @ uj) * zb + A * (th1 @ uj) * zb_dot
            out[:, j] = 2.0 * img.real
        return out

    def analytic_connection_form(self) -> np.ndarray:
        d = self.deformation()
        cf = d.context.coframe
        rec = connection_ricci_variation(d)
        return complex(rec.theta1) * cf.theta1 + complex(rec.theta1bar) * cf.theta1.conj() + complex(rec.theta) * cf.theta

    def reports(self, eps: float = 1e-3) -> list[VariationReport]:
        d = self.deformation()
        rec = connection_ricci_variation(d)
        return [
            fd_verify(self.webster, lambda: complex(webster_variation(d)), eps=eps, name="webster"),
            fd_verify(self.webster, lambda: complex(rec.ricci), eps=eps, name="ricci"),
            fd_verify(self.torsion_endomorphism, self.analytic_torsion_endomorphism, eps=eps, name="torsion"),
            fd_verify(self.connection_form, self.analytic_connection_form, eps=eps, name="connection"),
        ]
