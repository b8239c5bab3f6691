"""Exact pseudohermitian calculus on the 3-dimensional Heisenberg group.

Fixed flat data (coordinates x, y, t and z = x + iy)::

    theta_0 = dt + i(z dzbar - zbar dz) = dt - 2y dx + 2x dy
    theta^1 = sqrt(2) dz
    Z_1     = (d/dz + i zbar d/dt) / sqrt(2)
    T       = d/dt

A rescaled structure theta_hat = e^{2f} theta_0 uses the coframe
theta_hat^1 = e^f (theta^1 + 2i f^1 theta) and the dual frame
Z_hat_1 = e^{-f} Z_1, T_hat = e^{-2f}(T + 2i f_1 Z_1bar - 2i f_1bar Z_1).

All tensors are handled at n = 1 through their *charge*: a component with
``a`` lower 1-indices and ``b`` lower 1bar-indices has charge a - b, and its
covariant derivative along a frame vector X is  X(s) - charge * omega(X) * s,
where omega = omega_1^1.  Index raising uses h_{1 1bar} = 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from gmpy2 import mpq

from .errors import UnsupportedIndexType
from .jet import FLAT, Background, WeightedJet
from .poly import Poly, gaussian

I = (0, 1)
DIRECTIONS = ("1", "1bar", "0")
MAX_RANK = 5

_CHARGE = {"1": 1, "1bar": -1, "0": 0}


@dataclass(frozen=True)
class Component:
    """One component of a tensor: its value and its lower index labels."""

    value: WeightedJet
    indices: tuple[str, ...] = ()

    @property
    def charge(self) -> int:
        return sum(_CHARGE[i] for i in self.indices)

    def conj(self) -> "Component":
        swap = {"1": "1bar", "1bar": "1", "0": "0"}
        return Component(self.value.conj(), tuple(swap[i] for i in self.indices))


class JetStructure:
    """Pseudohermitian structure on the Heisenberg group over a background exponent."""

    hatted = False

    def __init__(self, bg: Background = FLAT):
        self.bg = bg

    # ---- data every structure provides --------------------------------
    def frame(self, direction: str, g: WeightedJet) -> WeightedJet:
        raise NotImplementedError

    def omega(self, direction: str) -> WeightedJet:
        raise NotImplementedError

    @property
    def torsion(self) -> WeightedJet:
        """A_11."""
        raise NotImplementedError

    @property
    def webster(self) -> WeightedJet:
        raise NotImplementedError

    # ---- helpers ------------------------------------------------------
    def jet(self, p: Poly | WeightedJet, weight: int = 0) -> WeightedJet:
        if isinstance(p, WeightedJet):
            return p
        if not isinstance(p, Poly):
            p = Poly.constant(p)
        return WeightedJet.lift(self.bg, p, weight)

    def const(self, c) -> WeightedJet:
        return WeightedJet.const(self.bg, c)

    def covariant(self, comp: Component, direction: str) -> Component:
        if direction not in _CHARGE:
            raise ValueError(f"unknown index {direction!r}")
        if len(comp.indices) >= MAX_RANK:
            raise UnsupportedIndexType(f"rank {len(comp.indices) + 1} exceeds supported rank {MAX_RANK}")
        d = self.frame(direction, comp.value)
        c = comp.charge
        if c:
            d = d - (self.omega(direction) * comp.value).scale(c)
        return Component(d, comp.indices + (direction,))

    def nabla(self, comp: Component, *directions: str) -> Component:
        for d in directions:
            comp = self.covariant(comp, d)
        return comp

    def scalar(self, phi) -> Component:
        return Component(self.jet(phi))

    def torsion_component(self) -> Component:
        return Component(self.torsion, ("1", "1"))

    # ---- scalar operators ---------------------------------------------
    def sublaplacian(self, phi) -> WeightedJet:
        s = self.scalar(phi)
        return self.nabla(s, "1", "1bar").value + self.nabla(s, "1bar", "1").value

    def paneitz_p1(self, phi) -> WeightedJet:
        """P_1 phi = phi_{1bar 1 1} + i A_11 phi_{1bar}."""
        s = self.scalar(phi)
        d1b = self.covariant(s, "1bar")
        return self.nabla(d1b, "1", "1").value + (self.torsion * d1b.value).scale(I)

    def divergence(self, sigma: Component) -> WeightedJet:
        """delta_b of a (1,0)-form: sigma_{1, 1bar}; of a (0,1)-form: sigma_{1bar, 1}."""
        if sigma.indices == ("1",) or sigma.charge == 1:
            return self.covariant(sigma, "1bar").value
        if sigma.indices == ("1bar",) or sigma.charge == -1:
            return self.covariant(sigma, "1").value
        raise UnsupportedIndexType("divergence needs a (1,0)- or (0,1)-form")

    def paneitz_p0(self, phi) -> WeightedJet:
        """P_0 phi = (1/2)[delta_b(P phi) + deltabar_b(Pbar phi)].

        For real phi the two divergences coincide, so this is delta_b(P phi).
        The halving gives the normalization P_0 = (1/4)(Delta_b^2 + T^2) on the
        flat model; see ``paneitz_p0_factorized`` for the general form.
        """
        phi = self.jet(phi)
        p = Component(self.paneitz_p1(phi), ("1",))
        pbar = Component(self.paneitz_p1(phi.conj()).conj(), ("1bar",))
        return (self.divergence(p) + self.divergence(pbar)).scale(mpq(1, 2))

    def paneitz_p0_factorized(self, phi) -> WeightedJet:
        """(1/4)[(Delta_b^2 + T^2) phi - 4 Re(i (A_{1bar1bar} phi_1)_{,1})].

        The torsion term carries 4, not 2: T^2 is not the real part of
        box_b boxbar_b once A != 0, and the commutator [Delta_b, T] supplies a
        second copy of the same term.
        """
        phi = self.jet(phi)
        lap2 = self.sublaplacian(self.sublaplacian(phi))
        tt = self.frame("0", self.frame("0", phi))
        abar = self.torsion.conj()
        v = Component(abar * self.frame("1", phi), ("1bar",))
        term = self.covariant(v, "1").value.scale(I)
        return (lap2 + tt - (term + term.conj()).scale(2)).scale(mpq(1, 4))

    def folland_stein(self, alpha, phi) -> WeightedJet:
        """L_alpha phi = Delta_b phi - i alpha T phi."""
        phi = self.jet(phi)
        re, im = gaussian(alpha)
        # -i alpha = im - i re
        return self.sublaplacian(phi) + self.frame("0", phi).scale((im, -re))


class FlatStructure(JetStructure):
    """(theta_0, J_0): connection, torsion and curvature all vanish."""

    def frame(self, direction, g):
        g = self.jet(g)
        if direction == "1":
            return g.z1()
        if direction == "1bar":
            return g.z1bar()
        if direction == "0":
            return g.t_deriv()
        raise ValueError(direction)

    def omega(self, direction):
        return WeightedJet.zero(self.bg)

    @property
    def torsion(self):
        return WeightedJet.zero(self.bg)

    @property
    def webster(self):
        return WeightedJet.zero(self.bg)


class HattedStructure(JetStructure):
    """theta_hat = e^{2g} theta for a base structure theta, same CR structure.

    ``HattedStructure(f)`` rescales the flat model by f.  Passing a base
    structure and the index of one of its background exponents (or a tuple of
    integer coefficients combining them) rescales that structure instead,
    which lets two rescalings be composed exactly.

    With g_1 = Z_1 g, g_11 = g_{1,1} and Delta_b g taken in the base structure::

        Z_hat_1 = e^{-g} Z_1
        T_hat   = e^{-2g} (T + 2i g_1 Z_1bar - 2i g_1bar Z_1)
        omega_hat = omega + 3 g_1 theta^1 - 3 g_1bar theta^1bar
                    + i (Delta_b g + 8 g_1 g_1bar) theta

    The theta coefficient is the one forced by d theta_hat^1 = theta_hat^1 ^
    omega_hat + theta_hat ^ tau_hat together with the torsion and Webster laws
    below; the often-quoted "+ 4 g_gamma g^gamma" reading is off by
    4 g_1 g_1bar at n = 1 and is kept only as ``ConnectionRecord.quoted_theta``.
        A_hat_11 = e^{-2g} (A_11 + 2i g_11 - 4i g_1^2)
        W_hat    = e^{-2g} (W - 4 Delta_b g - 8 g_1 g_1bar)
    """

    hatted = True

    def __init__(self, f: "Poly | Background | JetStructure", index: "int | tuple[int, ...]" = 0):
        if isinstance(f, JetStructure):
            base = f
        else:
            bg = f if isinstance(f, Background) else Background(f)
            base = FlatStructure(bg)
        super().__init__(base.bg)
        self.base = base
        # the exponent is an integer combination of the background exponents
        coeffs = base.bg.unit(index) if isinstance(index, int) else base.bg.weight(index)
        self.index = coeffs
        g = Poly()
        for c, e in zip(coeffs, base.bg.exps):
            if c:
                g = g + e.scale(mpq(c))
        self.g = g
        self._w1 = tuple(-c for c in coeffs)
        self._w2 = tuple(-2 * c for c in coeffs)

    @property
    def flat(self) -> JetStructure:
        """The structure being rescaled (the flat model for ``HattedStructure(f)``)."""
        return self.base

    # base derivatives of g, all weight 0
    @cached_property
    def _g1(self) -> Component:
        return self.base.covariant(self.base.scalar(self.g), "1")

    @cached_property
    def f1(self) -> WeightedJet:
        return self._g1.value

    @cached_property
    def f1bar(self) -> WeightedJet:
        return self.base.frame("1bar", self.g)

    @cached_property
    def f11(self) -> WeightedJet:
        return self.base.covariant(self._g1, "1").value

    @cached_property
    def lap_f(self) -> WeightedJet:
        return self.base.sublaplacian(self.g)

    @cached_property
    def grad_sq(self) -> WeightedJet:
        """g_gamma g^gamma = g_1 g_1bar."""
        return self.f1 * self.f1bar

    def frame(self, direction, g):
        g = self.jet(g)
        base = self.base
        if direction == "1":
            return base.frame("1", g).with_weight(self._w1)
        if direction == "1bar":
            return base.frame("1bar", g).with_weight(self._w1)
        if direction == "0":
            two_i = (0, 2)
            d = (
                base.frame("0", g)
                + (self.f1 * base.frame("1bar", g)).scale(two_i)
                - (self.f1bar * base.frame("1", g)).scale(two_i)
            )
            return d.with_weight(self._w2)
        raise ValueError(direction)

    @cached_property
    def _omega(self) -> dict[str, WeightedJet]:
        b = self.base
        p0, q0, r0 = b.omega("1"), b.omega("1bar"), b.omega("0")
        two_i = (0, 2)
        reeb = (
            r0
            + (self.f1 * q0).scale(two_i)
            - (self.f1bar * p0).scale(two_i)
            + (self.lap_f - self.grad_sq.scale(4)).scale(I)
        )
        return {
            "1": (p0 + self.f1.scale(3)).with_weight(self._w1),
            "1bar": (q0 - self.f1bar.scale(3)).with_weight(self._w1),
            "0": reeb.with_weight(self._w2),
        }

    def omega(self, direction):
        return self._omega[direction]

    @cached_property
    def torsion(self):
        a = self.base.torsion + self.f11.scale((0, 2)) - (self.f1 * self.f1).scale((0, 4))
        return a.with_weight(self._w2)

    @cached_property
    def webster(self):
        w = self.base.webster - self.lap_f.scale(4) - self.grad_sq.scale(8)
        return w.with_weight(self._w2)

    def hat_connection_coefficients(self) -> "ConnectionRecord":
        p, q, r = self.omega("1"), self.omega("1bar"), self.omega("0")
        b = self.base
        return ConnectionRecord(
            on_z1=p,
            on_z1bar=q,
            on_reeb=r,
            background_theta1=b.omega("1") + self.f1.scale(3),
            background_theta1bar=b.omega("1bar") - self.f1bar.scale(3),
            background_theta=b.omega("0") + (self.lap_f + self.grad_sq.scale(8)).scale(I),
            quoted_theta=(self.lap_f + self.grad_sq.scale(4)).scale(I),
            reeb=lambda phi: self.frame("0", phi),
            z1=lambda phi: self.frame("1", phi),
        )


@dataclass(frozen=True)
class ConnectionRecord:
    """omega_hat_1^1 in the hatted coframe and in the background coframe.

    ``on_*`` are omega_hat evaluated on the hatted frame, i.e. the coefficients
    of theta_hat^1, theta_hat^1bar and theta_hat.  ``background_*`` are the
    coefficients with respect to theta^1, theta^1bar and theta of the flat model.
    ``quoted_theta`` is i(Delta_b f + 4 f_1 f_1bar), the literal n = 1 reading of
    the usual transformation formula; it is NOT the theta coefficient (that
    has 8 in place of 4).  ``reeb`` and ``z1`` apply the hatted frame fields.
    """

    on_z1: WeightedJet
    on_z1bar: WeightedJet
    on_reeb: WeightedJet
    background_theta1: WeightedJet
    background_theta1bar: WeightedJet
    background_theta: WeightedJet
    quoted_theta: WeightedJet
    reeb: object = None
    z1: object = None


def structure(f: Poly | None = None, *, hatted: bool = True, bg: Background | None = None) -> JetStructure:
    """Flat structure when ``f`` is None or not ``hatted``; else theta_hat = e^{2f} theta_0."""
    if bg is None:
        bg = Background(f) if f is not None else FLAT
    return HattedStructure(bg) if hatted else FlatStructure(bg)


# ---- module-level operation surface ----------------------------------------


def frame_derivative(direction: str, phi: WeightedJet) -> WeightedJet:
    """Derivative along the flat frame field Z1, Z1bar or T."""
    return FlatStructure(phi.bg).frame({"Z1": "1", "Z1bar": "1bar", "T": "0"}.get(direction, direction), phi)


def hat_connection_coefficients(f: Poly) -> ConnectionRecord:
    return HattedStructure(f).hat_connection_coefficients()


def covariant_derivative(tensor: Component, index: str, struct: JetStructure) -> Component:
    return struct.covariant(tensor, index)


def sublaplacian(phi, struct: JetStructure | None = None) -> WeightedJet:
    struct = struct or _default(phi)
    return struct.sublaplacian(phi)


def paneitz_P1(phi, struct: JetStructure | None = None) -> WeightedJet:
    struct = struct or _default(phi)
    return struct.paneitz_p1(phi)


def paneitz_P0(phi, struct: JetStructure | None = None) -> WeightedJet:
    struct = struct or _default(phi)
    return struct.paneitz_p0(phi)


def folland_stein(alpha, phi, struct: JetStructure | None = None) -> WeightedJet:
    struct = struct or _default(phi)
    return struct.folland_stein(alpha, phi)


def _default(phi) -> JetStructure:
    return FlatStructure(phi.bg if isinstance(phi, WeightedJet) else FLAT)


# ---- exact exterior calculus check of the frame constants -------------------


def _d_one_form(form: tuple[Poly, Poly, Poly]) -> tuple[Poly, Poly, Poly]:
    """d of a dx, dy, dt form; returns (dx^dy, dx^dt, dy^dt) coefficients."""
    a, b, c = form
    return (b.diff_x() - a.diff_y(), c.diff_x() - a.diff_t(), c.diff_y() - b.diff_t())


def verify_frame_constants() -> bool:
    """Check d theta_0 = i theta^1 ^ theta^1bar and the duality pairings exactly."""
    x, y = Poly.x(), Poly.y()
    theta0 = (y.scale(mpq(-2)), x.scale(mpq(2)), Poly.constant(1))
    d0 = _d_one_form(theta0)
    # theta^1 ^ theta^1bar = 2 dz ^ dzbar = -4i dx ^ dy, so i * that = 4 dx ^ dy
    ok = d0 == (Poly.constant(4), Poly(), Poly())
    # Z_1 coordinate components times sqrt(2): (1/2, -i/2, i zbar)
    zbar = Poly.zbar()
    z1 = (Poly.constant(mpq(1, 2)), Poly.constant((0, mpq(-1, 2))), zbar.scale(0, 1))
    pairing = theta0[0] * z1[0] + theta0[1] * z1[1] + theta0[2] * z1[2]
    ok &= pairing.is_zero()
    # sqrt(2) dz (Z_1) = dz((d_z + ...)) = 1
    dz = (Poly.constant(1), Poly.constant((0, 1)), Poly())
    ok &= (dz[0] * z1[0] + dz[1] * z1[1] + dz[2] * z1[2]) == Poly.constant(1)
    # theta^1(T) = 0 and theta_0(T) = 1
    ok &= dz[2].is_zero() and theta0[2] == Poly.constant(1)
    return bool(ok)


FRAME_CONSTANTS_OK = verify_frame_constants()
