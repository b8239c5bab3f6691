"""Coordinate-level finite-difference geometry on the rescaled Heisenberg group.

This is the brute-force cross-check for the jet engine.  It never touches the
conformal transformation laws: starting from the coordinate 1-form
theta_hat = e^{2f}(dt - 2y dx + 2x dy) and the flat (1,0) field Z_1, it

* normalizes Z_1 against the numerically differentiated Levi form,
* finds the Reeb field as the kernel of d theta_hat,
* reads connection and torsion off Lie brackets of the frame,
* gets the Webster curvature from d omega(Z_1, Z_1bar),

with every derivative a central difference.  Differences are nested up to
four deep, which is hopeless in double precision, so all arithmetic runs in
gmpy2 multiprecision on an integer lattice of offsets around the base point.
"""
from __future__ import annotations

import gmpy2
from gmpy2 import mpc, mpfr, mpq

from .poly import Poly, unpack

DEFAULT_PRECISION = 384
DEFAULT_STEP = mpq(1, 2**32)

_AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class GmpyContext:
    """Minimal numeric context so polynomials and jets evaluate in gmpy2."""

    @staticmethod
    def mpf(v):
        return mpfr(v)

    @staticmethod
    def mpc(re, im=0):
        return mpc(re, im)

    @staticmethod
    def exp(v):
        return gmpy2.exp(v)

    @staticmethod
    def sqrt(v):
        return gmpy2.sqrt(mpfr(v))

    @staticmethod
    def re(v):
        return v.real if isinstance(v, type(mpc(0))) else mpfr(v)


GMPY = GmpyContext()


def _shift(o, axis, s):
    return (o[0] + s * axis[0], o[1] + s * axis[1], o[2] + s * axis[2])


def _add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _scale(c, v):
    return tuple(c * a for a in v)


def _dot(u, v):
    return sum((a * b for a, b in zip(u, v)), mpc(0))


def _conj(v):
    if isinstance(v, tuple):
        return tuple(a.conjugate() for a in v)
    return v.conjugate()


def _inv3(m):
    """Inverse of a 3x3 complex matrix given as a tuple of rows."""
    (a, b, c), (d, e, f), (g, h, i) = m
    A, B, C = e * i - f * h, -(d * i - f * g), d * h - e * g
    D, E, F = -(b * i - c * h), a * i - c * g, -(a * h - b * g)
    G, H, I = b * f - c * e, -(a * f - c * d), a * e - b * d
    det = a * A + b * B + c * C
    return ((A / det, D / det, G / det), (B / det, E / det, H / det), (C / det, F / det, I / det))


class CoordinateOracle:
    """Pseudohermitian geometry of e^{2f} theta_0 at one base point.

    Every quantity is a function of an integer offset ``o`` (the lattice point
    ``base + step * o``) and is memoized, so nested stencils share work.
    """

    def __init__(self, f: Poly, point, *, step=DEFAULT_STEP, precision=DEFAULT_PRECISION):
        if not f.is_real():
            raise ValueError("conformal exponent must be real")
        self.precision = precision
        with gmpy2.context(gmpy2.get_context(), precision=precision):
            self._base = tuple(mpfr(mpq(c)) for c in point)
            self._h = mpfr(mpq(step))
            self._f_terms = [(unpack(k), mpfr(re)) for k, (re, _) in f.items()]
        self._cache: dict = {}

    # ---- lattice plumbing ---------------------------------------------
    def _memo(self, name, o, compute):
        key = (name, o)
        try:
            return self._cache[key]
        except KeyError:
            val = compute(o)
            self._cache[key] = val
            return val

    def coords(self, o):
        h = self._h
        return tuple(b + h * k for b, k in zip(self._base, o))

    def _d(self, fn, o, axis):
        h2 = 2 * self._h
        plus, minus = fn(_shift(o, axis, 1)), fn(_shift(o, axis, -1))
        if isinstance(plus, tuple):
            return tuple((p - m) / h2 for p, m in zip(plus, minus))
        return (plus - minus) / h2

    def apply(self, vec_fn, fn, o):
        """Directional derivative of ``fn`` along the vector field ``vec_fn`` at ``o``."""
        v = vec_fn(o)
        parts = [self._d(fn, o, ax) for ax in _AXES]
        if isinstance(parts[0], tuple):
            return tuple(sum((v[i] * parts[i][j] for i in range(3)), mpc(0)) for j in range(len(parts[0])))
        return sum((v[i] * parts[i] for i in range(3)), mpc(0))

    # ---- base data ----------------------------------------------------
    def f(self, o):
        def compute(o):
            x, y, t = self.coords(o)
            return sum((c * x**a * y**b * t**e for (a, b, e), c in self._f_terms), mpfr(0))

        return self._memo("f", o, compute)

    def theta(self, o):
        def compute(o):
            x, y, _ = self.coords(o)
            w = gmpy2.exp(2 * self.f(o))
            return (w * (-2 * y), w * (2 * x), w)

        return self._memo("theta", o, compute)

    def dtheta(self, o):
        """Antisymmetric matrix M_ij = d_i theta_j - d_j theta_i."""

        def compute(o):
            grads = [self._d(self.theta, o, ax) for ax in _AXES]
            return tuple(tuple(grads[i][j] - grads[j][i] for j in range(3)) for i in range(3))

        return self._memo("dtheta", o, compute)

    def z1_flat(self, o):
        def compute(o):
            x, y, _ = self.coords(o)
            s = gmpy2.sqrt(mpfr(2))
            return (mpc(1 / (2 * s), 0), mpc(0, -1 / (2 * s)), mpc(y / s, x / s))

        return self._memo("z1_flat", o, compute)

    def _two_form(self, M, u, v):
        return sum((M[i][j] * u[i] * v[j] for i in range(3) for j in range(3)), mpc(0))

    # ---- adapted frame ------------------------------------------------
    def z1(self, o):
        def compute(o):
            zf = self.z1_flat(o)
            levi = (-1j * self._two_form(self.dtheta(o), zf, _conj(zf))).real
            return _scale(1 / gmpy2.sqrt(levi), zf)

        return self._memo("z1", o, compute)

    def z1bar(self, o):
        return self._memo("z1bar", o, lambda o: _conj(self.z1(o)))

    def reeb(self, o):
        def compute(o):
            M = self.dtheta(o)
            v = (M[1][2], M[2][0], M[0][1])
            th = self.theta(o)
            norm = sum(a * b for a, b in zip(th, v))
            return tuple(mpc(a / norm) for a in v)

        return self._memo("reeb", o, compute)

    def coframe(self, o):
        """Rows (theta, theta^1, theta^1bar) dual to (T, Z_1, Z_1bar)."""

        def compute(o):
            T, Z, Zb = self.reeb(o), self.z1(o), self.z1bar(o)
            cols = (T, Z, Zb)
            m = tuple(tuple(cols[j][i] for j in range(3)) for i in range(3))
            return _inv3(m)

        return self._memo("coframe", o, compute)

    def bracket(self, X, Y, name, o):
        def compute(o):
            return _add(self.apply(X, Y, o), _scale(-1, self.apply(Y, X, o)))

        return self._memo(name, o, compute)

    # ---- connection, torsion, curvature -------------------------------
    def connection(self, o):
        """(p, q, r, A_11) with omega = p theta^1 + q theta^1bar + r theta."""

        def compute(o):
            th1 = self.coframe(o)[1]
            q = -_dot(th1, self.bracket(self.z1, self.z1bar, "[Z,Zb]", o))
            r = -_dot(th1, self.bracket(self.z1, self.reeb, "[Z,T]", o))
            abar = -_dot(th1, self.bracket(self.reeb, self.z1bar, "[T,Zb]", o))
            return (-q.conjugate(), q, r, abar.conjugate())

        return self._memo("connection", o, compute)

    def omega_on(self, direction, o):
        p, q, r, _ = self.connection(o)
        return {"1": p, "1bar": q, "0": r}[direction]

    def torsion(self, o=(0, 0, 0)):
        with self._ctx():
            return self.connection(o)[3]

    def webster(self, o=(0, 0, 0)):
        with self._ctx():
            return self._webster(o)

    def _webster(self, o):
        def compute(o):
            p_fn = lambda oo: self.connection(oo)[0]
            q_fn = lambda oo: self.connection(oo)[1]
            cof = self.coframe(o)
            p, q, r, _ = self.connection(o)
            br = self.bracket(self.z1, self.z1bar, "[Z,Zb]", o)
            om = _add(_add(_scale(p, cof[1]), _scale(q, cof[2])), _scale(r, cof[0]))
            return self.apply(self.z1, q_fn, o) - self.apply(self.z1bar, p_fn, o) - _dot(om, br)

        return self._memo("W", o, compute)

    # ---- covariant derivatives of scalar-like components --------------
    def _vec(self, direction):
        return {"1": self.z1, "1bar": self.z1bar, "0": self.reeb}[direction]

    def covariant(self, fn, charge, direction, name):
        """Return a memoized field: nabla_direction of a component of the given charge."""

        def field(o):
            def compute(o):
                return self.apply(self._vec(direction), fn, o) - charge * self.omega_on(direction, o) * fn(o)

            return self._memo(name, o, compute)

        return field

    def _f_complex(self, o):
        return mpc(self.f(o))

    def paneitz_fields(self):
        f1b = self.covariant(self._f_complex, 0, "1bar", "f_1b")
        f1b1 = self.covariant(f1b, -1, "1", "f_1b1")
        f1b11 = self.covariant(f1b1, 0, "1", "f_1b11")

        def p1(o):
            return self._memo("P1", o, lambda o: f1b11(o) + 1j * self.connection(o)[3] * f1b(o))

        p0 = self.covariant(p1, 1, "1bar", "P0")
        return p1, p0

    def paneitz_p1(self, o=(0, 0, 0)):
        with self._ctx():
            return self.paneitz_fields()[0](o)

    def paneitz_p0(self, o=(0, 0, 0)):
        with self._ctx():
            return self.paneitz_fields()[1](o)

    def _ctx(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.precision)


def sample_points() -> list[tuple[mpq, mpq, mpq]]:
    """27 fixed rational points in [-1, 1]^3 (a 3x3x3 grid)."""
    vals = (mpq(-3, 4), mpq(1, 5), mpq(2, 3))
    return [(a, b, c) for a in vals for b in vals for c in vals]
