"""Weighted jets: finite sums  sum_k e^{k f} (p_k + sqrt(2) q_k)  over a fixed exponent f.

The flat Heisenberg frame carries a factor 1/sqrt(2), so each weight slot is
split by a sqrt(2) grade ``r`` in {0, 1}.  A part keyed ``(k, r)`` holding the
polynomial ``p`` represents ``e^{k . f} * sqrt(2)^r * p``, where ``k`` is an
integer tuple paired with the background exponents.  With that split every
coefficient stays in Q(i) and equality is decided exactly.
"""
from __future__ import annotations

from gmpy2 import mpq

from .errors import BackgroundMismatch, NonRealFactor
from .poly import Poly, gaussian

_HALF = mpq(1, 2)
_TWO = mpq(2)


class Background:
    """Real polynomial conformal exponents with cached flat derivatives.

    Usually a single exponent ``f``.  Several exponents (f, g, ...) allow jets
    of the form e^{k f + m g} p, which is what composing two rescalings needs;
    weights are then integer tuples.
    """

    __slots__ = ("exps", "Df", "Dbf", "ft")

    def __init__(self, f: Poly | None = None, *more: Poly):
        exps = (Poly() if f is None else f,) + tuple(more)
        for e in exps:
            if not e.is_real():
                raise NonRealFactor("conformal exponent must be real-valued")
        self.exps = exps
        # sqrt(2) Z_1 f, sqrt(2) Z_1bar f, T f for each exponent
        self.Df = tuple(e.d_holo() for e in exps)
        self.Dbf = tuple(e.d_antiholo() for e in exps)
        self.ft = tuple(e.diff_t() for e in exps)

    @property
    def f(self) -> Poly:
        return self.exps[0]

    @property
    def rank(self) -> int:
        return len(self.exps)

    def weight(self, k) -> tuple[int, ...]:
        """Normalize an int (single exponent) or tuple weight."""
        if isinstance(k, tuple):
            if len(k) != len(self.exps):
                raise ValueError("weight length does not match the number of exponents")
            return k
        if len(self.exps) != 1:
            raise ValueError("integer weight is ambiguous with several exponents")
        return (k,)

    def unit(self, index: int, k: int = 1) -> tuple[int, ...]:
        w = [0] * len(self.exps)
        w[index] = k
        return tuple(w)

    def __eq__(self, other):
        return isinstance(other, Background) and (self is other or self.exps == other.exps)

    def __hash__(self):
        return hash(self.exps)

    def __repr__(self):
        inner = ", ".join(repr(e) for e in self.exps)
        return f"Background({inner})"


FLAT = Background()


def _coerce_scalar(c):
    if isinstance(c, Poly):
        raise TypeError
    return gaussian(c)


def _wadd(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


class WeightedJet:
    """Immutable sum of e^{k . f} sqrt(2)^r p_{k,r} over a fixed background."""

    __slots__ = ("bg", "_parts")

    def __init__(self, bg: Background, parts: dict | None = None):
        self.bg = bg
        self._parts = {}
        for (k, r), p in (parts or {}).items():
            if not p.is_zero():
                self._parts[(bg.weight(k), r)] = p

    @classmethod
    def _raw(cls, bg: Background, parts: dict) -> "WeightedJet":
        out = cls.__new__(cls)
        out.bg = bg
        out._parts = {key: p for key, p in parts.items() if not p.is_zero()}
        return out

    # ---- construction -------------------------------------------------
    @classmethod
    def lift(cls, bg: Background, p: Poly, weight=0) -> "WeightedJet":
        if weight == 0:
            weight = (0,) * bg.rank
        return cls(bg, {(weight, 0): p})

    @classmethod
    def const(cls, bg: Background, c, weight=0) -> "WeightedJet":
        return cls.lift(bg, Poly.constant(c), weight)

    @classmethod
    def zero(cls, bg: Background) -> "WeightedJet":
        return cls._raw(bg, {})

    @classmethod
    def sqrt2(cls, bg: Background) -> "WeightedJet":
        return cls._raw(bg, {((0,) * bg.rank, 1): Poly.constant(1)})

    # ---- inspection ---------------------------------------------------
    @property
    def parts(self) -> dict:
        """Parts keyed (weight, grade); weights are ints for a single exponent."""
        if self.bg.rank == 1:
            return {(k[0], r): p for (k, r), p in self._parts.items()}
        return dict(self._parts)

    def weights(self) -> set:
        if self.bg.rank == 1:
            return {k[0] for k, _ in self._parts}
        return {k for k, _ in self._parts}

    def is_zero(self) -> bool:
        return not self._parts

    def __bool__(self):
        return bool(self._parts)

    def max_degree(self) -> int:
        return max((p.degree() for p in self._parts.values()), default=-1)

    def is_real(self) -> bool:
        return self == self.conj()

    def part(self, weight=0, grade: int = 0) -> Poly:
        return self._parts.get((self.bg.weight(weight), grade), Poly())

    def _check(self, other: "WeightedJet"):
        if other.bg is not self.bg and other.bg != self.bg:
            raise BackgroundMismatch("jets built over different conformal exponents")

    def _wrap(self, other) -> "WeightedJet":
        if isinstance(other, WeightedJet):
            self._check(other)
            return other
        if isinstance(other, Poly):
            return WeightedJet.lift(self.bg, other)
        re, im = _coerce_scalar(other)
        return WeightedJet.lift(self.bg, Poly({0: (re, im)}) if (re or im) else Poly())

    def __eq__(self, other):
        try:
            other = self._wrap(other)
        except (TypeError, BackgroundMismatch):
            return NotImplemented
        return self._parts == other._parts

    __hash__ = None  # type: ignore[assignment]

    # ---- arithmetic ---------------------------------------------------
    def __add__(self, other):
        try:
            other = self._wrap(other)
        except TypeError:
            return NotImplemented
        out = dict(self._parts)
        for key, p in other._parts.items():
            out[key] = out[key] + p if key in out else p
        return WeightedJet._raw(self.bg, out)

    __radd__ = __add__

    def __neg__(self):
        return WeightedJet._raw(self.bg, {k: -p for k, p in self._parts.items()})

    def __sub__(self, other):
        try:
            other = self._wrap(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "WeightedJet":
        re, im = gaussian(c)
        return WeightedJet._raw(self.bg, {k: p.scale(re, im) for k, p in self._parts.items()})

    def __mul__(self, other):
        if isinstance(other, WeightedJet):
            self._check(other)
            out: dict = {}
            for (k1, r1), p1 in self._parts.items():
                for (k2, r2), p2 in other._parts.items():
                    prod = p1 * p2
                    r = r1 + r2
                    if r == 2:
                        r = 0
                        prod = prod.scale(_TWO)
                    key = (_wadd(k1, k2), r)
                    out[key] = out[key] + prod if key in out else prod
            return WeightedJet._raw(self.bg, out)
        if isinstance(other, Poly):
            return WeightedJet._raw(self.bg, {k: p * other for k, p in self._parts.items()})
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomial; use with_weight")
        out = WeightedJet.const(self.bg, 1)
        for _ in range(n):
            out = out * self
        return out

    def conj(self) -> "WeightedJet":
        return WeightedJet._raw(self.bg, {k: p.conj() for k, p in self._parts.items()})

    def real_part(self) -> "WeightedJet":
        return (self + self.conj()).scale(_HALF)

    def imag_part(self) -> "WeightedJet":
        return (self - self.conj()).scale((0, -_HALF))

    def with_weight(self, dk) -> "WeightedJet":
        """Multiply by e^{dk f} (or e^{dk . f} for a tuple ``dk``)."""
        dk = self.bg.weight(dk)
        return WeightedJet._raw(self.bg, {(_wadd(k, dk), r): p for (k, r), p in self._parts.items()})

    def times_sqrt2(self) -> "WeightedJet":
        out = {}
        for (k, r), p in self._parts.items():
            out[(k, 1 - r)] = p.scale(_TWO) if r else p
        return WeightedJet._raw(self.bg, out)

    def over_sqrt2(self) -> "WeightedJet":
        out = {}
        for (k, r), p in self._parts.items():
            out[(k, 1 - r)] = p if r else p.scale(_HALF)
        return WeightedJet._raw(self.bg, out)

    # ---- flat-frame derivatives ----------------------------------------
    def _holo(self, sign: int) -> "WeightedJet":
        bg = self.bg
        dfs = bg.Df if sign > 0 else bg.Dbf
        out: dict = {}
        for (k, r), p in self._parts.items():
            dp = p.d_holo() if sign > 0 else p.d_antiholo()
            for ki, df in zip(k, dfs):
                if ki:
                    dp = dp + (df * p).scale(mpq(ki))
            # multiply by 1/sqrt(2)
            if r:
                key = (k, 0)
            else:
                key = (k, 1)
                dp = dp.scale(_HALF)
            out[key] = out[key] + dp if key in out else dp
        return WeightedJet._raw(bg, out)

    def z1(self) -> "WeightedJet":
        """Z_1 = (d/dz + i zbar d/dt)/sqrt(2) applied to the jet."""
        return self._holo(1)

    def z1bar(self) -> "WeightedJet":
        """Z_1bar = (d/dzbar - i z d/dt)/sqrt(2) applied to the jet."""
        return self._holo(-1)

    def t_deriv(self) -> "WeightedJet":
        out: dict = {}
        for (k, r), p in self._parts.items():
            dp = p.diff_t()
            for ki, ft in zip(k, self.bg.ft):
                if ki:
                    dp = dp + (ft * p).scale(mpq(ki))
            out[(k, r)] = dp
        return WeightedJet._raw(self.bg, out)

    # ---- evaluation ---------------------------------------------------
    def evaluate(self, x, y, t, *, ctx=None):
        """Numerical value at (x, y, t); floats by default, or in ``ctx`` arithmetic."""
        if ctx is None:
            import math

            x, y, t = float(x), float(y), float(t)
            fvals = [e.evaluate(x, y, t).real for e in self.bg.exps]
            total = 0j
            for (k, r), p in self._parts.items():
                expo = sum(ki * fv for ki, fv in zip(k, fvals))
                total += math.exp(expo) * math.sqrt(2) ** r * p.evaluate(x, y, t)
            return complex(total)
        x, y, t = ctx.mpf(x), ctx.mpf(y), ctx.mpf(t)
        fvals = [ctx.re(e.evaluate(x, y, t, ctx=ctx)) if not e.is_zero() else ctx.mpf(0) for e in self.bg.exps]
        total = ctx.mpc(0)
        for (k, r), p in self._parts.items():
            expo = sum((ki * fv for ki, fv in zip(k, fvals)), ctx.mpf(0))
            total += ctx.exp(expo) * ctx.sqrt(2) ** r * p.evaluate(x, y, t, ctx=ctx)
        return total

    def __repr__(self):
        if not self._parts:
            return "WeightedJet(0)"

        def wlabel(k):
            return str(k[0]) if len(k) == 1 else str(k)

        body = " + ".join(
            f"e^({wlabel(k)}f)*{'sqrt2*' if r else ''}[{p!r}]" for (k, r), p in sorted(self._parts.items())
        )
        return f"WeightedJet({body})"
