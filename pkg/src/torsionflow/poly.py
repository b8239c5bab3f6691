"""Exact polynomials in (x, y, t) with Gaussian-rational coefficients.

Monomials x^a y^b t^c are packed into one integer key so that monomial
multiplication is integer addition.  Coefficients are stored as pairs
``(re, im)`` of ``gmpy2.mpq``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from gmpy2 import mpq

_SHIFT = 10
_MASK = (1 << _SHIFT) - 1
MAX_DEGREE = _MASK

_ZERO = mpq(0)
_ONE = mpq(1)


def pack(a: int, b: int, c: int) -> int:
    return a | (b << _SHIFT) | (c << (2 * _SHIFT))


def unpack(key: int) -> tuple[int, int, int]:
    return key & _MASK, (key >> _SHIFT) & _MASK, key >> (2 * _SHIFT)


_KX = pack(1, 0, 0)
_KY = pack(0, 1, 0)
_KT = pack(0, 0, 1)


def to_mpq(v) -> mpq:
    if isinstance(v, float):
        raise TypeError("floating-point coefficients are not exact; pass a Fraction")
    if isinstance(v, (int, Rational)) or type(v).__name__ == "mpq":
        return mpq(v)
    if isinstance(v, str):
        return mpq(Fraction(v))
    raise TypeError(f"cannot convert {v!r} to a rational")


def gaussian(v) -> tuple[mpq, mpq]:
    """Coerce ``v`` to an exact ``(re, im)`` pair."""
    if isinstance(v, tuple):
        re, im = v
        return to_mpq(re), to_mpq(im)
    if isinstance(v, complex):
        raise TypeError("complex floats are not exact; pass a (re, im) tuple")
    return to_mpq(v), _ZERO


class RationalComplexPolynomial:
    """Immutable polynomial in x, y, t with coefficients in Q(i).

    Only nonzero coefficients are stored, so two polynomials are equal iff
    their term maps are equal.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, tuple[mpq, mpq]] | None = None, *, _trusted=False):
        if terms is None:
            self._terms: dict[int, tuple[mpq, mpq]] = {}
        elif _trusted:
            self._terms = terms  # type: ignore[assignment]
        else:
            clean = {}
            for k, (re, im) in terms.items():
                if re or im:
                    clean[k] = (re, im)
            self._terms = clean
        self._hash = None

    # ---- construction -------------------------------------------------
    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int, int], object]) -> "RationalComplexPolynomial":
        """Build from ``{(a, b, c): coeff}`` where coeff is rational or a (re, im) pair."""
        acc: dict[int, tuple[mpq, mpq]] = {}
        for (a, b, c), v in terms.items():
            if min(a, b, c) < 0:
                raise ValueError("exponents must be non-negative")
            re, im = gaussian(v)
            k = pack(a, b, c)
            if k in acc:
                r0, i0 = acc[k]
                re, im = r0 + re, i0 + im
            acc[k] = (re, im)
        return cls(acc)

    @classmethod
    def constant(cls, v) -> "RationalComplexPolynomial":
        re, im = gaussian(v)
        return cls({0: (re, im)})

    @classmethod
    def x(cls) -> "RationalComplexPolynomial":
        return cls({_KX: (_ONE, _ZERO)}, _trusted=True)

    @classmethod
    def y(cls) -> "RationalComplexPolynomial":
        return cls({_KY: (_ONE, _ZERO)}, _trusted=True)

    @classmethod
    def t(cls) -> "RationalComplexPolynomial":
        return cls({_KT: (_ONE, _ZERO)}, _trusted=True)

    @classmethod
    def z(cls) -> "RationalComplexPolynomial":
        return cls({_KX: (_ONE, _ZERO), _KY: (_ZERO, _ONE)}, _trusted=True)

    @classmethod
    def zbar(cls) -> "RationalComplexPolynomial":
        return cls({_KX: (_ONE, _ZERO), _KY: (_ZERO, -_ONE)}, _trusted=True)

    # ---- inspection ---------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int, int], tuple[mpq, mpq]]:
        return {unpack(k): v for k, v in self._terms.items()}

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(unpack(k)) for k in self._terms)

    def is_real(self) -> bool:
        return all(not im for _, im in self._terms.values())

    def is_constant(self) -> bool:
        return all(k == 0 for k in self._terms)

    def constant_term(self) -> tuple[mpq, mpq]:
        return self._terms.get(0, (_ZERO, _ZERO))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalComplexPolynomial):
            try:
                other = RationalComplexPolynomial.constant(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # ---- arithmetic ---------------------------------------------------
    @staticmethod
    def _coerce(other) -> "RationalComplexPolynomial":
        if isinstance(other, RationalComplexPolynomial):
            return other
        return RationalComplexPolynomial.constant(other)

    def __add__(self, other):
        if not isinstance(other, RationalComplexPolynomial):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for k, (re, im) in small.items():
            old = out.get(k)
            if old is None:
                out[k] = (re, im)
            else:
                nr, ni = old[0] + re, old[1] + im
                if nr or ni:
                    out[k] = (nr, ni)
                else:
                    del out[k]
        return RationalComplexPolynomial(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return RationalComplexPolynomial({k: (-re, -im) for k, (re, im) in self._terms.items()}, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, RationalComplexPolynomial):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, re, im=_ZERO) -> "RationalComplexPolynomial":
        """Multiply by the Gaussian rational ``re + i*im``; ``re`` may also be an ``(re, im)`` pair."""
        if isinstance(re, tuple):
            if im:
                raise TypeError("pass either an (re, im) pair or two parts, not both")
            re, im = re
        re, im = to_mpq(re), to_mpq(im)
        if not re and not im:
            return RationalComplexPolynomial()
        if not im:
            return RationalComplexPolynomial({k: (a * re, b * re) for k, (a, b) in self._terms.items()}, _trusted=True)
        if not re:
            return RationalComplexPolynomial({k: (-b * im, a * im) for k, (a, b) in self._terms.items()}, _trusted=True)
        return RationalComplexPolynomial(
            {k: (a * re - b * im, a * im + b * re) for k, (a, b) in self._terms.items()}, _trusted=True
        )

    def __mul__(self, other):
        if not isinstance(other, RationalComplexPolynomial):
            try:
                re, im = gaussian(other)
            except TypeError:
                return NotImplemented
            return self.scale(re, im)
        p, q = self._terms, other._terms
        if not p or not q:
            return RationalComplexPolynomial()
        if len(p) < len(q):
            p, q = q, p
        out: dict[int, tuple[mpq, mpq]] = {}
        get = out.get
        for k2, (c, d) in q.items():
            if not d:
                for k1, (a, b) in p.items():
                    k = k1 + k2
                    old = get(k)
                    if old is None:
                        out[k] = (a * c, b * c)
                    else:
                        out[k] = (old[0] + a * c, old[1] + b * c)
            elif not c:
                for k1, (a, b) in p.items():
                    k = k1 + k2
                    old = get(k)
                    if old is None:
                        out[k] = (-b * d, a * d)
                    else:
                        out[k] = (old[0] - b * d, old[1] + a * d)
            else:
                for k1, (a, b) in p.items():
                    k = k1 + k2
                    old = get(k)
                    if old is None:
                        out[k] = (a * c - b * d, a * d + b * c)
                    else:
                        out[k] = (old[0] + a * c - b * d, old[1] + a * d + b * c)
        return RationalComplexPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = RationalComplexPolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conj(self) -> "RationalComplexPolynomial":
        return RationalComplexPolynomial({k: (re, -im) for k, (re, im) in self._terms.items()}, _trusted=True)

    def real_part(self) -> "RationalComplexPolynomial":
        return RationalComplexPolynomial({k: (re, _ZERO) for k, (re, _) in self._terms.items()})

    def imag_part(self) -> "RationalComplexPolynomial":
        return RationalComplexPolynomial({k: (im, _ZERO) for k, (_, im) in self._terms.items()})

    # ---- calculus -----------------------------------------------------
    def _diff(self, shift: int, var: int) -> "RationalComplexPolynomial":
        out = {}
        for k, (re, im) in self._terms.items():
            e = (k >> shift) & _MASK
            if e:
                out[k - var] = (re * e, im * e)
        return RationalComplexPolynomial(out, _trusted=True)

    def diff_x(self):
        return self._diff(0, _KX)

    def diff_y(self):
        return self._diff(_SHIFT, _KY)

    def diff_t(self):
        return self._diff(2 * _SHIFT, _KT)

    def d_holo(self) -> "RationalComplexPolynomial":
        """(d/dz + i*zbar*d/dt) p, i.e. sqrt(2) times the flat Z_1 derivative."""
        return self._frame_diff(sign=1)

    def d_antiholo(self) -> "RationalComplexPolynomial":
        """(d/dzbar - i*z*d/dt) p, i.e. sqrt(2) times the flat Z_1bar derivative."""
        return self._frame_diff(sign=-1)

    def _frame_diff(self, sign: int) -> "RationalComplexPolynomial":
        # d/dz = (d/dx - i d/dy)/2 ; d/dzbar = (d/dx + i d/dy)/2
        # zbar = x - i y ; z = x + i y
        half = mpq(1, 2)
        s = sign
        out: dict[int, tuple[mpq, mpq]] = {}

        def acc(k, re, im):
            old = out.get(k)
            if old is None:
                out[k] = (re, im)
            else:
                out[k] = (old[0] + re, old[1] + im)

        for k, (re, im) in self._terms.items():
            a, b, c = k & _MASK, (k >> _SHIFT) & _MASK, k >> (2 * _SHIFT)
            if a:
                acc(k - _KX, re * a * half, im * a * half)
            if b:
                # (-s i/2) * b * coeff
                f = b * half * s
                acc(k - _KY, im * f, -re * f)
            if c:
                # s*i * (x - s*i*y) * c * coeff * t^(c-1)
                base = k - _KT
                # s*i*x term: coefficient s*i*c*(re + i im) = c*s*(-im + i re)
                acc(base + _KX, -im * c * s, re * c * s)
                # s*i*(-s*i*y) = y  (s^2 = 1): coefficient c*(re + i im)
                acc(base + _KY, re * c, im * c)
        return RationalComplexPolynomial(out)

    # ---- evaluation ---------------------------------------------------
    def evaluate(self, x, y, t, *, ctx=None):
        """Evaluate at a point.

        With rational arguments the result is an exact ``(re, im)`` pair; with
        float or mpmath arguments it is a complex number of that kind.
        """
        exact = all(isinstance(v, (int, Rational)) or type(v).__name__ == "mpq" for v in (x, y, t))
        if exact:
            x, y, t = mpq(x), mpq(y), mpq(t)
            sr, si = _ZERO, _ZERO
            for k, (re, im) in self._terms.items():
                a, b, c = unpack(k)
                m = x**a * y**b * t**c
                sr += re * m
                si += im * m
            return sr, si
        total = 0
        for k, (re, im) in self._terms.items():
            a, b, c = unpack(k)
            total = total + _num(re, im, ctx) * (x**a * y**b * t**c)
        return total

    # ---- display ------------------------------------------------------
    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for k in sorted(self._terms, key=lambda k: (-sum(unpack(k)), unpack(k))):
            re, im = self._terms[k]
            a, b, c = unpack(k)
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v for v, e in (("x", a), ("y", b), ("t", c)) if e
            )
            if im:
                coeff = f"({re}+{im}i)" if re else f"{im}i"
            else:
                coeff = str(re)
            parts.append(f"{coeff}*{mono}" if mono else coeff)
        return " + ".join(parts)


Poly = RationalComplexPolynomial


def _num(re: mpq, im: mpq, ctx=None):
    if ctx is None:
        return complex(float(re), float(im))
    return ctx.mpc(ctx.mpf(int(re.numerator)) / int(re.denominator), ctx.mpf(int(im.numerator)) / int(im.denominator))


def poly_from_real_coeffs(coeffs: Iterable[tuple[tuple[int, int, int], object]]) -> Poly:
    return Poly.from_terms(dict(coeffs))
