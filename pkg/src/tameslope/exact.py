"""Numeric helpers shared by the exact and floating code paths.

Values flowing through the library are ``int``, ``Fraction``, ``float`` or
:class:`AlgebraicValue` (an element of a real number field, used for Perron
data that is irrational, e.g. the golden ratio).  Everything downstream is
written against the arithmetic operators only, so the same code runs in
either mode.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import mpmath
import sympy as sp


class AlgebraicValue:
    """Exact element of ``QQ(theta)`` for a real algebraic ``theta``.

    Thin wrapper over sympy's ``ANP`` that adds mixed arithmetic with
    ``int``/``Fraction``, exact equality and an exact sign test.
    """

    __slots__ = ("field", "rep")

    def __init__(self, field, rep):
        self.field = field
        self.rep = rep

    def _coerce(self, other):
        if isinstance(other, AlgebraicValue):
            if other.field != self.field:
                raise TypeError("values live in different number fields")
            return other.rep
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            return self.field.from_sympy(sp.Rational(q.numerator, q.denominator))
        return NotImplemented

    def _wrap(self, rep):
        return AlgebraicValue(self.field, rep)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.rep + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.rep - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.rep)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.rep * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(self.field.quo(self.rep, o))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._wrap(self.field.quo(o, self.rep))

    def __neg__(self):
        return self._wrap(-self.rep)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self ** (-k))
        out = self._wrap(self.field.one)
        for _ in range(k):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.rep

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            if isinstance(other, float):
                return float(self) == other
            return NotImplemented
        return self.rep == o

    def __hash__(self):
        return hash((str(self.field), tuple(self.rep.to_list())))

    def sympy(self):
        return self.field.to_sympy(self.rep)

    def _approx(self, dps: int = 50):
        g = _generator_value(self.field, dps)
        with mpmath.workdps(dps):
            acc = mpmath.mpf(0)
            for c in self.rep.to_list():  # highest degree first
                acc = acc * g + mpmath.mpf(int(c.numerator)) / int(c.denominator)
            return acc

    def sign(self) -> int:
        if self.is_zero():
            return 0
        # nonzero, so enough digits always resolve the sign
        for dps in (50, 200, 1000):
            x = self._approx(dps)
            if abs(x) > mpmath.mpf(10) ** (10 - dps):
                return 1 if x > 0 else -1
        return 1 if sp.N(self.sympy(), 2000) > 0 else -1

    def __lt__(self, other):
        return (self - other).sign() < 0 if not isinstance(other, float) else float(self) < other

    def __le__(self, other):
        return (self - other).sign() <= 0 if not isinstance(other, float) else float(self) <= other

    def __gt__(self, other):
        return (self - other).sign() > 0 if not isinstance(other, float) else float(self) > other

    def __ge__(self, other):
        return (self - other).sign() >= 0 if not isinstance(other, float) else float(self) >= other

    def __float__(self):
        return float(self._approx(30))

    def __repr__(self):
        return f"AlgebraicValue({self})"

    def __str__(self):
        expr = self.sympy().replace(lambda e: isinstance(e, sp.CRootOf), _as_radical)
        return str(sp.radsimp(sp.expand(expr)))


_GEN_CACHE: dict = {}


def _generator_value(field, dps: int):
    key = (id(field), dps)
    if key not in _GEN_CACHE:
        with mpmath.workdps(dps):
            _GEN_CACHE[key] = (field, mpmath.mpf(sp.N(field.ext.as_expr(), dps + 10)))
    return _GEN_CACHE[key][1]


def _as_radical(root):
    """Radical form of a ``CRootOf`` when sympy can solve its polynomial."""
    if root.poly.degree() > 2:
        return root
    x = root.poly.gen
    target = complex(sp.N(root, 30))
    cands = list(sp.roots(root.poly.as_expr(), x))
    if len(cands) != root.poly.degree():
        return root
    return min(cands, key=lambda c: abs(complex(sp.N(c, 30)) - target))


def is_exact(x) -> bool:
    return isinstance(x, (int, Rational, AlgebraicValue))


def to_float(x) -> float:
    return float(x)


def parse_number(text, exact: bool = False):
    """Parse ``"3"``, ``"3/2"``, ``"0.25"`` or a number; Fraction when ``exact``."""
    if isinstance(text, (int, Fraction, AlgebraicValue)):
        return Fraction(text) if exact and not isinstance(text, AlgebraicValue) else text
    if isinstance(text, float):
        return Fraction(text).limit_denominator(10**12) if exact else text
    s = str(text).strip()
    if exact:
        return Fraction(s)
    if "/" in s:
        return float(Fraction(s))
    return float(s)


def close(a, b, tol: float = 1e-12) -> bool:
    """Exact equality for exact operands, relative closeness otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    fa, fb = float(a), float(b)
    return abs(fa - fb) <= tol * max(1.0, abs(fa), abs(fb))


def sign(x, tol: float = 0.0) -> int:
    if isinstance(x, AlgebraicValue):
        return x.sign()
    if is_exact(x):
        return (x > 0) - (x < 0)
    if abs(x) <= tol:
        return 0
    return 1 if x > 0 else -1


def fmt(x) -> str:
    """Render a value for CSV/tree output: ``num/den`` for rationals."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, AlgebraicValue):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return repr(x)
    return str(x)


def algebraic_field(poly: sp.Poly, approx: float):
    """Return ``(field, theta)`` for the real root of ``poly`` nearest ``approx``.

    ``poly`` must be irreducible over QQ.  For linear ``poly`` the root is
    rational and ``(None, Fraction)`` is returned.
    """
    if poly.degree() == 1:
        a, b = poly.all_coeffs()
        r = sp.Rational(-b, a)
        return None, Fraction(int(r.p), int(r.q))
    roots = [sp.CRootOf(poly.as_expr(), k) for k in range(poly.degree())]
    real = [r for r in roots if r.is_real]
    best = min(real, key=lambda r: abs(float(r) - approx))
    field = sp.QQ.algebraic_field(best)
    return field, AlgebraicValue(field, field.from_sympy(best))
