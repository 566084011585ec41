"""Real algebraic numbers, extended reals and simple number fields.

A :class:`RealAlgebraic` is an irreducible monic minimal polynomial over Q
plus an isolating interval.  Either the interval is a single rational point
(then the number is that rational) or it is an open interval ``(lo, hi)`` whose
endpoints are not roots and which contains exactly one root.
"""

from __future__ import annotations

import functools
import math
from typing import Sequence

import mpmath
from gmpy2 import mpq

from . import univariate as up

REFINE_CAP = 60


def irreducible_factors(p: Sequence) -> list[up.UPoly]:
    """Distinct monic irreducible factors of a nonzero polynomial over Q."""
    from sympy import Poly, symbols

    ints = up.primitive_int(p)
    if len(ints) <= 1:
        return []
    x = symbols("x")
    _, facs = Poly(list(reversed(ints)), x).factor_list()
    out = []
    for f, _mult in facs:
        coeffs = [mpq(int(c)) for c in reversed(f.all_coeffs())]
        out.append(up.monic(coeffs))
    out.sort(key=lambda f: (len(f), [float(c) for c in f]))
    return out


class RealAlgebraic:
    __slots__ = ("minpoly", "lo", "hi", "_seq")

    def __init__(self, minpoly: Sequence, lo, hi):
        self.minpoly = up.monic(minpoly)
        self.lo, self.hi = mpq(lo), mpq(hi)
        self._seq = None
        if len(self.minpoly) == 2:
            r = -self.minpoly[0]
            self.lo = self.hi = r
        else:
            self._fix_endpoints()

    # -- constructors --------------------------------------------------------
    @classmethod
    def rational(cls, value) -> "RealAlgebraic":
        value = up.as_rational(value)
        return cls([-value, mpq(1)], value, value)

    @classmethod
    def roots_of(cls, p: Sequence) -> list["RealAlgebraic"]:
        """All distinct real roots of ``p``, sorted increasingly."""
        out = []
        for f in irreducible_factors(p):
            for lo, hi in up.isolate_real_roots(f, width=mpq(1, 2**20)):
                out.append(cls(f, lo, hi))
        out.sort(key=lambda a: a.lo)
        return out

    # -- queries ---------------------------------------------------------------
    def _sturm(self):
        if self._seq is None:
            self._seq = up.sturm_sequence(self.minpoly)
        return self._seq

    def _fix_endpoints(self):
        p = self.minpoly
        if self.lo == self.hi:
            return
        while not up.evaluate(p, self.lo) or not up.evaluate(p, self.hi):
            mid = (self.lo + self.hi) / 2
            if not up.evaluate(p, mid):
                raise ValueError("irreducible polynomial of degree > 1 has a rational root")
            if up.count_roots(self._sturm(), mid, self.hi):
                self.lo = mid
            else:
                self.hi = mid

    @property
    def is_rational(self) -> bool:
        return self.lo == self.hi

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1

    def refine(self, steps: int = 1) -> None:
        p = self.minpoly
        for _ in range(steps):
            if self.lo == self.hi:
                return
            mid = (self.lo + self.hi) / 2
            v = up.evaluate(p, mid)
            if (v > 0) == (up.evaluate(p, self.hi) > 0):
                self.hi = mid
            else:
                self.lo = mid

    def refine_to(self, width) -> None:
        while self.hi - self.lo > width:
            self.refine(8)

    def sign(self) -> int:
        if self.is_rational:
            return (self.lo > 0) - (self.lo < 0)
        # zero would be rational, so the interval can always be pulled off zero
        while self.lo < 0 < self.hi:
            self.refine()
        return 1 if self.lo >= 0 else -1

    def __float__(self) -> float:
        if self.is_rational:
            return float(self.lo)
        self.refine_to(mpq(1, 2**60) * max(1, abs(self.hi)))
        return float((self.lo + self.hi) / 2)

    def to_mpf(self, dps: int = 50):
        if self.is_rational:
            return mpmath.mpf(self.lo.numerator) / self.lo.denominator
        bits = int(dps * 3.33) + 10
        self.refine_to(mpq(1, 2**bits) * max(1, abs(self.hi)))
        mid = (self.lo + self.hi) / 2
        return mpmath.mpf(mid.numerator) / mid.denominator

    def __neg__(self) -> "RealAlgebraic":
        p = [c if k % 2 == 0 else -c for k, c in enumerate(self.minpoly)]
        if len(p) % 2 == 0:
            p = [-c for c in p]
        return RealAlgebraic(p, -self.hi, -self.lo)

    # -- comparisons -----------------------------------------------------------
    def compare(self, other: "RealAlgebraic") -> int:
        if self.is_rational and other.is_rational:
            return (self.lo > other.lo) - (self.lo < other.lo)
        if self.minpoly == other.minpoly:
            lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
            if lo < hi and up.count_roots(self._sturm(), lo, hi):
                return 0
        for _ in range(REFINE_CAP * 8):
            if _left_of(self, other):
                return -1
            if _left_of(other, self):
                return 1
            self.refine(1)
            other.refine(1)
        raise ArithmeticError("comparison of algebraic numbers did not separate")

    def __eq__(self, other) -> bool:
        if not isinstance(other, RealAlgebraic):
            return NotImplemented
        return self.compare(other) == 0

    def __lt__(self, other: "RealAlgebraic") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "RealAlgebraic") -> bool:
        return self.compare(other) <= 0

    __hash__ = None

    def describe(self) -> str:
        if self.is_rational:
            return up_rational_str(self.lo)
        return f"root of {poly_str(self.minpoly, 'a')} near {float(self):.12g}"

    def to_json(self) -> dict:
        if self.is_rational:
            return {"exact": up_rational_str(self.lo), "approx": float(self.lo)}
        # canonical interval, independent of how far this value was refined
        lo, hi = self.canonical_interval()
        return {
            "minpoly": [int(c) for c in up.primitive_int(self.minpoly)],
            "interval": [up_rational_str(lo), up_rational_str(hi)],
            "approx": float(self),
        }

    def canonical_interval(self, width=mpq(1, 10**12)):
        for lo, hi in up.isolate_real_roots(self.minpoly, width):
            if not (hi < self.lo or self.hi < lo):
                probe = RealAlgebraic(self.minpoly, lo, hi) if lo != hi else None
                if probe is None or probe.compare(self) == 0:
                    return lo, hi
        raise ArithmeticError("root not found among isolating intervals")

    def __repr__(self) -> str:
        return f"RealAlgebraic({self.describe()})"


def poly_str(p: Sequence, name: str = "x") -> str:
    """Readable form of a dense polynomial, highest degree first."""
    parts = []
    for k in range(len(p) - 1, -1, -1):
        c = mpq(p[k])
        if not c:
            continue
        mag = abs(c)
        mono = "" if k == 0 else (name if k == 1 else f"{name}^{k}")
        body = up_rational_str(mag) if (mag != 1 or not mono) else ""
        body = body + ("*" if body and mono else "") + mono
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts) or "0"


def _left_of(a: RealAlgebraic, b: RealAlgebraic) -> bool:
    # irrational intervals are open, so touching endpoints already separate
    if a.hi < b.lo:
        return True
    return a.hi == b.lo and not (a.is_rational and b.is_rational)


def up_rational_str(c) -> str:
    c = mpq(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@functools.total_ordering
class ExtendedReal:
    """An element of R ∪ {−∞, +∞} with exact finite part."""

    __slots__ = ("kind", "value")

    def __init__(self, kind: int, value: RealAlgebraic | None = None):
        self.kind = kind
        self.value = value
        if kind == 0 and value is None:
            raise ValueError("finite extended real needs a value")

    @classmethod
    def finite(cls, value) -> "ExtendedReal":
        if not isinstance(value, RealAlgebraic):
            value = RealAlgebraic.rational(value)
        return cls(0, value)

    @classmethod
    def pos_inf(cls) -> "ExtendedReal":
        return cls(1)

    @classmethod
    def neg_inf(cls) -> "ExtendedReal":
        return cls(-1)

    @property
    def is_finite(self) -> bool:
        return self.kind == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        if self.kind or other.kind:
            return self.kind == other.kind
        return self.value == other.value

    def __lt__(self, other: "ExtendedReal") -> bool:
        if self.kind != other.kind:
            return self.kind < other.kind
        if self.kind:
            return False
        return self.value < other.value

    __hash__ = None

    def __float__(self) -> float:
        if self.kind:
            return math.inf * self.kind
        return float(self.value)

    def describe(self) -> str:
        if self.kind:
            return "+inf" if self.kind > 0 else "-inf"
        return self.value.describe()

    def to_json(self) -> dict:
        if self.kind:
            return {"infinite": "+inf" if self.kind > 0 else "-inf"}
        return self.value.to_json()

    def __repr__(self) -> str:
        return f"ExtendedReal({self.describe()})"


def ext_min(values) -> ExtendedReal:
    """Minimum of extended reals; +∞ for an empty collection."""
    best = ExtendedReal.pos_inf()
    for v in values:
        if v < best:
            best = v
    return best


class NumberField:
    """Q(c) for a real root c of an irreducible polynomial; elements are residues."""

    def __init__(self, generator: RealAlgebraic | None = None):
        self.generator = generator
        self.modulus = generator.minpoly if generator is not None else [mpq(0), mpq(1)]

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    def reduce(self, coeffs: Sequence) -> up.UPoly:
        coeffs = up.trim(coeffs)
        if len(coeffs) < len(self.modulus):
            return coeffs
        return up.divmod_poly(coeffs, self.modulus)[1]

    def elem(self, value) -> "FieldElem":
        if isinstance(value, FieldElem):
            return value
        return FieldElem(self, [up.as_rational(value)])

    def gen(self) -> "FieldElem":
        return FieldElem(self, [mpq(0), mpq(1)])

    def __eq__(self, other) -> bool:
        return isinstance(other, NumberField) and self.modulus == other.modulus

    __hash__ = None


class FieldElem:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: Sequence):
        self.field = field
        self.coeffs = field.reduce(coeffs)

    def _lift(self, other) -> "FieldElem":
        return other if isinstance(other, FieldElem) else self.field.elem(other)

    def __add__(self, other) -> "FieldElem":
        return FieldElem(self.field, up.add(self.coeffs, self._lift(other).coeffs))

    __radd__ = __add__

    def __neg__(self) -> "FieldElem":
        return FieldElem(self.field, [-c for c in self.coeffs])

    def __sub__(self, other) -> "FieldElem":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "FieldElem":
        return self._lift(other) - self

    def __mul__(self, other) -> "FieldElem":
        return FieldElem(self.field, up.mul(self.coeffs, self._lift(other).coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "FieldElem":
        out = self.field.elem(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a number field")
        # extended Euclid on (coeffs, modulus)
        r0, r1 = self.field.modulus, self.coeffs
        s0, s1 = [], [mpq(1)]
        while len(r1) > 1:
            q, r = up.divmod_poly(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, up.add(s0, up.scale(up.mul(q, s1), -1))
        return FieldElem(self.field, up.scale(s1, 1 / r1[0]))

    def __truediv__(self, other) -> "FieldElem":
        return self * self._lift(other).inverse()

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_rational(self) -> bool:
        return len(self.coeffs) <= 1

    def rational_value(self) -> mpq:
        return self.coeffs[0] if self.coeffs else mpq(0)

    def to_mpf(self, dps: int = 50):
        if not self.coeffs:
            return mpmath.mpf(0)
        if len(self.coeffs) == 1:
            c = self.coeffs[0]
            return mpmath.mpf(c.numerator) / c.denominator
        g = self.field.generator.to_mpf(dps)
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * g + mpmath.mpf(c.numerator) / c.denominator
        return acc

    def to_real_algebraic(self) -> RealAlgebraic:
        """Exact real algebraic value via the characteristic polynomial."""
        if self.is_rational():
            return RealAlgebraic.rational(self.rational_value())
        char = self.charpoly()
        target = self.to_mpf(60)
        best = None
        for root in RealAlgebraic.roots_of(char):
            err = abs(root.to_mpf(60) - target)
            if best is None or err < best[0]:
                best = (err, root)
        return best[1]

    def charpoly(self) -> up.UPoly:
        """Characteristic polynomial of multiplication by this element."""
        import sympy

        d = self.field.degree
        rows = []
        basis_elem = FieldElem(self.field, [mpq(1)])
        gen = self.field.gen()
        for _ in range(d):
            prod = (self * basis_elem).coeffs
            rows.append([sympy.Rational(int(c.numerator), int(c.denominator)) for c in prod] + [0] * (d - len(prod)))
            basis_elem = basis_elem * gen
        mat = sympy.Matrix(rows).T
        lam = sympy.Symbol("lam")
        poly = sympy.Poly(mat.charpoly(lam).as_expr(), lam)
        return up.trim([mpq(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())])

    def __eq__(self, other) -> bool:
        other = self._lift(other)
        return self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self) -> str:
        return f"FieldElem({[up_rational_str(c) for c in self.coeffs]})"
