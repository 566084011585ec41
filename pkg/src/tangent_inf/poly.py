"""Sparse multivariate polynomials with exact rational coefficients.

Coefficients are ``gmpy2.mpq`` values, monomials are tuples of non-negative
integers with one slot per variable.  Every public operation returns a new,
normalized polynomial (no stored zero coefficients).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from gmpy2 import mpq

MAX_EXPONENT = 2**63 - 1

Monomial = tuple


def to_rational(value) -> mpq:
    """Coerce int, Fraction, mpq or a ``"p/q"`` string into an mpq."""
    if isinstance(value, str):
        value = Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floating-point coefficients are not allowed in exact polynomials")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def rational_str(c) -> str:
    c = mpq(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables over Q."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Monomial, object] | None = None, _normalized=False):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        self.nvars = nvars
        self._hash = None
        if _normalized:
            self.terms = terms
            return
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != nvars:
                raise ValueError(f"monomial {mono} does not have {nvars} slots")
            for e in mono:
                if e < 0:
                    raise ValueError("negative exponent")
                if e > MAX_EXPONENT:
                    raise OverflowError("exponent exceeds machine word")
            c = to_rational(c)
            if c:
                clean[mono] = clean.get(mono, mpq(0)) + c
                if not clean[mono]:
                    del clean[mono]
        self.terms = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(nvars, {}, _normalized=True)

    @classmethod
    def constant(cls, nvars: int, c) -> "MultiPoly":
        c = to_rational(c)
        if not c:
            return cls.zero(nvars)
        return cls(nvars, {(0,) * nvars: c}, _normalized=True)

    @classmethod
    def variable(cls, nvars: int, i: int) -> "MultiPoly":
        mono = [0] * nvars
        mono[i] = 1
        return cls(nvars, {tuple(mono): mpq(1)}, _normalized=True)

    @classmethod
    def monomial(cls, mono: Sequence[int], c=1) -> "MultiPoly":
        return cls(len(mono), {tuple(mono): c})

    # -- basic queries ------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> mpq:
        return self.terms.get((0,) * self.nvars, mpq(0))

    def degree(self) -> float | int:
        """Total degree; ``-inf`` for the zero polynomial."""
        if not self.terms:
            return -math.inf
        return max(sum(m) for m in self.terms)

    def degree_in(self, i: int) -> float | int:
        if not self.terms:
            return -math.inf
        return max(m[i] for m in self.terms)

    def variables_used(self) -> set[int]:
        used = set()
        for m in self.terms:
            used.update(i for i, e in enumerate(m) if e)
        return used

    def involves(self, i: int) -> bool:
        return any(m[i] for m in self.terms)

    def coeff(self, mono: Sequence[int]) -> mpq:
        return self.terms.get(tuple(mono), mpq(0))

    def __len__(self) -> int:
        return len(self.terms)

    # -- arithmetic ---------------------------------------------------
    def _check(self, other: "MultiPoly"):
        if other.nvars != self.nvars:
            raise ValueError(f"mismatched variable counts: {self.nvars} vs {other.nvars}")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.constant(self.nvars, other)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return MultiPoly(self.nvars, out, _normalized=True)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {m: -c for m, c in self.terms.items()}, _normalized=True)

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def scale(self, c) -> "MultiPoly":
        c = to_rational(c)
        if not c:
            return MultiPoly.zero(self.nvars)
        return MultiPoly(self.nvars, {m: v * c for m, v in self.terms.items()}, _normalized=True)

    def mul_term(self, mono: Monomial, c) -> "MultiPoly":
        if not c:
            return MultiPoly.zero(self.nvars)
        return MultiPoly(
            self.nvars,
            {tuple(a + b for a, b in zip(m, mono)): v * c for m, v in self.terms.items()},
            _normalized=True,
        )

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        if len(self.terms) < len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out: dict = {}
        get = out.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                s = get(m)
                out[m] = c1 * c2 if s is None else s + c1 * c2
        return MultiPoly(self.nvars, {m: c for m, c in out.items() if c}, _normalized=True)

    def __rmul__(self, other) -> "MultiPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "MultiPoly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        if k > MAX_EXPONENT:
            raise OverflowError("exponent exceeds machine word")
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)) or type(other) is type(mpq(0)):
            return self.is_constant() and self.constant_term() == to_rational(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- calculus and evaluation ---------------------------------------
    def diff(self, i: int) -> "MultiPoly":
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = list(m)
                mm[i] = e - 1
                out[tuple(mm)] = c * e
        return MultiPoly(self.nvars, out, _normalized=True)

    def eval_exact(self, point: Sequence) -> mpq:
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, polynomial has {self.nvars} variables")
        pt = [to_rational(v) for v in point]
        powers: list[dict[int, mpq]] = [{0: mpq(1)} for _ in pt]

        def power(i, e):
            cache = powers[i]
            if e not in cache:
                cache[e] = pt[i] ** e
            return cache[e]

        total = mpq(0)
        for m, c in self.terms.items():
            term = c
            for i, e in enumerate(m):
                if e:
                    term *= power(i, e)
            total += term
        return total

    def eval_float(self, point: Sequence[float]) -> float:
        exps, coeffs = self.to_arrays()
        if not len(coeffs):
            return 0.0
        x = np.asarray(point, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = coeffs * np.prod(x[None, :] ** exps, axis=1)
            return float(np.sum(vals))

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        monos = sorted(self.terms)
        exps = np.array(monos, dtype=float).reshape(len(monos), self.nvars)
        coeffs = np.array([float(self.terms[m]) for m in monos], dtype=float)
        return exps, coeffs

    # -- variable manipulation -----------------------------------------
    def subs(self, i: int, value: "MultiPoly | int | Fraction") -> "MultiPoly":
        """Substitute variable ``i`` by a polynomial (same ``nvars``) or a constant."""
        if not isinstance(value, MultiPoly):
            value = MultiPoly.constant(self.nvars, value)
        self._check(value)
        by_power: dict[int, dict] = {}
        for m, c in self.terms.items():
            e = m[i]
            mm = list(m)
            mm[i] = 0
            by_power.setdefault(e, {})[tuple(mm)] = c
        result = MultiPoly.zero(self.nvars)
        pow_cache = {0: MultiPoly.constant(self.nvars, 1), 1: value}
        for e in sorted(by_power):
            if e not in pow_cache:
                pow_cache[e] = value**e
            result = result + MultiPoly(self.nvars, by_power[e], _normalized=True) * pow_cache[e]
        return result

    def remap(self, nvars: int, index_map: Sequence[int]) -> "MultiPoly":
        """Move variable ``j`` to slot ``index_map[j]`` of an ``nvars``-variable ring."""
        out = {}
        for m, c in self.terms.items():
            mm = [0] * nvars
            for j, e in enumerate(m):
                if e:
                    mm[index_map[j]] += e
            mm = tuple(mm)
            out[mm] = out.get(mm, mpq(0)) + c
        return MultiPoly(nvars, {m: c for m, c in out.items() if c}, _normalized=True)

    def map_coeffs(self, fn) -> "MultiPoly":
        return MultiPoly(self.nvars, {m: fn(c) for m, c in self.terms.items()})

    # -- normalization --------------------------------------------------
    def primitive(self) -> "MultiPoly":
        """Scale to coprime integer coefficients with a positive leading coefficient (grlex)."""
        if not self.terms:
            return self
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, int(c.denominator))
        ints = {m: int(c * den) for m, c in self.terms.items()}
        g = 0
        for v in ints.values():
            g = math.gcd(g, v)
        lead = max(ints, key=grlex_key)
        sign = -1 if ints[lead] < 0 else 1
        return MultiPoly(self.nvars, {m: mpq(sign * v // g) for m, v in ints.items()}, _normalized=True)

    def monic(self, order_key=None) -> "MultiPoly":
        if not self.terms:
            return self
        lead = max(self.terms, key=order_key or grlex_key)
        return self.scale(1 / self.terms[lead])

    # -- printing --------------------------------------------------------
    def to_str(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names is not None else [f"x{i}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for k, m in enumerate(sorted(self.terms, key=grlex_key, reverse=True)):
            c = self.terms[m]
            factors = []
            for name, e in zip(names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if factors and mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([rational_str(mag)] + factors)
            if k == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"MultiPoly({self.to_str()})"


def grlex_key(m: Monomial):
    return (sum(m), m)


def gradient(p: MultiPoly) -> list[MultiPoly]:
    return [p.diff(i) for i in range(p.nvars)]


def eval_exact(p: MultiPoly, point: Sequence) -> mpq:
    return p.eval_exact(point)


def eval_float(p: MultiPoly, point: Sequence[float]) -> float:
    return p.eval_float(point)


def poly_sum(polys: Iterable[MultiPoly], nvars: int) -> MultiPoly:
    total = MultiPoly.zero(nvars)
    for p in polys:
        total = total + p
    return total


# ---------------------------------------------------------------------------
# Parsing

class PolyParseError(ValueError):
    """Syntax or name error in a polynomial expression."""

    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.column = line, col
        super().__init__(f"{message} (line {line}, column {col})")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))", re.S)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.index = {name: i for i, name in enumerate(names)}
        self.nvars = len(names)
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise PolyParseError(msg, self.text, tok[2])

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected '{op}'", tok)

    def parse(self) -> MultiPoly:
        result = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token '{self.peek()[1]}'")
        return result

    def expr(self) -> MultiPoly:
        tok = self.peek()
        negate = False
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            negate = tok[1] == "-"
        result = self.term()
        if negate:
            result = -result
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                result = result + rhs if tok[1] == "+" else result - rhs
            else:
                return result

    def term(self) -> MultiPoly:
        result = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            result = result * self.factor()
        nxt = self.peek()
        if nxt[0] in ("name", "int") or (nxt[0] == "op" and nxt[1] == "("):
            self.error("implicit multiplication is not allowed")
        return result

    def factor(self) -> MultiPoly:
        base = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                self.error("exponent must be a non-negative integer", tok)
            e = int(tok[1])
            if e > MAX_EXPONENT:
                self.error("exponent exceeds machine word", tok)
            base = base**e
        return base

    def base(self) -> MultiPoly:
        tok = self.take()
        if tok[0] == "name":
            if tok[1] not in self.index:
                self.error(f"unknown variable '{tok[1]}'", tok)
            return MultiPoly.variable(self.nvars, self.index[tok[1]])
        if tok[0] == "int":
            num = int(tok[1])
            if self.peek()[0] == "op" and self.peek()[1] == "/":
                self.take()
                den_tok = self.take()
                if den_tok[0] != "int":
                    self.error("denominator must be an unsigned integer", den_tok)
                den = int(den_tok[1])
                if den == 0:
                    self.error("zero denominator", den_tok)
                return MultiPoly.constant(self.nvars, mpq(num, den))
            return MultiPoly.constant(self.nvars, num)
        if tok[0] == "op" and tok[1] == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok[0] == "end":
            self.error("unexpected end of expression", tok)
        self.error(f"unexpected token '{tok[1]}'", tok)


def parse_poly(text: str, names: Sequence[str]) -> MultiPoly:
    """Parse an ASCII polynomial expression over the given ordered variables.

    >>> parse_poly("x^2 + 1/2*y", ["x", "y"]).to_str(["x", "y"])
    'x^2 + 1/2*y'
    """
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable names")
    return _Parser(text, names).parse()
