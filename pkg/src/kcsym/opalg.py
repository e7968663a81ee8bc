"""Exact arithmetic kernel.

Rationals, sparse bivariate polynomials in (rho, mu), normalized rational
functions, and the algebra of shift operators acting on functions f(rho, mu):

    (c * T^(a, b)) f(rho, mu) = c(rho, mu) * f(rho + a, mu + b)

All values are immutable; every operation returns a new object.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from functools import reduce
from math import comb, gcd, lcm
from typing import Iterable, Iterator, Mapping, NamedTuple

from . import _zpoly as Z

Rat = gmpy2.mpq
_MPQ = type(gmpy2.mpq(0))
_RAT_TYPES = (int, Fraction, type(gmpy2.mpq(0)), type(gmpy2.mpz(0)))

__all__ = [
    "Rat",
    "Poly2",
    "RatFunc",
    "Shift",
    "ShiftOp",
    "rf_normalize",
    "pochhammer",
    "op_apply",
    "op_compose",
    "op_add",
    "op_sub",
    "op_scale_left",
    "op_scale_right",
    "commutator",
    "anticommutator",
    "reflect",
    "is_scalar",
    "is_even",
    "formal_transpose",
    "RHO",
    "MU",
]


def as_rat(x) -> Rat:
    if type(x) is _MPQ:
        return x
    if isinstance(x, float):
        raise TypeError("floating-point values are not accepted by the exact kernel")
    if isinstance(x, Fraction):
        return Rat(x.numerator, x.denominator)
    if isinstance(x, str):
        return Rat(Fraction(x).numerator, Fraction(x).denominator)
    return Rat(x)


def _grlex(mono: tuple[int, int]) -> tuple[int, int]:
    return (mono[0] + mono[1], mono[0])


# ---------------------------------------------------------------------------
# Poly2


class Poly2:
    """Sparse polynomial in rho, mu with exact rational coefficients.

    ``terms`` maps (i, j) to the coefficient of rho**i * mu**j; zero
    coefficients are never stored.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None, _clean: bool = False):
        if _clean:
            self.terms = terms  # type: ignore[assignment]
        else:
            t: dict[tuple[int, int], Rat] = {}
            for k, v in (terms or {}).items():
                v = as_rat(v)
                if v:
                    i, j = k
                    if i < 0 or j < 0:
                        raise ValueError(f"negative exponent {k}")
                    t[(int(i), int(j))] = v
            self.terms = t
        self._hash = None

    # constructors
    @staticmethod
    def const(c) -> "Poly2":
        c = as_rat(c)
        return Poly2({(0, 0): c} if c else {}, _clean=True)

    @staticmethod
    def affine(c0=0, c_rho=0, c_mu=0) -> "Poly2":
        return Poly2({(0, 0): c0, (1, 0): c_rho, (0, 1): c_mu})

    # basic predicates
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0, 0) in self.terms)

    def const_value(self) -> Rat:
        return self.terms.get((0, 0), Rat(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((i + j for i, j in self.terms), default=-1)

    def deg_rho(self) -> int:
        return max((i for i, _ in self.terms), default=-1)

    def deg_mu(self) -> int:
        return max((j for _, j in self.terms), default=-1)

    def leading_monomial(self) -> tuple[int, int]:
        """Leading exponent pair under graded lex with rho > mu."""
        return max(self.terms, key=_grlex)

    def leading_coeff(self) -> Rat:
        return self.terms[self.leading_monomial()] if self.terms else Rat(0)

    # arithmetic
    def __add__(self, other) -> "Poly2":
        other = _as_poly(other)
        if not other.terms:
            return self
        t = dict(self.terms)
        for k, v in other.terms.items():
            s = t.get(k, 0) + v
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return Poly2(t, _clean=True)

    __radd__ = __add__

    def __neg__(self) -> "Poly2":
        return Poly2({k: -v for k, v in self.terms.items()}, _clean=True)

    def __sub__(self, other) -> "Poly2":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Poly2":
        return _as_poly(other) - self

    def __mul__(self, other) -> "Poly2":
        if not isinstance(other, Poly2):
            c = as_rat(other)
            if not c:
                return Poly2({}, _clean=True)
            return Poly2({k: v * c for k, v in self.terms.items()}, _clean=True)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        t: dict[tuple[int, int], Rat] = {}
        for (i2, j2), v2 in b.items():
            for (i1, j1), v1 in a.items():
                k = (i1 + i2, j1 + j2)
                t[k] = t.get(k, 0) + v1 * v2
        return Poly2({k: v for k, v in t.items() if v}, _clean=True)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly2":
        if e < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly2.const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly2):
            return self.terms == other.terms
        try:
            return self.terms == _as_poly(other).terms
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly2({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, j) in sorted(self.terms, key=_grlex, reverse=True):
            c = self.terms[(i, j)]
            mono = "*".join(
                s for s in (
                    ("rho" if i == 1 else f"rho^{i}") if i else "",
                    ("mu" if j == 1 else f"mu^{j}") if j else "",
                ) if s
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"({c})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # substitutions
    def shift(self, a, b) -> "Poly2":
        """p(rho + a, mu + b)."""
        a, b = as_rat(a), as_rat(b)
        if (not a and not b) or not self.terms:
            return self
        # expand one variable at a time
        p = self.terms
        if a:
            p = _shift_var(p, a, 0)
        if b:
            p = _shift_var(p, b, 1)
        return Poly2(p, _clean=True)

    def reflect(self, axis: str) -> "Poly2":
        if axis == "rho":
            return Poly2({(i, j): (-v if i & 1 else v) for (i, j), v in self.terms.items()}, _clean=True)
        if axis == "mu":
            return Poly2({(i, j): (-v if j & 1 else v) for (i, j), v in self.terms.items()}, _clean=True)
        raise ValueError(f"unknown axis {axis!r}")

    def evaluate(self, rho, mu):
        """Evaluate at a point; exact for rational arguments."""
        acc = 0
        for (i, j), v in self.terms.items():
            acc += v * rho**i * mu**j
        return acc

    def is_even(self, axis: str) -> bool:
        idx = 0 if axis == "rho" else 1
        return all(k[idx] % 2 == 0 for k in self.terms)

    def squash_even(self) -> "Poly2":
        """For p even in both variables return q with p(rho, mu) = q(rho^2, mu^2)."""
        if not (self.is_even("rho") and self.is_even("mu")):
            raise ValueError("polynomial is not even in both variables")
        return Poly2({(i // 2, j // 2): v for (i, j), v in self.terms.items()}, _clean=True)

    def expand_even(self) -> "Poly2":
        """Inverse of squash_even: q(rho^2, mu^2)."""
        return Poly2({(2 * i, 2 * j): v for (i, j), v in self.terms.items()}, _clean=True)

    def content(self) -> Rat:
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self.terms:
            return Rat(0)
        num = reduce(gcd, (v.numerator for v in self.terms.values()))
        den = reduce(lcm, (v.denominator for v in self.terms.values()))
        return Rat(abs(num), den)


def _shift_var(p: dict, a: Rat, idx: int) -> dict:
    out: dict[tuple[int, int], Rat] = {}
    powers = [Rat(1)]
    for key, v in p.items():
        e = key[idx]
        while len(powers) <= e:
            powers.append(powers[-1] * a)
        for r in range(e + 1):
            c = v * comb(e, r) * powers[e - r]
            k = (r, key[1]) if idx == 0 else (key[0], r)
            out[k] = out.get(k, 0) + c
    return {k: v for k, v in out.items() if v}


def _as_poly(x) -> Poly2:
    if isinstance(x, Poly2):
        return x
    if isinstance(x, _RAT_TYPES):
        return Poly2.const(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as a polynomial")


RHO = Poly2({(1, 0): 1})
MU = Poly2({(0, 1): 1})


# ---------------------------------------------------------------------------
# gcd via the dense integer routines


def _to_dense(p: Poly2) -> tuple[list[list[int]], Rat]:
    """Integer dense form (rho-major, coefficients in mu) and the scale used."""
    den = reduce(lcm, (v.denominator for v in p.terms.values()), 1)
    dr = p.deg_rho()
    rows: list[list[int]] = [[] for _ in range(dr + 1)]
    for (i, j), v in p.terms.items():
        row = rows[i]
        if len(row) <= j:
            row.extend([0] * (j + 1 - len(row)))
        row[j] = int(v.numerator * (den // v.denominator))
    return [Z.u_trim(r) for r in rows], Rat(den)


def _from_dense(d: list[list[int]]) -> Poly2:
    t = {}
    for i, row in enumerate(d):
        for j, a in enumerate(row):
            if a:
                t[(i, j)] = Rat(a)
    return Poly2(t, _clean=True)


def _monomial_gcd(p: Poly2, q: Poly2) -> tuple[int, int]:
    mi = min(min(i for i, _ in p.terms), min(i for i, _ in q.terms))
    mj = min(min(j for _, j in p.terms), min(j for _, j in q.terms))
    return mi, mj


def _div_monomial(p: Poly2, m: tuple[int, int]) -> Poly2:
    if m == (0, 0):
        return p
    return Poly2({(i - m[0], j - m[1]): v for (i, j), v in p.terms.items()}, _clean=True)


def poly_gcd(p: Poly2, q: Poly2, route: str = "auto") -> Poly2:
    """Gcd over Q, scaled to integer primitive form with positive leading rho-coefficient.

    route="auto" uses heuristic evaluation with exact-division confirmation
    and falls back to the subresultant sequence; route="prs" forces the
    subresultant sequence.
    """
    if p.is_zero():
        return q
    if q.is_zero():
        return p
    if p.is_const() or q.is_const():
        return Poly2.const(1)
    mono = _monomial_gcd(p, q)
    p0, q0 = _div_monomial(p, mono), _div_monomial(q, mono)
    mono_poly = Poly2({mono: 1}, _clean=True)
    if p0.is_const() or q0.is_const() or len(p0.terms) == 1 or len(q0.terms) == 1:
        return mono_poly
    if p0 == q0:
        return mono_poly * _primitive(p0)
    fd, _ = _to_dense(p0)
    gd, _ = _to_dense(q0)
    if route == "prs":
        h = Z.b_gcd_prs(Z.b_primitive_int(fd), Z.b_primitive_int(gd))
        h = Z.b_normalize_sign(Z.b_primitive_int(h))
    else:
        h = Z.b_gcd(fd, gd)
    return mono_poly * _from_dense(h)


def _primitive(p: Poly2) -> Poly2:
    d, _ = _to_dense(p)
    return _from_dense(Z.b_normalize_sign(Z.b_primitive_int(d)))


def poly_divexact(p: Poly2, q: Poly2) -> Poly2:
    """p / q when q divides p; raises ArithmeticError otherwise."""
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if q.is_const():
        return p * (1 / q.const_value())
    if p.is_zero():
        return p
    if len(q.terms) == 1:
        ((m, c),) = q.terms.items()
        out = {}
        for (i, j), v in p.terms.items():
            if i < m[0] or j < m[1]:
                raise ArithmeticError("inexact polynomial division")
            out[(i - m[0], j - m[1])] = v / c
        return Poly2(out, _clean=True)
    pd, ps = _to_dense(p)
    qd, qs = _to_dense(q)
    c = Z.b_int_content(qd)
    qd = [[a // c for a in row] for row in qd]
    # q primitive over Z, so an exact quotient has integer coefficients
    r = Z.b_divexact(pd, qd)
    if r is None:
        raise ArithmeticError("inexact polynomial division")
    return _from_dense(r) * (qs / (ps * c))


def _divexact_rational(p: Poly2, q: Poly2) -> Poly2:
    lm = q.leading_monomial()
    lc = q.terms[lm]
    rem = dict(p.terms)
    quo: dict[tuple[int, int], Rat] = {}
    while rem:
        m = max(rem, key=_grlex)
        if m[0] < lm[0] or m[1] < lm[1]:
            raise ArithmeticError("inexact polynomial division")
        c = rem[m] / lc
        sh = (m[0] - lm[0], m[1] - lm[1])
        quo[sh] = c
        for (i, j), v in q.terms.items():
            k = (i + sh[0], j + sh[1])
            s = rem.get(k, 0) - c * v
            if s:
                rem[k] = s
            else:
                rem.pop(k, None)
    return Poly2(quo, _clean=True)


# ---------------------------------------------------------------------------
# RatFunc


class RatFunc:
    """num/den with gcd(num, den) = 1 and den monic under graded lex (rho > mu)."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _normalized: bool = False):
        num = _as_poly(num)
        den = Poly2.const(1) if den is None else _as_poly(den)
        if not _normalized:
            num, den = _normalize(num, den)
        self.num: Poly2 = num
        self.den: Poly2 = den
        self._hash = None

    @staticmethod
    def const(c) -> "RatFunc":
        return RatFunc(Poly2.const(c), Poly2.const(1), _normalized=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def is_const(self) -> bool:
        return self.den.is_const() and self.num.is_const()

    def const_value(self) -> Rat:
        if not self.is_const():
            raise ValueError("not a constant")
        return self.num.const_value()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFunc):
            try:
                other = as_ratfunc(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self) -> str:
        if self.den.is_const():
            return f"RatFunc({self.num})"
        return f"RatFunc(({self.num}) / ({self.den}))"

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den, _normalized=True)

    def __add__(self, other) -> "RatFunc":
        other = as_ratfunc(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return _from_common_den(self.num + other.num, self.den)
        if self.den.is_const():
            return RatFunc(self.num * other.den + other.num, other.den, _normalized=True)
        if other.den.is_const():
            return RatFunc(self.num + other.num * self.den, self.den, _normalized=True)
        g = poly_gcd(self.den, other.den)
        if g.is_const():
            num = self.num * other.den + other.num * self.den
            den = self.den * other.den
            # gcd(num, den) = 1 when the denominators are coprime
            return _monic(num, den)
        b1 = poly_divexact(self.den, g)
        d1 = poly_divexact(other.den, g)
        num = self.num * d1 + other.num * b1
        den = b1 * other.den
        return RatFunc(num, den)

    __radd__ = __add__

    def __sub__(self, other) -> "RatFunc":
        return self + (-as_ratfunc(other))

    def __rsub__(self, other) -> "RatFunc":
        return as_ratfunc(other) - self

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, _RAT_TYPES):
            c = as_rat(other)
            if not c:
                return RatFunc.const(0)
            return RatFunc(self.num * c, self.den, _normalized=True)
        other = as_ratfunc(other)
        if self.is_zero() or other.is_zero():
            return RatFunc.const(0)
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1, d2 = _cancel(self.num, other.den, g1)
        n2, d1 = _cancel(other.num, self.den, g2)
        return _monic(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        return _monic(self.den, self.num)

    def __truediv__(self, other) -> "RatFunc":
        return self * as_ratfunc(other).inverse()

    def __rtruediv__(self, other) -> "RatFunc":
        return as_ratfunc(other) * self.inverse()

    def __pow__(self, e: int) -> "RatFunc":
        if e < 0:
            return self.inverse() ** (-e)
        return RatFunc(self.num**e, self.den**e, _normalized=True) if e else RatFunc.const(1)

    def shift(self, a, b) -> "RatFunc":
        """f(rho + a, mu + b); translation keeps the normal form."""
        a, b = as_rat(a), as_rat(b)
        if not a and not b:
            return self
        return RatFunc(self.num.shift(a, b), self.den.shift(a, b), _normalized=True)

    def reflect(self, axis: str) -> "RatFunc":
        return _monic(self.num.reflect(axis), self.den.reflect(axis))

    def is_even(self, axis: str) -> bool:
        return self.reflect(axis) == self

    def evaluate(self, rho, mu):
        d = self.den.evaluate(rho, mu)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(rho, mu) / d

    def squash_even(self) -> "RatFunc":
        return RatFunc(self.num.squash_even(), self.den.squash_even(), _normalized=True)

    def expand_even(self) -> "RatFunc":
        return RatFunc(self.num.expand_even(), self.den.expand_even(), _normalized=True)


def _cancel(n: Poly2, d: Poly2, g: Poly2) -> tuple[Poly2, Poly2]:
    if g.is_const():
        return n, d
    return poly_divexact(n, g), poly_divexact(d, g)


def _monic(num: Poly2, den: Poly2) -> RatFunc:
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    lc = den.leading_coeff()
    if lc != 1:
        inv = 1 / lc
        num, den = num * inv, den * inv
    if num.is_zero():
        den = Poly2.const(1)
    return RatFunc(num, den, _normalized=True)


def _from_common_den(num: Poly2, den: Poly2) -> RatFunc:
    if num.is_zero():
        return RatFunc.const(0)
    g = poly_gcd(num, den)
    n, d = _cancel(num, den, g)
    return _monic(n, d)


def _normalize(num: Poly2, den: Poly2) -> tuple[Poly2, Poly2]:
    if den.is_zero():
        raise ZeroDivisionError("rational function with zero denominator")
    if num.is_zero():
        return Poly2.const(0), Poly2.const(1)
    g = poly_gcd(num, den)
    n, d = _cancel(num, den, g)
    r = _monic(n, d)
    return r.num, r.den


def rf_normalize(num: Poly2, den: Poly2) -> RatFunc:
    """Canonical form of num/den: gcd cancelled, denominator monic under graded lex."""
    return RatFunc(num, den)


def as_ratfunc(x) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Poly2):
        return RatFunc(x, Poly2.const(1), _normalized=True)
    if isinstance(x, _RAT_TYPES):
        return RatFunc.const(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational function")


def rf_sum(items: Iterable[RatFunc]) -> RatFunc:
    """Sum of several rational functions, merging equal denominators first."""
    by_den: dict[Poly2, Poly2] = {}
    for f in items:
        if f.is_zero():
            continue
        by_den[f.den] = by_den.get(f.den, Poly2.const(0)) + f.num
    parts = [_from_common_den(n, d) for d, n in by_den.items() if not n.is_zero()]
    if not parts:
        return RatFunc.const(0)
    return reduce(lambda x, y: x + y, parts)


def pochhammer(base: Poly2, k: int) -> Poly2:
    """Rising product base (base + 1) ... (base + k - 1) for an affine base."""
    if k < 0:
        raise ValueError("pochhammer index must be nonnegative")
    base = _as_poly(base)
    if base.degree() > 1:
        raise ValueError("pochhammer base must be affine in rho, mu")
    out = Poly2.const(1)
    for i in range(k):
        out = out * (base + i)
    return out


# ---------------------------------------------------------------------------
# shift operators


class Shift(NamedTuple):
    a: Rat
    b: Rat

    def __add__(self, other):  # type: ignore[override]
        return Shift(self.a + other.a, self.b + other.b)

    def __neg__(self):
        return Shift(-self.a, -self.b)


def shift(a, b) -> Shift:
    return Shift(as_rat(a), as_rat(b))


ZERO_SHIFT = Shift(Rat(0), Rat(0))


class ShiftOp:
    """Finite sum of terms c(rho, mu) * T^(a, b); the empty map is the zero operator."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Shift, object] | None = None, _clean: bool = False):
        if _clean:
            self.terms = terms  # type: ignore[assignment]
        else:
            t: dict[Shift, RatFunc] = {}
            for s, c in (terms or {}).items():
                c = as_ratfunc(c)
                if not c.is_zero():
                    t[shift(*s)] = c
            self.terms = t
        self._hash = None

    @staticmethod
    def scalar(c) -> "ShiftOp":
        return ShiftOp({ZERO_SHIFT: c})

    @staticmethod
    def identity() -> "ShiftOp":
        return ShiftOp.scalar(1)

    @staticmethod
    def zero() -> "ShiftOp":
        return ShiftOp({}, _clean=True)

    @staticmethod
    def term(c, a, b) -> "ShiftOp":
        return ShiftOp({shift(a, b): c})

    def is_zero(self) -> bool:
        return not self.terms

    def shifts(self) -> list[Shift]:
        return sorted(self.terms)

    def items(self) -> Iterator[tuple[Shift, RatFunc]]:
        for s in sorted(self.terms):
            yield s, self.terms[s]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShiftOp):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self) -> str:
        if not self.terms:
            return "ShiftOp(0)"
        inner = ", ".join(f"T({s.a},{s.b}): {c!r}" for s, c in self.items())
        return f"ShiftOp({inner})"

    # operator sugar
    def __add__(self, other) -> "ShiftOp":
        return op_add(self, _as_op(other))

    __radd__ = __add__

    def __sub__(self, other) -> "ShiftOp":
        return op_sub(self, _as_op(other))

    def __rsub__(self, other) -> "ShiftOp":
        return op_sub(_as_op(other), self)

    def __neg__(self) -> "ShiftOp":
        return ShiftOp({s: -c for s, c in self.terms.items()}, _clean=True)

    def __mul__(self, other) -> "ShiftOp":
        if isinstance(other, ShiftOp):
            return op_compose(self, other)
        return op_scale_right(self, as_ratfunc(other))

    def __rmul__(self, other) -> "ShiftOp":
        return op_scale_left(as_ratfunc(other), self)

    def __matmul__(self, other: "ShiftOp") -> "ShiftOp":
        return op_compose(self, other)

    def __pow__(self, e: int) -> "ShiftOp":
        out = ShiftOp.identity()
        for _ in range(e):
            out = op_compose(out, self)
        return out


def _as_op(x) -> ShiftOp:
    if isinstance(x, ShiftOp):
        return x
    return ShiftOp.scalar(as_ratfunc(x))


def _collect(acc: dict[Shift, list[RatFunc]]) -> ShiftOp:
    out: dict[Shift, RatFunc] = {}
    for s, parts in acc.items():
        c = parts[0] if len(parts) == 1 else rf_sum(parts)
        if not c.is_zero():
            out[s] = c
    return ShiftOp(out, _clean=True)


def op_apply(A: ShiftOp, f) -> RatFunc:
    """(A f)(rho, mu) = sum over terms of c(rho, mu) * f(rho + a, mu + b)."""
    f = as_ratfunc(f)
    return rf_sum(c * f.shift(s.a, s.b) for s, c in A.terms.items())


def op_compose(A: ShiftOp, B: ShiftOp) -> ShiftOp:
    """A o B: (c1 T^s1)(c2 T^s2) = c1 * c2(. + s1) T^(s1 + s2)."""
    acc: dict[Shift, list[RatFunc]] = {}
    for s1, c1 in A.terms.items():
        for s2, c2 in B.terms.items():
            acc.setdefault(s1 + s2, []).append(c1 * c2.shift(s1.a, s1.b))
    return _collect(acc)


def op_add(A: ShiftOp, B: ShiftOp) -> ShiftOp:
    acc: dict[Shift, list[RatFunc]] = {}
    for op in (A, B):
        for s, c in op.terms.items():
            acc.setdefault(s, []).append(c)
    return _collect(acc)


def op_sub(A: ShiftOp, B: ShiftOp) -> ShiftOp:
    return op_add(A, -B)


def op_scale_left(g, A: ShiftOp) -> ShiftOp:
    """Multiplication by g applied after A."""
    g = as_ratfunc(g)
    if g.is_zero():
        return ShiftOp.zero()
    return ShiftOp({s: g * c for s, c in A.terms.items()}, _clean=True)


def op_scale_right(A: ShiftOp, g) -> ShiftOp:
    """Multiplication by g applied before A: A o g."""
    g = as_ratfunc(g)
    if g.is_zero():
        return ShiftOp.zero()
    return ShiftOp({s: c * g.shift(s.a, s.b) for s, c in A.terms.items()}, _clean=True)


def op_linear_combination(pairs: Iterable[tuple[object, ShiftOp]]) -> ShiftOp:
    """Sum of constant or rational multiples (applied on the left) of operators."""
    acc: dict[Shift, list[RatFunc]] = {}
    for coeff, op in pairs:
        coeff = as_ratfunc(coeff)
        if coeff.is_zero():
            continue
        for s, c in op.terms.items():
            acc.setdefault(s, []).append(coeff * c)
    return _collect(acc)


def commutator(A: ShiftOp, B: ShiftOp) -> ShiftOp:
    return op_sub(op_compose(A, B), op_compose(B, A))


def anticommutator(A: ShiftOp, B: ShiftOp) -> ShiftOp:
    return op_add(op_compose(A, B), op_compose(B, A))


def reflect(A: ShiftOp, axis: str) -> ShiftOp:
    """c(rho, mu) T^(a, b) -> c(-rho, mu) T^(-a, b) (axis rho), likewise for mu."""
    out = {}
    for s, c in A.terms.items():
        if axis == "rho":
            ns = Shift(-s.a, s.b)
        elif axis == "mu":
            ns = Shift(s.a, -s.b)
        else:
            raise ValueError(f"unknown axis {axis!r}")
        out[ns] = c.reflect(axis)
    return ShiftOp(out, _clean=True)


def is_scalar(A: ShiftOp) -> RatFunc | None:
    if not A.terms:
        return RatFunc.const(0)
    if len(A.terms) == 1 and ZERO_SHIFT in A.terms:
        return A.terms[ZERO_SHIFT]
    return None


def is_even(f, axis: str) -> bool:
    return as_ratfunc(f).is_even(axis)


def formal_transpose(A: ShiftOp) -> ShiftOp:
    """(c T^(a, b))^t = c(rho - a, mu - b) T^(-a, -b)."""
    return ShiftOp({-s: c.shift(-s.a, -s.b) for s, c in A.terms.items()}, _clean=True)
