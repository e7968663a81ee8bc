"""Random exact objects shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from kcsym.opalg import Poly2, RatFunc, ShiftOp


def rand_rat(rng: random.Random, span: int = 5) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, 4))


def rand_poly(rng: random.Random, deg: int = 3, nterms: int = 4) -> Poly2:
    t = {}
    for _ in range(nterms):
        i = rng.randint(0, deg)
        j = rng.randint(0, deg - i)
        t[(i, j)] = rand_rat(rng)
    return Poly2(t)


def rand_ratfunc(rng: random.Random, deg: int = 3, den_deg: int = 1) -> RatFunc:
    num = rand_poly(rng, deg)
    den = rand_poly(rng, den_deg, 2)
    while den.is_zero():
        den = rand_poly(rng, den_deg, 2)
    return RatFunc(num, den)


def rand_op(rng: random.Random, nterms: int = 2, deg: int = 3, den_deg: int = 1) -> ShiftOp:
    t = {}
    for _ in range(rng.randint(1, nterms)):
        t[(rng.randint(-2, 2), rng.randint(-2, 2))] = rand_ratfunc(rng, deg, den_deg)
    return ShiftOp(t)
