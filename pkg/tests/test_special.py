import math
import random
import time
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from kcsym.models import Label, Params
from kcsym.special import (
    DomainError,
    Jacobi,
    LadderCase,
    LaguerreAssoc,
    LegendreHyp,
    check_ladders,
    energy_check,
    energy_from_label,
    eval_special,
    load_ladder_cases,
    parse_ladder_cases,
    random_labels,
    run_case,
    wronskian_identity_check,
    wronskian_matrix,
    wronskian_numeric,
    x2_chain_check,
)

mpmath.mp.dps = 30
F = Fraction


def close(a, b, rel=1e-11, abs_=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


# -- closed forms ----------------------------------------------------------


def test_laguerre_degree_zero():
    assert eval_special(LaguerreAssoc(0, F(7, 3)), F(5, 2)) == (1.0, 0.0)


def test_jacobi_degree_one():
    a, b, x = F(3, 2), F(-1, 3), F(2, 5)
    v, dv = eval_special(Jacobi(1, a, b), x)
    assert close(v, float((a - b) / 2 + (a + b + 2) * x / 2))
    assert close(dv, float((a + b + 2) / 2))


def test_legendre_degree_one_order_zero():
    v, dv = eval_special(LegendreHyp(F(1), F(0)), F(3, 10))
    assert close(v, 0.3) and close(dv, 1.0)


def test_negative_degree_is_zero():
    assert eval_special(Jacobi(-1, F(1), F(1)), F(0)) == (0.0, 0.0)


def test_ferrers_domain():
    with pytest.raises(DomainError):
        eval_special(LegendreHyp(F(1, 2), F(1, 3)), F(1))


# -- mpmath oracles --------------------------------------------------------

xs = st.fractions(min_value=F(-9, 10), max_value=F(9, 10), max_denominator=20)
params = st.fractions(min_value=F(-3, 2), max_value=F(5, 2), max_denominator=6)


def sym_rat(q: Fraction):
    return sympy.Rational(q.numerator, q.denominator)


z = sympy.Symbol("z")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), params, xs)
def test_laguerre_against_sympy(n, a, x):
    # exact rational oracle
    expr = sympy.assoc_laguerre(n, sym_rat(a), z)
    v, dv = eval_special(LaguerreAssoc(n, a), x)
    assert close(v, float(expr.subs(z, sym_rat(x))))
    assert close(dv, float(sympy.diff(expr, z).subs(z, sym_rat(x))))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), params, params, xs)
def test_jacobi_against_binomial_sum(m, a, b, x):
    # explicit sum over generalized binomials; valid for every a, b
    A, B = sym_rat(a), sym_rat(b)
    expr = sum(sympy.binomial(m + A, m - s) * sympy.binomial(m + B, s) * ((z - 1) / 2) ** s * ((z + 1) / 2) ** (m - s)
               for s in range(m + 1))
    expr = sympy.expand(sympy.expand_func(expr))
    v, dv = eval_special(Jacobi(m, a, b), x)
    assert close(v, float(expr.subs(z, sym_rat(x))))
    assert close(dv, float(sympy.diff(expr, z).subs(z, sym_rat(x))))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5), params, params, xs)
def test_jacobi_reflection(m, a, b, x):
    v, _ = eval_special(Jacobi(m, a, b), -x)
    w, _ = eval_special(Jacobi(m, b, a), x)
    assert close(v, (-1) ** m * w, 1e-10, 1e-10)


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=F(-2), max_value=F(4), max_denominator=6),
       st.fractions(min_value=F(-5, 2), max_value=F(5, 2), max_denominator=4),
       st.fractions(min_value=F(-4, 5), max_value=F(4, 5), max_denominator=10))
def test_ferrers_against_mpmath(nu, mu, x):
    v, dv = eval_special(LegendreHyp(nu, mu), x)
    f = lambda t: mpmath.legenp(float(nu), float(mu), t, type=2, zeroprec=200)
    # central difference at 30 digits; mpmath.diff misbehaves at exact zeros
    xm, h = mpmath.mpf(x.numerator) / x.denominator, mpmath.mpf("1e-12")
    want, dwant = float(f(xm)), float((f(xm + h) - f(xm - h)) / (2 * h))
    scale = max(1.0, abs(want))
    assert abs(v - want) <= 1e-9 * scale
    assert abs(dv - dwant) <= 1e-7 * max(1.0, abs(dwant))


@pytest.mark.parametrize("f", [LaguerreAssoc(3, F(1, 2)), Jacobi(4, F(1, 3), F(-1, 4)), LegendreHyp(F(5, 2), F(1, 3)),
                               LegendreHyp(F(3), F(2))])
def test_derivative_by_finite_difference(f):
    h = 1e-6
    for x in (-0.6, -0.1, 0.35, 0.8):
        _, dv = eval_special(f, x)
        up, _ = eval_special(f, F(x + h))
        dn, _ = eval_special(f, F(x - h))
        assert math.isclose(dv, (up - dn) / (2 * h), rel_tol=1e-6, abs_tol=1e-6)


# -- ladder recurrences ----------------------------------------------------


def test_shipped_ladder_cases_all_pass():
    results = check_ladders(load_ladder_cases())
    assert len(results) >= 30
    bad = [r.as_dict() for r in results if not r.ok]
    assert not bad
    assert max(r.max_rel_err for r in results) <= 1e-9


def test_shipped_cases_cover_every_family():
    ids = {c.rid.rstrip("+-") for c in load_ladder_cases()}
    assert {"Y1", "Yt1", "X1", "Y2", "X2", "Z1", "W1"} <= ids
    assert all(len(c.abscissae) >= 5 for c in load_ladder_cases())


def test_zero_right_hand_side_case():
    (case,) = parse_ladder_cases("X2+ | m=1 b=-1/2 c=-3/2")
    res = run_case(case)
    assert res.ok


def test_unknown_and_incomplete_cases():
    assert run_case(LadderCase("Q9+", {})).error.startswith("unknown")
    assert "missing" in run_case(LadderCase("Y1-", {"n": F(1)})).error


def test_singular_abscissa_rejected():
    # the radial variable r = 1 + x vanishes at x = -1
    res = run_case(LadderCase("Y1-", {"n": F(2), "a": F(3, 2), "alpha": F(1)}, (F(-1),)))
    assert not res.ok and "singular" in res.error


def test_case_file_parser():
    cases = parse_ladder_cases("# note\nW1+ | p=2 a=1/2 d=3/2 | 1/5,2/5 | 1e-8\n\nZ1- | p=1 a=1 d=0\n")
    assert [c.rid for c in cases] == ["W1+", "Z1-"]
    assert cases[0].abscissae == (F(1, 5), F(2, 5)) and cases[0].tol == 1e-8
    assert len(cases[1].abscissae) == 5


@pytest.mark.parametrize("m,b,c", [(1, F(1, 2), F(1, 3)), (3, F(-1, 4), F(2, 3)), (4, F(5, 2), F(1, 5))])
def test_x2_chain_is_exact(m, b, c):
    out = x2_chain_check(m, b, c)
    assert out["exact"] and out["max_rel_err"] < 1e-12
    lam = 4 * m * (m + b) * (m + c) * (m + b + c)
    assert out["scalar"] == f"{lam.numerator}/{lam.denominator}"


# -- determinant identity --------------------------------------------------


def test_wronskian_identity_exact():
    t0 = time.perf_counter()
    out = wronskian_identity_check()
    assert out["holds"] and out["sign"] == 1
    assert out["det_terms"] == out["rhs_terms"]
    assert time.perf_counter() - t0 < 5


def test_wronskian_numeric_against_sympy():
    rng = random.Random(17)
    for _ in range(5):
        vals = [rng.randint(-6, 6) for _ in range(12)]
        det, rhs = wronskian_numeric(vals)
        mat = sympy.Matrix([[math.prod(vals[k] ** e for k, e in enumerate(mono)) for mono in row]
                            for row in wronskian_matrix()])
        assert det == int(mat.det()) == rhs


def test_wronskian_vanishes_for_repeated_solution():
    rng = random.Random(5)
    vals = [rng.randint(-6, 6) for _ in range(12)]
    vals[2], vals[3] = vals[0], vals[1]
    det, rhs = wronskian_numeric(vals)
    assert det == 0 == rhs


# -- energy ----------------------------------------------------------------


def test_energy_example():
    P = Params(1, 1, 1, 1, alpha=1, b=0, c=0, u=1)
    assert energy_from_label("3p", P, Label(0, 0, 0, F(1))) == F(1, 4)


@pytest.mark.parametrize("kind", ["3p", "4p"])
def test_energy_check_random_labels(kind):
    P = Params(1, 3, 2, 1, alpha=F(2, 3), b=F(1, 7), c=F(-2, 5), u=F(3, 2), d=F(1, 9))
    labels = [l for l in random_labels(kind, 300, random.Random(3))]
    labels = [l for l in labels if _regular(kind, P, l)]
    out = energy_check(P, labels, kind)
    assert out["ok"] and out["labels"] == len(labels)


def _regular(kind, P, lbl):
    try:
        energy_from_label(kind, P, lbl)
    except ZeroDivisionError:
        return False
    return True
