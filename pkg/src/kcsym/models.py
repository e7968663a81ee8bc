"""Shift-operator models of the 3- and 4-parameter symmetry algebras.

Every operator acts on rational functions f(rho, mu) of the two spectral
variables.  The ladder operators Jp, Jm (moving rho) and Kp, Km (moving mu)
are single shift terms whose coefficients are products of Pochhammer symbols
in affine forms of rho and mu; everything else is derived from them.

Composition order matches the action on eigenfunctions: if Jp sends the
eigenvalue label rho to rho - a then Jp carries the shift T^(+a).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from math import gcd
from typing import Callable

from .opalg import (
    MU,
    RHO,
    Poly2,
    Rat,
    RatFunc,
    ShiftOp,
    anticommutator,
    as_rat,
    op_compose,
    op_scale_right,
    pochhammer,
)


class ConstructionError(ValueError):
    """Raised when parameter values make a construction denominator vanish."""


class SingularLabel(ArithmeticError):
    """Raised when a label-action coefficient has a vanishing denominator."""


class SystemKind(Enum):
    THREE = "3p"
    FOUR = "4p"

    @classmethod
    def parse(cls, s: "str | SystemKind") -> "SystemKind":
        if isinstance(s, SystemKind):
            return s
        s = s.lower().replace("-", "").replace("param", "p")
        if s in ("3p", "3", "three", "threeparam"):
            return cls.THREE
        if s in ("4p", "4", "four", "fourparam"):
            return cls.FOUR
        raise ValueError(f"unknown system kind {s!r}")


@dataclass(frozen=True)
class Params:
    p1: int
    q1: int
    p2: int
    q2: int
    alpha: Rat
    b: Rat
    c: Rat
    u: Rat
    d: Rat = Rat(0)

    def __post_init__(self):
        for name in ("p1", "q1", "p2", "q2"):
            v = getattr(self, name)
            if int(v) != v or v <= 0:
                raise ConstructionError(f"{name} must be a positive integer, got {v}")
            object.__setattr__(self, name, int(v))
        if gcd(self.p1, self.q1) != 1 or gcd(self.p2, self.q2) != 1:
            raise ConstructionError("(p1, q1) and (p2, q2) must be coprime pairs")
        for name in ("alpha", "b", "c", "u", "d"):
            object.__setattr__(self, name, as_rat(getattr(self, name)))
        if self.u == 0:
            raise ConstructionError("u = 0 annihilates the denominator of alpha/u")

    @property
    def k1(self) -> Rat:
        return Rat(self.p1, self.q1)

    @property
    def k2(self) -> Rat:
        return Rat(self.p2, self.q2)

    @property
    def beta(self) -> Rat:
        return self.k2**2 * (Rat(1, 4) - self.b**2)

    @property
    def gamma(self) -> Rat:
        return self.k2**2 * (Rat(1, 4) - self.c**2)

    @property
    def delta(self) -> Rat:
        return self.k1**2 * (Rat(1, 4) - self.d**2)

    @property
    def E(self) -> Rat:
        return self.alpha**2 / self.u**2

    @property
    def pq(self) -> tuple[int, int, int, int]:
        return (self.p1, self.q1, self.p2, self.q2)

    def as_dict(self) -> dict[str, str]:
        out = {k: str(getattr(self, k)) for k in ("p1", "q1", "p2", "q2")}
        for k in ("alpha", "b", "c", "u", "d"):
            out[k] = rat_str(getattr(self, k))
        return out


def rat_str(x) -> str:
    x = as_rat(x)
    return f"{x.numerator}/{x.denominator}"


def random_params(pq: tuple[int, int, int, int], rng: random.Random, kind: "SystemKind | str" = SystemKind.FOUR,
                  max_redraws: int = 20) -> Params:
    """Draw rational parameters: numerators in [-9, 9], denominators in 1..7.

    Re-draws (at most ``max_redraws`` times) when a construction denominator
    vanishes; the caller owns the generator and therefore the seed.
    """
    kind = SystemKind.parse(kind)
    last: Exception | None = None
    for _ in range(max_redraws):
        vals = [Rat(rng.randint(-9, 9), rng.randint(1, 7)) for _ in range(5)]
        try:
            prm = Params(*pq, alpha=vals[0], b=vals[1], c=vals[2], u=vals[3], d=vals[4])
            build_family(kind, prm)
            return prm
        except ConstructionError as exc:
            last = exc
    raise ConstructionError(f"no admissible parameter draw after {max_redraws} attempts: {last}")


@dataclass(frozen=True)
class Label:
    """Basis label (n, m, p); the 3-parameter system carries rho instead of p."""

    n: int
    m: int
    p: int = 0
    rho: Rat | None = None


@dataclass
class OperatorFamily:
    kind: SystemKind
    params: Params
    ops: dict[str, ShiftOp] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, name: str) -> ShiftOp:
        try:
            return self.ops[name]
        except KeyError:
            raise KeyError(f"operator {name!r} is not defined in this family") from None

    def __contains__(self, name: str) -> bool:
        return name in self.ops

    def names(self) -> list[str]:
        return list(self.ops)

    def to_json(self) -> str:
        return json.dumps(family_to_dict(self), sort_keys=False, indent=1)


# ---------------------------------------------------------------------------
# helpers


def aff(c0=0, c_rho=0, c_mu=0) -> Poly2:
    return Poly2.affine(as_rat(c0), as_rat(c_rho), as_rat(c_mu))


def poch(c0, c_rho, c_mu, k: int) -> Poly2:
    return pochhammer(aff(c0, c_rho, c_mu), k)


def mult(f) -> ShiftOp:
    return ShiftOp.scalar(f)


def _half() -> Rat:
    return Rat(1, 2)


def _prod(items) -> Poly2:
    out = Poly2.const(1)
    for it in items:
        out = out * it
    return out


# ---------------------------------------------------------------------------
# ladder operators


def build_family(kind: "SystemKind | str", params: Params) -> OperatorFamily:
    """H, L2, L3 and the ladder operators Jp, Jm, Kp, Km.

    Each ladder starts from its eigenbasis coefficient, moved to shift form,
    and is then conjugated by one common gauge (see ``ladder_gauge``).  A
    single gauge for all four keeps every mixed J/K relation intact.
    """
    kind = SystemKind.parse(kind)
    P = params
    fam = OperatorFamily(kind, P)
    k1 = P.k1
    fam.ops["H"] = mult(P.E)
    fam.ops["L2"] = mult(k1**2 * (1 - RHO * RHO) * Rat(1, 4))
    fam.ops["L3"] = mult(-(MU * MU))
    gauge = ladder_gauge(kind, P)
    for name, op in eigenbasis_ladders(kind, P).items():
        fam.ops[name] = gauge_conjugate(op, gauge)
    return fam


def eigenbasis_ladders(kind: SystemKind, P: Params) -> dict[str, ShiftOp]:
    """Ladders acting exactly as on the labelled eigenbasis, before any gauge."""
    out = {}
    for name in LADDERS:
        a, b = _label_step(kind, P, name)
        out[name] = ShiftOp.term(label_coefficient(kind, P, name).shift(-a, -b), -a, -b)
    return out


def gauge_conjugate(op: ShiftOp, gauge) -> ShiftOp:
    """g * op * g^-1 for a Gamma-type gauge g."""
    return ShiftOp({sh: c * gauge_factor(gauge, sh.a, sh.b) for sh, c in op.terms.items()})


def ladder_gauge(kind: SystemKind, P: Params) -> list[tuple[Poly2, int]]:
    """Gamma-type gauge as (argument, exponent) pairs, g = prod Gamma(arg)^e.

    4-param: makes Jm = reflect(Jp, rho) and Km = reflect(Kp, mu) exactly.
    3-param: only J can be symmetrised (and then only up to (-1)^(p1+q1)); the
    mixed rho/mu factors of K admit no rational gauge compatible with J.
    """
    k1, k2, h, u = P.k1, P.k2, _half(), P.u
    out = [(aff(h + u / 2, k1 / 2, 0), 1)]
    if kind is SystemKind.THREE:
        return out
    d, b, c, q4 = P.d, P.b, P.c, Rat(1, 4)
    out += [
        (aff(h + d / 2, q4, 1 / (2 * k1)), -1),
        (aff(h - d / 2, q4, 1 / (2 * k1)), 1),
        (aff(1, 0, 1 / k1), 1),
        (aff(h + b / 2 + c / 2, 0, 1 / (2 * k2)), -1),
        (aff(h - b / 2 + c / 2, 0, 1 / (2 * k2)), 1),
    ]
    return out


def gauge_factor(gauge, a, b) -> RatFunc:
    """g(rho, mu) / g(rho + a, mu + b) for a Gamma-type gauge.

    Each argument must move by an integer, so the ratio is rational.
    """
    out = RatFunc.const(1)
    for arg, e in gauge:
        step = (arg.shift(a, b) - arg).const_value()
        if step.denominator != 1:
            raise ConstructionError(f"gauge argument {arg} moves by non-integer {step}")
        n = int(step)
        # Gamma(x) / Gamma(x + n)
        ratio = RatFunc(1, pochhammer(arg, n)) if n >= 0 else RatFunc(pochhammer(arg + n, -n))
        out = out * ratio**e if e >= 0 else out / ratio ** (-e)
    return out


# ---------------------------------------------------------------------------
# derived operators


def derive_secondary(family: OperatorFamily) -> OperatorFamily:
    """J1, J2, K1, K2 and the shift-free diagonal products."""
    o = family.ops
    jp, jm, kp, km = o["Jp"], o["Jm"], o["Kp"], o["Km"]
    inv_rho = RatFunc(1, RHO)
    inv_mu = RatFunc(1, MU)
    o["J1"] = op_scale_right(jm - jp, inv_rho)
    o["J2"] = jm + jp
    o["K1"] = op_scale_right(km - kp, inv_mu)
    o["K2"] = km + kp
    jpjm, jmjp = op_compose(jp, jm), op_compose(jm, jp)
    kpkm, kmkp = op_compose(kp, km), op_compose(km, kp)
    names = ("Pplus", "Pminus", "Splus", "Sminus") if family.kind is SystemKind.THREE else ("P1", "P2", "P3", "P4")
    o[names[0]] = jpjm + jmjp
    o[names[1]] = op_scale_right(jpjm - jmjp, inv_rho)
    o[names[2]] = kpkm + kmkp
    o[names[3]] = op_scale_right(kpkm - kmkp, inv_mu)
    return family


def _poly_in(expr: Callable[[Poly2, Poly2], Poly2]) -> Poly2:
    return expr(RHO, MU)


def d2_poly(P: Params) -> Poly2:
    """D2(L2) of the 3-parameter K0 construction, as a polynomial in rho."""
    p1, q1, p2, q2 = P.pq
    l2 = P.k1**2 * (1 - RHO * RHO) * Rat(1, 4)
    out = Poly2.const(2 * (P.c**2 - P.b**2))
    for ell in range(1, q1 * p2 + 1):
        out = out * (l2 * (1 / P.k1**2) + ell * (ell - 1))
    b, c = P.b, P.c
    for j in range(1, (p1 * q2 - 1) // 2 + 1):
        out = out * ((2 * j - b - c) * (2 * j + b - c) * (2 * j - b + c) * (2 * j + b + c))
    return out


def _S1SIGN(q1):
    return Rat(-1) ** ((q1 + 1) // 2)


def s1_poly(P: Params) -> Poly2:
    """S1(H, L3) of the 4-parameter J0 construction, with H = E."""
    p1, q1 = P.p1, P.q1
    k1, d = P.k1, P.d
    l3 = -(MU * MU)
    out = (l3 * (1 / k1**2) + d**2) * (Rat(1) / (2 * k1**2 * q1)) * Rat(-4) ** ((q1 - 1) // 2) * Rat(4) ** p1 * _S1SIGN(q1)
    for s in range(p1):
        out = out * (P.alpha**2 - (1 + 2 * s) ** 2 * P.E)
    for s in range(1, (q1 - 1) // 2 + 1):
        out = out * ((s - d / 2) ** 2 + l3 * (1 / (4 * k1**2)))
        out = out * ((s + d / 2) ** 2 + l3 * (1 / (4 * k1**2)))
    return out


def s2_poly(P: Params) -> Poly2:
    """S2(L2) of the 4-parameter K0 construction, as a polynomial in rho."""
    p1, q1, p2, q2 = P.pq
    b, c, d = P.b, P.c, P.d
    quarter_rho = RHO * Rat(1, 4)
    out = (d**2 - RHO * RHO * Rat(1, 4)) * (Rat(2) ** (p1 * q2 - 5) * (b**2 - c**2) / (p1 * p2))
    for s in range(1, (q1 * p2 - 1) // 2 + 1):
        out = out * ((quarter_rho + d / 2) ** 2 - s * s) * ((quarter_rho * -1 + d / 2) ** 2 - s * s)
    for s in range(1, (p1 * q2 - 1) // 2 + 1):
        out = out * ((s + (c + b) / 2) * (s - (c + b) / 2) * (s - 1 - (b - c) / 2) * (s - 1 + (b - c) / 2))
    return out


def _pole_pair(kp: ShiftOp, km: ShiftOp, lam, f_p: RatFunc, f_m: RatFunc, side: str) -> ShiftOp:
    if side == "right":
        return op_scale_right(kp, f_p) * lam + op_scale_right(km, f_m) * lam
    return ShiftOp({s: c * f_p * lam for s, c in kp.terms.items()}) + ShiftOp(
        {s: c * f_m * lam for s, c in km.terms.items()}
    )


def build_K0_J0(family: OperatorFamily) -> OperatorFamily:
    """K0 (both systems), J0 (4-parameter) and their scalar companions.

    The pole factors are attached on the right or on the left of the ladder
    operators, whichever makes the defining commutators vanish exactly; the
    choice is recorded in ``family.notes``.  Parity preconditions that the
    scalar companions rely on are recorded as skip notes instead.
    """
    P = family.params
    o = family.ops
    p1, q1, p2, q2 = P.pq
    h = p1 * p2
    mu_pole_m = RatFunc(1, MU * (MU - h))
    mu_pole_p = RatFunc(1, MU * (MU + h))
    if family.kind is SystemKind.THREE:
        if (p1 * q2) % 2 == 0:
            family.notes["K0"] = "skipped: not constructible under the residue derivation (p1*q2 odd required)"
            return family
        d2 = d2_poly(P)
        o["D2"] = mult(d2)
        scalar = RatFunc(-d2, (MU * MU - h * h) * (2 * p1 * q2))
        # Kp lowers the label mu, so it pairs with the pole at mu = -p1 p2
        candidates = [(Rat(1, 4 * h), mu_pole_p, mu_pole_m), (Rat(-1, 4 * p1 * q2), mu_pole_p, mu_pole_m)]
    else:
        if (q1 * p2) % 2 == 0 or (p1 * q2) % 2 == 0:
            family.notes["K0"] = "skipped: not constructible under the residue derivation (q1*p2 and p1*q2 odd required)"
        else:
            s2 = s2_poly(P)
            o["S2"] = mult(s2)
            scalar = RatFunc(s2, MU * MU - h * h)
            candidates = [(Rat(-1, 4 * h), mu_pole_m, mu_pole_p)]
            _pick_zero(family, "K0", o["Kp"], o["Km"], candidates, scalar, o["L3"], o["K1"], o["L2"])
        if q1 % 2 == 0:
            family.notes["J0"] = "skipped: not constructible under the residue derivation (q1 odd required)"
        else:
            s1 = s1_poly(P)
            o["S1"] = mult(s1)
            r = 2 * q1
            scalar_j = RatFunc(s1, RHO * RHO - r * r)
            cands = [(Rat(-1) / (2 * P.k1**2 * q1), RatFunc(1, RHO * (RHO - r)), RatFunc(1, RHO * (RHO + r)))]
            _pick_zero(family, "J0", o["Jp"], o["Jm"], cands, scalar_j, o["L2"], o["J1"], o["L3"])
        return family
    _pick_zero(family, "K0", o["Kp"], o["Km"], candidates, scalar, o["L3"], o["K1"], o["L2"])
    return family


def _pick_zero(family, name, xp, xm, candidates, scalar, l_main, x1, l_other):
    from .opalg import commutator

    tried = []
    for lam, f_p, f_m in candidates:
        for side in ("right", "left"):
            op = _pole_pair(xp, xm, lam, f_p, f_m, side) + mult(scalar)
            r1 = commutator(l_main, op) - x1
            r2 = commutator(l_other, op)
            if r1.is_zero() and r2.is_zero():
                family.ops[name] = op
                family.notes[name] = f"pole factors placed on the {side}, prefactor {rat_str(lam)}"
                return
            tried.append((side, lam, len(r1.terms), len(r2.terms)))
    lam, f_p, f_m = candidates[0]
    family.ops[name] = _pole_pair(xp, xm, lam, f_p, f_m, "right") + mult(scalar)
    family.notes[name] = "no placement satisfies the defining commutators; kept right placement; tried " + repr(tried)


def q_poly(P: Params, kind: SystemKind) -> Poly2:
    p1, q1, p2, q2 = P.pq
    k1, h, d = P.k1, _half(), P.d
    if kind is SystemKind.THREE:
        B = poch(-2 * q1 * p2 + h, -h, -1 / k1, q1) + poch(h, -h, -1 / k1, q1)
    else:
        L = q1 * p2
        B = poch(h - d / 2, Rat(1, 4), 1 / (2 * k1), q1) * poch(h + d / 2, Rat(1, 4), 1 / (2 * k1), q1) + poch(
            h - L - d / 2, Rat(1, 4), 1 / (2 * k1), q1
        ) * poch(h - L + d / 2, Rat(1, 4), 1 / (2 * k1), q1)
    return B * B.reflect("rho") * B.reflect("mu") * B.reflect("rho").reflect("mu")


def build_QB(family: OperatorFamily) -> OperatorFamily:
    family.ops["Q"] = mult(q_poly(family.params, family.kind))
    return family


def euclidean_c_poly(P: Params) -> Poly2:
    """C(L2, L3) of the Euclidean K1 identity, transcribed term by term."""
    be, ga, de = P.beta, P.gamma, P.delta
    l2 = P.k1**2 * (1 - RHO * RHO) * Rat(1, 4)
    l3 = -(MU * MU)
    F = Rat
    terms = [
        F(1, 4) * ga, F(1, 4) * be, F(1, 4) * de, -F(1, 8) * l3 * l2 * de, F(1, 4) * l3 * l2 * be,
        F(1, 4) * l3 * de * be, F(1, 4) * l2 * de * be, F(1, 4) * l3 * l2 * ga,
        F(1, 4) * l3 * de * ga, F(1, 4) * l2 * de * ga, -F(1, 8) * l3 * be * ga, F(1, 4) * l2 * be * ga,
        -F(1, 2) * l3, F(1, 4) * l2, -F(7, 16) * l3**2, F(1, 16) * l3**3, F(1, 8) * l2**2, F(1, 4) * de * be,
        F(1, 4) * de * ga, -F(1, 4) * be * ga, F(1, 8) * de**2, F(1, 8) * be**2, F(1, 8) * ga**2,
        -F(1, 8) * de**2 * be, -F(1, 8) * de * be**2, -F(1, 8) * de**2 * ga, -F(1, 8) * de * ga**2,
        F(1, 4) * de * be * ga, F(1, 8) * l3 * ga,
        F(1, 8) * l3 * l2, -F(1, 8) * l3**2 * l2, F(1, 16) * l3 * l2**2, F(1, 8) * l3 * be, F(1, 8) * l3 * de,
        F(1, 4) * l2 * be, -F(1, 4) * l2 * de, F(1, 4) * l2 * ga, -F(1, 8) * l3**2 * de,
        F(1, 16) * l3 * de**2, -F(1, 8) * l3**2 * be, -F(1, 8) * l2**2 * be, F(1, 16) * l3 * be**2,
        -F(1, 8) * l2 * be**2, -F(1, 8) * l3**2 * ga, -F(1, 8) * l2**2 * ga, F(1, 16) * l3 * ga**2,
        -F(1, 8) * l2 * ga**2,
    ]
    return _sum_poly(terms)


def euclidean_d_poly(P: Params) -> Poly2:
    """D(H, L2, L3) of the Euclidean J1 identity (a = alpha, E = H)."""
    a, H, de = P.alpha, P.E, P.delta
    l2 = P.k1**2 * (1 - RHO * RHO) * Rat(1, 4)
    l3 = -(MU * MU)
    terms = [
        5 * a**4, -8 * l3 * a**4, 296 * H**2 * l3, 80 * H**2 * l3**2, 4 * a**4 * l2, -156 * H**2 * l2,
        -560 * H**2 * l2**2, -8 * a**4 * de, 216 * H**2 * de,
        80 * H**2 * de**2, -16 * H * l3 * a**2, 32 * H * l3**2 * a**2, 64 * H**2 * l3**2 * l2,
        -72 * H * a**2 * l2, 288 * H**2 * l3 * l2, 32 * H * a**2 * l2**2, -128 * H**2 * l3 * l2**2,
        -160 * H**2 * l3 * de, 224 * H**2 * l2 * de, -128 * H**2 * l2**2 * de, -48 * H * a**2 * de,
        64 * H**2 * l2 * de**2, 32 * H * a**2 * de**2, 64 * H**2 * l2**3, -64 * H * l3 * a**2 * l2,
        -64 * H * l3 * a**2 * de,
        -64 * H * a**2 * l2 * de, -128 * H**2 * l3 * l2 * de, -74 * H * a**2, 229 * H**2,
    ]
    return _sum_poly(terms)


def _sum_poly(terms) -> Poly2:
    out = Poly2.const(0)
    for t in terms:
        out = out + t
    return out


def build_euclidean_extras(family: OperatorFamily) -> OperatorFamily:
    """Operators that only exist when p1 = q1 = p2 = q2 = 1 in the 4-parameter system."""
    P = family.params
    if P.pq != (1, 1, 1, 1) or family.kind is not SystemKind.FOUR:
        raise ConstructionError("Euclidean extras need the 4-parameter system with p1 = q1 = p2 = q2 = 1")
    o = family.ops
    be, ga, de = P.beta, P.gamma, P.delta
    l2 = (1 - RHO * RHO) * Rat(1, 4)
    l3 = -(MU * MU)
    o["Qeu"] = mult((l3 - l2 - de) ** 2 - (2 * (2 * de + 1)) * l2 - l3 + (2 * de + 1))
    o["C"] = mult(euclidean_c_poly(P))
    o["D"] = mult(euclidean_d_poly(P))
    hm = P.E - P.alpha**2

    def quad(sign):
        return (RHO + sign * 2 * MU) ** 2 + (4 * de + 3)

    # building-block coefficients, written in the (mu, rho) argument order of the source
    P_pp = RatFunc(-1, quad(-1) * RHO * (RHO - 2) * MU * (MU - 1) * 2)
    P_mm = RatFunc(-1, quad(-1) * RHO * (RHO + 2) * MU * (MU + 1) * 2)
    P_pm = RatFunc(-1, quad(+1) * RHO * (RHO + 2) * MU * (MU - 1) * 2)
    P_mp = RatFunc(-1, quad(+1) * RHO * (RHO - 2) * MU * (MU + 1) * 2)
    P_0p = RatFunc(Poly2.const(be - ga), RHO * (RHO - 2) * (MU + 1) * (MU - 1) * 16)
    P_0m = RatFunc(Poly2.const(be - ga), RHO * (RHO + 2) * (MU + 1) * (MU - 1) * 16)
    P_p0 = RatFunc(Poly2.const(-hm), (RHO + 2) * (RHO - 2) * MU * (MU - 1))
    P_m0 = RatFunc(Poly2.const(-hm), (RHO + 2) * (RHO - 2) * MU * (MU + 1))
    P_00 = RatFunc((RHO * RHO + 4 * MU * MU + 4 * (de - Rat(5, 4))) * ((be - ga) * hm), (MU * MU - 1) * (RHO * RHO - 4) * 16)
    # the building-block weights refer to the eigenbasis normalisation
    raw = eigenbasis_ladders(family.kind, P)
    jp, jm, kp, km = raw["Jp"], raw["Jm"], raw["Kp"], raw["Km"]
    J = (
        op_scale_right(anticommutator(kp, jp), P_pp)
        + op_scale_right(anticommutator(kp, jm), P_pm)
        + op_scale_right(anticommutator(km, jp), P_mp)
        + op_scale_right(anticommutator(km, jm), P_mm)
        + op_scale_right(jp, P_0p)
        + op_scale_right(jm, P_0m)
        + op_scale_right(kp, P_p0)
        + op_scale_right(km, P_m0)
        + mult(P_00)
    )
    o["J"] = gauge_conjugate(J, ladder_gauge(family.kind, P))
    if "J0" in o:
        o["J0p"] = (o["J"] * Rat(-1, 8) - o["J0"] - mult(P.E / 2 - P.alpha**2 / 2)) * Rat(1, 2)
    return family


def build_all(kind: "SystemKind | str", params: Params) -> OperatorFamily:
    """Every operator the catalog may reference for this system and parameter set."""
    fam = build_family(kind, params)
    derive_secondary(fam)
    build_K0_J0(fam)
    build_QB(fam)
    if fam.kind is SystemKind.FOUR and params.pq == (1, 1, 1, 1):
        build_euclidean_extras(fam)
    return fam


# ---------------------------------------------------------------------------
# label actions on the generalized eigenbasis

LADDERS = ("Jp", "Jm", "Kp", "Km")


def label_mu(params: Params, lbl: Label) -> Rat:
    return params.k2 * (2 * lbl.m + params.b + params.c + 1)


def label_rho(kind: "SystemKind | str", params: Params, lbl: Label) -> Rat:
    kind = SystemKind.parse(kind)
    if kind is SystemKind.THREE:
        if lbl.rho is None:
            raise ValueError("3-parameter labels carry rho explicitly")
        return as_rat(lbl.rho)
    return 2 * (2 * lbl.p + label_mu(params, lbl) / params.k1 + params.d + 1)


def label_u(kind: "SystemKind | str", params: Params, lbl: Label) -> Rat:
    return 2 * lbl.n + params.k1 * label_rho(kind, params, lbl) + 1


def move_label(kind: "SystemKind | str", params: Params, name: str, lbl: Label) -> Label:
    kind = SystemKind.parse(kind)
    p1, q1, p2, q2 = params.pq
    if kind is SystemKind.THREE:
        rho = label_rho(kind, params, lbl)
        moves = {
            "Jp": (p1, -2 * q1, 0),
            "Jm": (-p1, 2 * q1, 0),
            "Kp": (0, 0, p1 * q2),
            "Km": (0, 0, -p1 * q2),
        }
        dn, drho, dm = moves[name]
        return Label(lbl.n + dn, lbl.m + dm, 0, rho + drho)
    L, N = q1 * p2, p1 * q2
    moves = {
        "Jp": (2 * p1, 0, -q1),
        "Jm": (-2 * p1, 0, q1),
        "Kp": (0, -N, L),
        "Km": (0, N, -L),
    }
    dn, dm, dp = moves[name]
    return Label(lbl.n + dn, lbl.m + dm, lbl.p + dp)


def label_coefficient(kind: "SystemKind | str", params: Params, name: str, u=None) -> RatFunc:
    """Eigenbasis coefficient of a ladder operator as a function of (rho, mu).

    ``u`` defaults to the parameter value; within one energy eigenspace it is
    constant, so the coefficient depends on the label only through (rho, mu).
    """
    kind = SystemKind.parse(kind)
    P = params
    u = P.u if u is None else as_rat(u)
    if u == 0:
        raise SingularLabel("u = 0")
    k1, k2, h, d, b, c = P.k1, P.k2, _half(), P.d, P.b, P.c
    p1, q1, p2, q2 = P.pq
    if kind is SystemKind.THREE:
        N, M = p1 * q2, 2 * p2 * q1
        pre = (4 * P.alpha / u) ** p1
        table = {
            "Jp": lambda: pre * poch(-u / 2 + h, -k1 / 2, 0, p1) * poch(u / 2 + h, -k1 / 2, 0, p1) * poch(h, -h, -1 / k1, q1),
            # the Legendre raising step carries a minus sign per factor
            "Jm": lambda: pre * Rat(-1) ** q1 * poch(h, h, -1 / k1, q1),
            "Kp": lambda: Rat(-2) ** N * poch(-b / 2 - c / 2 + h, 0, 1 / (2 * k2), N) * poch(b / 2 + c / 2 + h, 0, 1 / (2 * k2), N),
            "Km": lambda: Rat(2) ** N * poch(h, -h, -1 / k1, M) * poch(h, h, -1 / k1, M)
            * poch(b / 2 - c / 2 + h, 0, -1 / (2 * k2), N) * poch(-b / 2 + c / 2 + h, 0, -1 / (2 * k2), N),
        }
        return RatFunc(table[name]())
    L, N = q1 * p2, p1 * q2
    q4 = Rat(1, 4)
    pre = Rat(2) ** (4 * p1 + q1) * Rat(-1) ** q1 * (P.alpha / u) ** (2 * p1)
    sgn = Rat(-1) ** L * Rat(2) ** N
    if name == "Jp":
        return RatFunc(pre * poch(d / 2 + h, -q4, -1 / (2 * k1), q1) * poch(-d / 2 + h, -q4, 1 / (2 * k1), q1)
                       * poch(u / 2 + h, -k1 / 2, 0, 2 * p1) * poch(-u / 2 + h, -k1 / 2, 0, 2 * p1))
    if name == "Jm":
        return RatFunc(pre * poch(-d / 2 + h, q4, -1 / (2 * k1), q1) * poch(d / 2 + h, q4, 1 / (2 * k1), q1))
    if name == "Kp":
        return RatFunc(sgn * poch(0, 0, -1 / k1, 2 * L) * poch(-d / 2 + h, q4, -1 / (2 * k1), L)
                       * poch(d / 2 + h, -q4, -1 / (2 * k1), L) * poch(b / 2 - c / 2 + h, 0, -1 / (2 * k2), N)
                       * poch(-b / 2 + c / 2 + h, 0, -1 / (2 * k2), N))
    if name == "Km":
        return RatFunc(sgn * poch(d / 2 + h, q4, 1 / (2 * k1), L) * poch(-d / 2 + h, -q4, 1 / (2 * k1), L)
                       * poch(-b / 2 - c / 2 + h, 0, 1 / (2 * k2), N) * poch(b / 2 + c / 2 + h, 0, 1 / (2 * k2), N),
                       poch(1, 0, 1 / k1, 2 * L))
    raise KeyError(name)


def label_action(kind: "SystemKind | str", params: Params, name: str, lbl: Label) -> tuple[Label, Rat]:
    """Image label and exact coefficient of a ladder operator acting on one basis vector."""
    kind = SystemKind.parse(kind)
    if name not in LADDERS:
        raise KeyError(f"{name!r} is not a ladder operator")
    u = label_u(kind, params, lbl)
    coef = label_coefficient(kind, params, name, u=u)
    rho, mu = label_rho(kind, params, lbl), label_mu(params, lbl)
    try:
        value = coef.evaluate(rho, mu)
    except ZeroDivisionError:
        raise SingularLabel(f"{name} coefficient is singular at {lbl}") from None
    return move_label(kind, params, name, lbl), value


def label_product(kind: "SystemKind | str", params: Params, first: str, second: str) -> RatFunc:
    """Coefficient of ``second`` after ``first`` as a function of the starting (rho, mu)."""
    kind = SystemKind.parse(kind)
    c1 = label_coefficient(kind, params, first)
    c2 = label_coefficient(kind, params, second)
    a, b = _label_step(kind, params, first)
    return c1 * c2.shift(a, b)


def _label_step(kind: SystemKind, params: Params, name: str) -> tuple[Rat, Rat]:
    """How a ladder operator moves (rho, mu) on labels."""
    p1, q1, p2, q2 = params.pq
    a = 2 * q1 if kind is SystemKind.THREE else 4 * q1
    s = 2 * p1 * p2
    if kind is SystemKind.FOUR:
        s = -s
    return {"Jp": (Rat(-a), Rat(0)), "Jm": (Rat(a), Rat(0)), "Kp": (Rat(0), Rat(s)), "Km": (Rat(0), Rat(-s))}[name]


def diagonal_displays(kind: "SystemKind | str", params: Params) -> dict[str, RatFunc]:
    """The four closed-form diagonal products, keyed by operator order.

    ``"JpJm"`` is the eigenvalue of Jp after Jm, and so on.
    """
    kind = SystemKind.parse(kind)
    P = params
    k1, k2, h, d, b, c, u = P.k1, P.k2, _half(), P.d, P.b, P.c, P.u
    p1, q1, p2, q2 = P.pq
    out: dict[str, RatFunc] = {}
    if kind is SystemKind.THREE:
        N, M = p1 * q2, 2 * p2 * q1
        pre = (4 * P.alpha / u) ** (2 * p1)
        out["JmJp"] = RatFunc(pre * poch(h, -h, 1 / k1, q1) * poch(h, -h, -1 / k1, q1)
                              * poch(u / 2 + h, -k1 / 2, 0, p1) * poch(-u / 2 + h, -k1 / 2, 0, p1))
        out["JpJm"] = RatFunc(pre * poch(h, h, 1 / k1, q1) * poch(h, h, -1 / k1, q1)
                              * poch(-u / 2 + h, k1 / 2, 0, p1) * poch(u / 2 + h, k1 / 2, 0, p1))
        mu_part = _prod(poch(sb * b / 2 + sc * c / 2 + h, 0, -1 / (2 * k2), N) for sb in (1, -1) for sc in (1, -1))
        out["KpKm"] = RatFunc(Rat(-4) ** N * mu_part * poch(h, -h, -1 / k1, M) * poch(h, h, -1 / k1, M))
        out["KmKp"] = RatFunc(Rat(-4) ** N * mu_part.reflect("mu") * poch(h, h, 1 / k1, M) * poch(h, -h, 1 / k1, M))
        return out
    L, N = q1 * p2, p1 * q2
    q4 = Rat(1, 4)
    pre = Rat(4) ** (4 * p1 + q1) * P.E ** (2 * p1)
    rho_part = _prod(poch(sd * d / 2 + h, q4 * sr, sm / (2 * k1), q1)
                     for sr, sm, sd in ((1, -1, -1), (1, 1, 1), (1, 1, -1), (1, -1, 1)))
    out["JpJm"] = RatFunc(pre * rho_part * poch(-u / 2 + h, k1 / 2, 0, 2 * p1) * poch(u / 2 + h, k1 / 2, 0, 2 * p1))
    out["JmJp"] = out["JpJm"].reflect("rho")
    k_rho = _prod(poch(sd * d / 2 + h, q4 * sr, 1 / (2 * k1), L) for sr, sd in ((1, 1), (1, -1), (-1, -1), (-1, 1)))
    k_mu = _prod(poch(sb * b / 2 + sc * c / 2 + h, 0, 1 / (2 * k2), N) for sb in (1, -1) for sc in (1, -1))
    out["KpKm"] = RatFunc(Rat(2) ** (2 * N) * k_rho * k_mu)
    out["KmKp"] = out["KpKm"].reflect("mu")
    return out


# ---------------------------------------------------------------------------
# degeneracy lattice


def degenerate_multiplet(kind: "SystemKind | str", params: Params, seed: Label, bound: int,
                         moves: "tuple[str, ...] | None" = None) -> set[Label]:
    """Closure of ``seed`` under the energy-preserving moves, inside a box.

    Every label component must stay within ``bound`` in absolute value.  The
    moves default to all four ladder moves (each ladder's inverse is the
    partner ladder, so the closure is symmetric).
    """
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    kind = SystemKind.parse(kind)
    moves = LADDERS if moves is None else tuple(moves)

    def inside(lbl: Label) -> bool:
        comps = [lbl.n, lbl.m, lbl.p]
        return all(abs(x) <= bound for x in comps)

    seen = {seed}
    stack = [seed]
    while stack:
        cur = stack.pop()
        for mv in moves:
            nxt = move_label(kind, params, mv, cur)
            if nxt not in seen and inside(nxt):
                seen.add(nxt)
                stack.append(nxt)
    return seen


# ---------------------------------------------------------------------------
# serialization


def poly_to_list(p: Poly2) -> list[list[str]]:
    return [[str(i), str(j), rat_str(c)] for (i, j), c in sorted(p.terms.items())]


def ratfunc_to_dict(f: RatFunc) -> dict:
    return {"num": poly_to_list(f.num), "den": poly_to_list(f.den)}


def op_to_list(A: ShiftOp) -> list[dict]:
    return [{"shift": [rat_str(s.a), rat_str(s.b)], "coeff": ratfunc_to_dict(c)} for s, c in sorted(A.terms.items())]


def family_to_dict(family: OperatorFamily) -> dict:
    return {
        "schema": 1,
        "kind": family.kind.value,
        "params": family.params.as_dict(),
        "notes": dict(sorted(family.notes.items())),
        "operators": [{"name": n, "terms": op_to_list(family.ops[n])} for n in family.ops],
    }
