"""Identity catalog, exact suite runner and structure-constant fitter.

Catalog rows are plain text (see ``data/catalog.txt``).  Each row holds an
equation ``lhs = rhs`` written in a small operator language:

    sums and differences      A + B, A - B, -A
    composition               A * B   (B acts first)
    powers                    A^3
    division by constants     A / 3, (p1*q2)/2
    commutator                [A, B]
    anticommutator            {A, B}
    symmetrized triple        {A, B, C}   (all six orderings)

Names resolve to family operators (H, L2, J1, ...), to the multiplication
operators ``rho`` and ``mu``, or to the constants p1, q1, p2, q2, k1, k2,
alpha, b, c, d, u, beta, gamma, delta, E.  Several equations may share a row,
separated by ``;``.
"""

from __future__ import annotations

import random
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .models import (
    OperatorFamily,
    Params,
    SystemKind,
    build_all,
    diagonal_displays,
    label_product,
    mult,
    op_to_list,
    rat_str,
)
from .opalg import (
    MU,
    RHO,
    Poly2,
    Rat,
    RatFunc,
    ShiftOp,
    anticommutator,
    commutator,
    is_scalar,
    op_apply,
    op_compose,
    op_linear_combination,
    op_scale_left,
    op_scale_right,
    poly_divexact,
    poly_gcd,
)


class CatalogError(ValueError):
    """Malformed catalog row or unresolvable operator name."""


# ---------------------------------------------------------------------------
# expression language

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        if m.group(1):
            out.append(("num", m.group(1)))
        elif m.group(2):
            out.append(("name", m.group(2)))
        elif m.group(3) and not m.group(3).isspace():
            out.append(("op", m.group(3)))
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str]:
        return self.toks[self.i]

    def take(self, want: str | None = None) -> tuple[str, str]:
        tok = self.toks[self.i]
        if want is not None and tok[1] != want:
            raise CatalogError(f"expected {want!r} but found {tok[1]!r} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise CatalogError(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return node

    def expr(self):
        if self.peek() == ("op", "-"):
            self.take()
            node = ("neg", self.term())
        else:
            node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = ("mul" if op == "*" else "div", node, self.power())
        return node

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise CatalogError(f"exponent must be a literal integer in {self.text!r}")
            node = ("pow", node, int(val))
        return node

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", Rat(int(val)))
        if kind == "name":
            return ("name", val)
        if val == "-":
            return ("neg", self.power())
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        if val == "[":
            a = self.expr()
            self.take(",")
            b = self.expr()
            self.take("]")
            return ("comm", a, b)
        if val == "{":
            items = [self.expr()]
            while self.peek() == ("op", ","):
                self.take()
                items.append(self.expr())
            self.take("}")
            if len(items) == 2:
                return ("acomm", *items)
            if len(items) == 3:
                return ("sym3", *items)
            raise CatalogError(f"braces take two or three entries in {self.text!r}")
        raise CatalogError(f"unexpected {val!r} in {self.text!r}")


def parse_expr(text: str):
    return _Parser(text).parse()


CONSTANT_NAMES = ("p1", "q1", "p2", "q2", "k1", "k2", "alpha", "b", "c", "d", "u", "beta", "gamma", "delta", "E")


def _constants(params: Params) -> dict[str, Rat]:
    return {
        "p1": Rat(params.p1), "q1": Rat(params.q1), "p2": Rat(params.p2), "q2": Rat(params.q2),
        "k1": params.k1, "k2": params.k2, "alpha": params.alpha, "b": params.b, "c": params.c,
        "d": params.d, "u": params.u, "beta": params.beta, "gamma": params.gamma,
        "delta": params.delta, "E": params.E,
    }


class Evaluator:
    """Evaluates parsed expressions against one family; caches named products."""

    def __init__(self, family: OperatorFamily):
        self.family = family
        self.consts = _constants(family.params)
        self.cache: dict = {}

    def names_in(self, node) -> set[str]:
        if node[0] == "name":
            return {node[1]}
        out: set[str] = set()
        for child in node[1:]:
            if isinstance(child, tuple):
                out |= self.names_in(child)
        return out

    def missing(self, node) -> list[str]:
        return sorted(n for n in self.names_in(node)
                      if n not in self.consts and n not in ("rho", "mu") and n not in self.family)

    def value(self, node):
        """A Rat for constant subexpressions, otherwise a ShiftOp."""
        try:
            return self.cache[node]
        except (KeyError, TypeError):
            pass
        out = self._value(node)
        try:
            self.cache[node] = out
        except TypeError:
            pass
        return out

    def op(self, node) -> ShiftOp:
        v = self.value(node)
        return v if isinstance(v, ShiftOp) else mult(v)

    def _value(self, node):
        tag = node[0]
        if tag == "num":
            return node[1]
        if tag == "name":
            name = node[1]
            if name in self.consts:
                return self.consts[name]
            if name == "rho":
                return mult(RHO)
            if name == "mu":
                return mult(MU)
            return self.family[name]
        if tag == "neg":
            v = self.value(node[1])
            return -v
        if tag in ("add", "sub"):
            a, b = self.value(node[1]), self.value(node[2])
            if not isinstance(a, ShiftOp) and not isinstance(b, ShiftOp):
                return a + b if tag == "add" else a - b
            a, b = _op(a), _op(b)
            return a + b if tag == "add" else a - b
        if tag == "mul":
            a, b = self.value(node[1]), self.value(node[2])
            if isinstance(a, ShiftOp) and isinstance(b, ShiftOp):
                return op_compose(a, b)
            if isinstance(a, ShiftOp):
                return a * b
            if isinstance(b, ShiftOp):
                return op_scale_left(a, b)
            return a * b
        if tag == "div":
            a, b = self.value(node[1]), self.value(node[2])
            if isinstance(b, ShiftOp):
                raise CatalogError("division is only defined by constant expressions")
            if b == 0:
                raise CatalogError("division by a vanishing constant")
            return a * (1 / b) if isinstance(a, ShiftOp) else a / b
        if tag == "pow":
            a = self.value(node[1])
            return a ** node[2]
        if tag == "comm":
            return commutator(self.op(node[1]), self.op(node[2]))
        if tag == "acomm":
            return anticommutator(self.op(node[1]), self.op(node[2]))
        if tag == "sym3":
            A, B, C = (self.op(n) for n in node[1:])
            ab, ba = op_compose(A, B), op_compose(B, A)
            ac, ca = op_compose(A, C), op_compose(C, A)
            bc, cb = op_compose(B, C), op_compose(C, B)
            parts = [op_compose(ab, C), op_compose(ac, B), op_compose(ba, C),
                     op_compose(bc, A), op_compose(ca, B), op_compose(cb, A)]
            return op_linear_combination((1, p) for p in parts)
        raise CatalogError(f"unknown node {tag!r}")


def _op(v) -> ShiftOp:
    return v if isinstance(v, ShiftOp) else mult(v)


def split_terms(node) -> list[tuple[int, object]]:
    """Top-level signed summands of an expression."""
    tag = node[0]
    if tag == "add":
        return split_terms(node[1]) + split_terms(node[2])
    if tag == "sub":
        return split_terms(node[1]) + [(-s, t) for s, t in split_terms(node[2])]
    if tag == "neg":
        return [(-s, t) for s, t in split_terms(node[1])]
    return [(1, node)]


def _factors(node) -> list:
    if node[0] == "mul":
        return _factors(node[1]) + _factors(node[2])
    if node[0] == "neg":
        return [("num", Rat(-1))] + _factors(node[1])
    return [node]


def basis_of(ev: Evaluator, node) -> list[tuple[str, ShiftOp]]:
    """Operator parts of the summands of ``node`` with constant factors stripped.

    Summands that share an operator part are merged so the basis stays free of
    repeats.
    """
    out: dict[str, ShiftOp] = {}
    for _, term in split_terms(node):
        ops = []
        for f in _factors(term):
            if f[0] == "div":
                inner = f[1]
                if not isinstance(ev.value(inner), ShiftOp):
                    continue
                ops.append(inner)
            elif isinstance(ev.value(f), ShiftOp):
                ops.append(f)
        if not ops:
            key, op = "1", ShiftOp.identity()
        else:
            key = " * ".join(unparse(o) for o in ops)
            op = ev.op(ops[0])
            for o in ops[1:]:
                op = op_compose(op, ev.op(o))
        out.setdefault(key, op)
    return list(out.items())


def unparse(node) -> str:
    tag = node[0]
    if tag == "num":
        return rat_str(node[1]).removesuffix("/1")
    if tag == "name":
        return node[1]
    if tag == "neg":
        return "-" + unparse(node[1])
    if tag in ("add", "sub"):
        return f"({unparse(node[1])} {'+' if tag == 'add' else '-'} {unparse(node[2])})"
    if tag in ("mul", "div"):
        return f"{unparse(node[1])}{'*' if tag == 'mul' else '/'}{unparse(node[2])}"
    if tag == "pow":
        return f"{unparse(node[1])}^{node[2]}"
    if tag == "comm":
        return f"[{unparse(node[1])},{unparse(node[2])}]"
    return "{" + ",".join(unparse(n) for n in node[1:]) + "}"


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class Identity:
    id: str
    system: str
    expr: str
    anchor: str = ""
    requires: tuple[str, ...] = ()
    kind: str = "identity"
    domain: str = "constants"
    basis: tuple[str, ...] = ()
    note: str = ""

    def equations(self) -> list[tuple[str, str]]:
        out = []
        for eq in self.expr.split(";"):
            if "=" not in eq:
                raise CatalogError(f"{self.id}: equation without '=': {eq!r}")
            lhs, rhs = eq.split("=", 1)
            out.append((lhs.strip(), rhs.strip()))
        return out

    def applies_to(self, kind: SystemKind, params: Params) -> bool:
        if self.system == "eu":
            return kind is SystemKind.FOUR
        return self.system == kind.value


_FIELDS = {"id", "system", "expr", "anchor", "requires", "kind", "domain", "basis", "note"}


def parse_catalog(text: str) -> list[Identity]:
    """Blocks of ``key: value`` lines separated by blank lines; ``#`` starts a comment."""
    rows: list[Identity] = []
    block: dict[str, str] = {}

    def flush():
        if not block:
            return
        if "id" not in block or "expr" not in block or "system" not in block:
            raise CatalogError(f"catalog block missing id/system/expr: {block}")
        rows.append(Identity(
            id=block["id"], system=block["system"], expr=block["expr"], anchor=block.get("anchor", ""),
            requires=tuple(r.strip() for r in block.get("requires", "").split(",") if r.strip()),
            kind=block.get("kind", "identity"), domain=block.get("domain", "constants"),
            basis=tuple(b.strip() for b in block.get("basis", "").split(";") if b.strip()),
            note=block.get("note", ""),
        ))
        block.clear()

    last = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            flush()
            last = None
            continue
        if raw[:1].isspace() and last is not None:
            block[last] += " " + line.strip()
            continue
        key, sep, val = line.partition(":")
        key = key.strip()
        if not sep or key not in _FIELDS:
            raise CatalogError(f"bad catalog line {raw!r}")
        block[key] = val.strip()
        last = key
    flush()
    ids = [r.id for r in rows]
    if len(set(ids)) != len(ids):
        raise CatalogError("duplicate catalog ids")
    return rows


def load_catalog(path: "str | Path | None" = None) -> list[Identity]:
    if path is None:
        text = resources.files("kcsym").joinpath("data/catalog.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_catalog(text)


def check_requirement(req: str, params: Params) -> bool:
    """``X odd`` / ``X even`` with X a product of p1, q1, p2, q2; or ``euclidean``."""
    req = req.strip()
    if req == "euclidean":
        return params.pq == (1, 1, 1, 1)
    m = re.fullmatch(r"([a-z0-9*]+)\s+(odd|even)", req)
    if not m:
        raise CatalogError(f"unknown precondition {req!r}")
    val = 1
    env = {"p1": params.p1, "q1": params.q1, "p2": params.p2, "q2": params.q2}
    for f in m.group(1).split("*"):
        if f not in env:
            raise CatalogError(f"unknown precondition factor {f!r}")
        val *= env[f]
    return (val % 2 == 1) == (m.group(2) == "odd")


# ---------------------------------------------------------------------------
# fitter


@dataclass
class FitResult:
    basis: list[str]
    coefficients: list  # Rat (constants) or RatFunc (even-rational)
    residual: ShiftOp
    domain: str
    side: str = "right"
    rank: int = 0

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()

    def as_dict(self) -> dict:
        coeffs = []
        for c in self.coefficients:
            if isinstance(c, RatFunc):
                coeffs.append(f"({c.num})/({c.den})" if not c.den.is_const() else str(c.num))
            else:
                coeffs.append(rat_str(c))
        return {"domain": self.domain, "side": self.side, "basis": list(self.basis), "coefficients": coeffs,
                "rank": self.rank, "solved": self.ok, "residual_terms": len(self.residual.terms)}


def _solve_linear(rows: list[list], rhs: list, is_zero: Callable, one) -> "tuple[list, int] | None":
    """Exact Gauss-Jordan elimination over a field; free unknowns set to zero.

    Returns (solution, rank) or None when the system is inconsistent.
    """
    n = len(rows[0]) if rows else 0
    mat = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        best = None
        for i in range(r, len(mat)):
            if not is_zero(mat[i][col]):
                cost = _cost(mat[i][col])
                if best is None or cost < best[0]:
                    best = (cost, i)
        if best is None:
            continue
        i = best[1]
        mat[r], mat[i] = mat[i], mat[r]
        inv = one / mat[r][col]
        mat[r] = [x * inv for x in mat[r]]
        for j in range(len(mat)):
            if j != r and not is_zero(mat[j][col]):
                f = mat[j][col]
                mat[j] = [a - f * b for a, b in zip(mat[j], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    for j in range(r, len(mat)):
        if not is_zero(mat[j][n]):
            return None
    sol = [one * 0 for _ in range(n)]
    for k, col in enumerate(pivots):
        sol[col] = mat[k][n]
    return sol, len(pivots)


def _cost(x) -> int:
    if isinstance(x, RatFunc):
        return x.num.degree() + x.den.degree() + len(x.num.terms) + len(x.den.terms)
    return 0


def _poly_lcm(a: Poly2, b: Poly2) -> Poly2:
    g = poly_gcd(a, b)
    return poly_divexact(a, g) * b


def _fit_constants(target: ShiftOp, basis: Sequence[ShiftOp]) -> "tuple[list[Rat], int] | None":
    shifts = sorted(set(target.terms).union(*(set(b.terms) for b in basis)))
    rows: list[list[Rat]] = []
    rhs: list[Rat] = []
    zero = RatFunc.const(0)
    for s in shifts:
        entries = [b.terms.get(s, zero) for b in basis]
        t = target.terms.get(s, zero)
        den = Poly2.const(1)
        for e in entries + [t]:
            if not e.den.is_const():
                den = _poly_lcm(den, e.den)
        nums = [(e * RatFunc(den)).num for e in entries]
        tn = (t * RatFunc(den)).num
        monos = sorted(set(tn.terms).union(*(set(p.terms) for p in nums)))
        for mono in monos:
            rows.append([p.terms.get(mono, Rat(0)) for p in nums])
            rhs.append(tn.terms.get(mono, Rat(0)))
    if not rows:
        return [Rat(0)] * len(basis), 0
    return _solve_linear(rows, rhs, lambda x: x == 0, Rat(1))


def _parity_parts(f: RatFunc) -> list[RatFunc]:
    """Even parts (ee, oe/rho, eo/mu, oo/(rho mu)) of f, squashed to (rho^2, mu^2)."""
    fr, fm = f.reflect("rho"), f.reflect("mu")
    frm = fr.reflect("mu")
    q = Rat(1, 4)
    ee = (f + fr + fm + frm) * q
    oe = (f - fr + fm - frm) * RatFunc(Poly2.const(q), RHO)
    eo = (f + fr - fm - frm) * RatFunc(Poly2.const(q), MU)
    oo = (f - fr - fm + frm) * RatFunc(Poly2.const(q), RHO * MU)
    return [p.squash_even() for p in (ee, oe, eo, oo)]


def _fit_even(target: ShiftOp, basis: Sequence[ShiftOp], side: str) -> "tuple[list[RatFunc], int] | None":
    shifts = sorted(set(target.terms).union(*(set(b.terms) for b in basis)))
    rows: list[list[RatFunc]] = []
    rhs: list[RatFunc] = []
    zero = RatFunc.const(0)
    for s in shifts:
        entries = [b.terms.get(s, zero) for b in basis]
        t = target.terms.get(s, zero)
        if side == "right":
            # B o lam has coefficient c(rho, mu) lam(rho + a, mu + b); move the shift onto c
            entries = [e.shift(-s.a, -s.b) for e in entries]
            t = t.shift(-s.a, -s.b)
        parts = [_parity_parts(e) for e in entries]
        tparts = _parity_parts(t)
        for k in range(4):
            row = [p[k] for p in parts]
            if all(x.is_zero() for x in row) and tparts[k].is_zero():
                continue
            rows.append(row)
            rhs.append(tparts[k])
    if not rows:
        return [RatFunc.const(0)] * len(basis), 0
    res = _solve_linear(rows, rhs, lambda x: x.is_zero(), RatFunc.const(1))
    if res is None:
        return None
    sol, rank = res
    return [x.expand_even() for x in sol], rank


def fit(target: ShiftOp, basis: Sequence[ShiftOp], domain: str = "constants",
        names: Sequence[str] | None = None) -> FitResult:
    """Solve target = sum of lambda_i basis_i exactly.

    ``domain`` is ``constants`` (rational numbers), ``even-right`` (rational
    functions even in rho and mu, applied before the basis operator) or
    ``even-left`` (applied after it).  A missing solution is reported through a
    nonzero residual, never raised.
    """
    if not basis:
        raise ValueError("fit needs a nonempty basis")
    names = list(names) if names is not None else [f"B{i}" for i in range(len(basis))]
    if domain == "constants":
        res = _fit_constants(target, basis)
        side = "left"
    elif domain in ("even-right", "even-left"):
        side = domain.split("-")[1]
        res = _fit_even(target, basis, side)
    else:
        raise ValueError(f"unknown fit domain {domain!r}")
    if res is None:
        zero = Rat(0) if domain == "constants" else RatFunc.const(0)
        return FitResult(names, [zero] * len(basis), target, domain, side, 0)
    coeffs, rank = res
    if domain == "constants" or side == "left":
        approx = op_linear_combination(zip(coeffs, basis))
    else:
        approx = ShiftOp.zero()
        for c, b in zip(coeffs, basis):
            approx = approx + op_scale_right(b, c)
    return FitResult(names, coeffs, target - approx, domain, side, rank)


# ---------------------------------------------------------------------------
# reports


PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"


@dataclass
class Report:
    id: str
    status: str
    residual: ShiftOp = field(default_factory=ShiftOp.zero)
    seconds: float = 0.0
    fits: list[FitResult] = field(default_factory=list)
    note: str = ""

    @property
    def fitted(self) -> bool:
        return bool(self.fits) and all(f.ok for f in self.fits)

    def as_dict(self, timing: bool = False) -> dict:
        out = {"id": self.id, "status": self.status, "note": self.note,
               "residual": op_to_list(self.residual), "fits": [f.as_dict() for f in self.fits]}
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


def check_identity(family: OperatorFamily, identity: Identity, auto_fit: bool = True,
                   evaluator: Evaluator | None = None) -> Report:
    """Evaluate lhs - rhs for every equation of a row; PASS iff all vanish exactly."""
    t0 = time.perf_counter()
    ev = evaluator or Evaluator(family)
    eqs = [(parse_expr(l), parse_expr(r)) for l, r in identity.equations()]
    missing = sorted({n for l, r in eqs for n in ev.missing(l) + ev.missing(r)})
    for b in identity.basis:
        missing += ev.missing(parse_expr(b))
    if missing:
        raise CatalogError(f"{identity.id}: unresolvable names {sorted(set(missing))}")
    if identity.kind == "closure":
        return _check_closure(ev, identity, eqs, t0)
    residual = ShiftOp.zero()
    fits: list[FitResult] = []
    for lhs, rhs in eqs:
        r = ev.op(lhs) - ev.op(rhs)
        if r.is_zero():
            continue
        residual = residual + r
        if auto_fit:
            basis = [(unparse(parse_expr(b)), ev.op(parse_expr(b))) for b in identity.basis] or basis_of(ev, rhs)
            basis = [(n, b) for n, b in basis if not b.is_zero()]
            if basis:
                fits.append(fit(ev.op(lhs), [b for _, b in basis], identity.domain, [n for n, _ in basis]))
    status = PASS if residual.is_zero() else FAIL
    return Report(identity.id, status, residual, time.perf_counter() - t0, fits)


def _check_closure(ev: Evaluator, identity: Identity, eqs, t0: float) -> Report:
    """Rows whose right side is unknown: the fitter must represent the target."""
    if not identity.basis:
        raise CatalogError(f"{identity.id}: closure rows need a basis")
    basis = [(unparse(parse_expr(b)), ev.op(parse_expr(b))) for b in identity.basis]
    fits = []
    residual = ShiftOp.zero()
    for lhs, _ in eqs:
        fr = fit(ev.op(lhs), [b for _, b in basis], identity.domain, [n for n, _ in basis])
        fits.append(fr)
        residual = residual + fr.residual
    status = PASS if residual.is_zero() else FAIL
    return Report(identity.id, status, residual, time.perf_counter() - t0, fits, "closure solved by the fitter")


def run_suite(kind: "SystemKind | str", params: Params, selection: Iterable[str] | None = None,
              catalog: Sequence[Identity] | None = None, family: OperatorFamily | None = None,
              auto_fit: bool = True) -> list[Report]:
    """Check catalog rows in catalog order.

    ``selection`` restricts to the listed ids (an empty selection yields no
    reports).  Rows for the other system are omitted; rows whose parity
    preconditions fail, or which reference operators the family could not
    build, are reported as SKIPPED with the reason.
    """
    kind = SystemKind.parse(kind)
    catalog = load_catalog() if catalog is None else list(catalog)
    if selection is not None:
        wanted = set(selection)
        unknown = wanted - {r.id for r in catalog}
        if unknown:
            raise CatalogError(f"unknown catalog ids {sorted(unknown)}")
        catalog = [r for r in catalog if r.id in wanted]
    catalog = [r for r in catalog if r.applies_to(kind, params)]
    if not catalog:
        return []
    family = family or build_all(kind, params)
    ev = Evaluator(family)
    out = []
    for row in catalog:
        failed = [r for r in row.requires if not check_requirement(r, params)]
        if failed:
            out.append(Report(row.id, SKIPPED, note="precondition: " + ", ".join(failed)))
            continue
        names = set()
        for l, r in row.equations():
            names |= ev.names_in(parse_expr(l)) | ev.names_in(parse_expr(r))
        absent = sorted(n for n in names if n not in ev.consts and n not in ("rho", "mu") and n not in family)
        if absent:
            why = "; ".join(family.notes.get(n, f"{n} not built") for n in absent)
            out.append(Report(row.id, SKIPPED, note=why))
            continue
        out.append(check_identity(family, row, auto_fit=auto_fit, evaluator=ev))
    return out


def summarize(reports: Sequence[Report]) -> dict[str, int]:
    out = {PASS: 0, FAIL: 0, SKIPPED: 0, "FAIL_FITTED": 0}
    for r in reports:
        out[r.status] += 1
        if r.status == FAIL and r.fitted:
            out["FAIL_FITTED"] += 1
    return out


def suite_healthy(reports: Sequence[Report]) -> bool:
    return all(r.status != FAIL or r.fitted for r in reports)


def format_table(reports: Sequence[Report]) -> str:
    rows = [("id", "status", "residual", "fit", "note")]
    for r in reports:
        fit_txt = ""
        if r.fits:
            fit_txt = "; ".join(
                ", ".join(f"{n}: {_short(c)}" for n, c in zip(f.basis, f.coefficients)) if f.ok else "no fit"
                for f in r.fits
            )
        res = "0" if r.residual.is_zero() else f"{len(r.residual.terms)} shift(s)"
        rows.append((r.id, r.status, res, fit_txt, r.note))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(4)) + ("  " + row[4] if row[4] else ""))
    s = summarize(reports)
    lines.append(f"{s[PASS]} passed, {s[FAIL]} failed ({s['FAIL_FITTED']} with fit), {s[SKIPPED]} skipped")
    return "\n".join(l.rstrip() for l in lines)


def _short(c) -> str:
    if isinstance(c, RatFunc):
        if c.is_const():
            return rat_str(c.const_value()).removesuffix("/1")
        return "rational"
    return rat_str(c).removesuffix("/1")


# ---------------------------------------------------------------------------
# diagnostics


def cross_check_diagonal(kind: "SystemKind | str", params: Params,
                         family: OperatorFamily | None = None) -> Report:
    """Compare shift-representation diagonal products with the closed forms.

    Checks the gauge-invariant sums JpJm + JmJp and KpKm + KmKp against the
    display sums, and each single product against the eigenbasis product of
    the label-action coefficients.  The note lists every mismatch and the
    sign relating the two sides when it is a pure sign.
    """
    kind = SystemKind.parse(kind)
    t0 = time.perf_counter()
    family = family or build_all(kind, params)
    o = family.ops
    disp = diagonal_displays(kind, params)
    shift = {k: is_scalar(op_compose(o[k[:2]], o[k[2:]])) for k in ("JpJm", "JmJp", "KpKm", "KmKp")}
    label = {k: label_product(kind, params, k[2:], k[:2]) for k in shift}
    problems = []
    residual = ShiftOp.zero()
    for pair in (("JpJm", "JmJp"), ("KpKm", "KmKp")):
        lhs = shift[pair[0]] + shift[pair[1]]
        rhs = disp[pair[0]] + disp[pair[1]]
        if lhs != rhs:
            residual = residual + mult(lhs - rhs)
            problems.append(f"{pair[0]}+{pair[1]} vs display sum: {_relation(lhs, rhs)}")
    for k in shift:
        if shift[k] != label[k]:
            problems.append(f"{k} vs label product: {_relation(shift[k], label[k])}")
        if label[k] != disp[k]:
            problems.append(f"label {k} vs display: {_relation(label[k], disp[k])}")
    status = PASS if residual.is_zero() else FAIL
    return Report("diagonal", status, residual, time.perf_counter() - t0, note="; ".join(problems))


def _relation(a: RatFunc, b: RatFunc) -> str:
    if a == -b:
        return "opposite sign"
    return "differ"


def spot_check(family: OperatorFamily, identity: Identity, n: int = 50, rng: random.Random | None = None,
               max_degree: int = 2) -> bool:
    """Apply both sides of every equation to ``n`` random rational functions."""
    rng = rng or random.Random(0)
    ev = Evaluator(family)
    pairs = [(ev.op(parse_expr(l)), ev.op(parse_expr(r))) for l, r in identity.equations()]
    for _ in range(n):
        f = _random_ratfunc(rng, max_degree)
        for A, B in pairs:
            if op_apply(A, f) != op_apply(B, f):
                return False
    return True


def _random_ratfunc(rng: random.Random, deg: int) -> RatFunc:
    def poly():
        terms = {}
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                if rng.random() < 0.6:
                    terms[(i, j)] = Rat(rng.randint(-5, 5), rng.randint(1, 4))
        return Poly2(terms)

    num = poly()
    den = poly()
    while den.is_zero():
        den = poly()
    return RatFunc(num, den)


def adjoint_diagnostic(family: OperatorFamily) -> dict[str, bool]:
    """Formal-transpose bookkeeping for the ladder operators (no inner product is assumed).

    For each ladder X with partner Y and shift a along its variable v, reports
    whether transpose(X) equals Y o (1 + a/v) exactly.
    """
    from .opalg import formal_transpose

    o = family.ops
    out = {}
    for x, y, var in (("Jp", "Jm", RHO), ("Jm", "Jp", RHO), ("Kp", "Km", MU), ("Km", "Kp", MU)):
        (s, _), = o[x].terms.items()
        a = s.a if var is RHO else s.b
        weight = RatFunc(var + a, var)
        out[x] = formal_transpose(o[x]) == op_scale_right(o[y], weight)
    return out


def q_cross_relations(family: OperatorFamily) -> dict[str, "bool | None"]:
    """Fit [J_h, K_l] over the four anticommutators and test the stated coincidences.

    Returns a map from relation text to its truth value (None when a fit is
    missing).  The coefficients are taken on the right of the anticommutators.
    """
    o = family.ops
    anti = [anticommutator(o["J1"], o["K1"]), anticommutator(o["J1"], o["K2"]),
            anticommutator(o["J2"], o["K1"]), anticommutator(o["J2"], o["K2"])]
    Qc: dict[tuple[int, int], list[RatFunc] | None] = {}
    for h in (1, 2):
        for l in (1, 2):
            fr = fit(commutator(o[f"J{h}"], o[f"K{l}"]), anti, "even-right")
            Qc[(h, l)] = fr.coefficients if fr.ok else None
    idx = {"11": 0, "12": 1, "21": 2, "22": 3}

    def q(hl: str, jk: str) -> RatFunc | None:
        c = Qc[(int(hl[0]), int(hl[1]))]
        return None if c is None else c[idx[jk]]

    rho2, mu2 = RatFunc(RHO * RHO), RatFunc(MU * MU)
    one = RatFunc.const(1)
    # each relation reads a == b * factor
    rels = {
        "Q11_11 = Q22_22": ("11", "11", "22", "22", one),
        "Q11_12 = Q22_21 / mu^2": ("11", "12", "22", "21", one / mu2),
        "Q11_21 = Q22_12 / rho^2": ("11", "21", "22", "12", one / rho2),
        "Q11_22 = Q22_11 / (mu^2 rho^2)": ("11", "22", "22", "11", one / (mu2 * rho2)),
        "Q12_11 = Q22_21": ("12", "11", "22", "21", one),
        "Q12_12 = Q11_11": ("12", "12", "11", "11", one),
        "Q21_21 = Q11_11": ("21", "21", "11", "11", one),
        "Q21_11 = Q22_12": ("21", "11", "22", "12", one),
        "Q12_21 = mu^2 Q11_22": ("12", "21", "11", "22", mu2),
        "Q12_22 = Q22_12 / rho^2": ("12", "22", "22", "12", one / rho2),
        "Q21_12 = Q22_11 / mu^2": ("21", "12", "22", "11", one / mu2),
        "Q21_22 = Q22_21 / mu^2": ("21", "22", "22", "21", one / mu2),
    }
    out: dict[str, bool | None] = {}
    for text, (h1, j1, h2, j2, factor) in rels.items():
        a, b = q(h1, j1), q(h2, j2)
        out[text] = None if a is None or b is None else a == b * factor
    return out


def euclidean_q_comparison(family: OperatorFamily) -> dict:
    """Ratio of the general-k Q to the Euclidean one; recorded, not asserted."""
    q, qe = is_scalar(family["Q"]), is_scalar(family["Qeu"])
    if q is None or qe is None:
        return {"comparable": False}
    r = q / qe
    return {"comparable": True, "proportional": r.is_const(), "ratio_num": str(r.num), "ratio_den": str(r.den)}
