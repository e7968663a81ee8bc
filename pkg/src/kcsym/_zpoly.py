"""Dense integer polynomial helpers used by the bivariate gcd.

A univariate polynomial is a list of ints, lowest power first, with no
trailing zeros (the zero polynomial is ``[]``).  A bivariate polynomial in
(x, y) is a list indexed by the power of x whose entries are univariate
polynomials in y.  Everything here is exact integer arithmetic.
"""

from __future__ import annotations

from math import gcd, isqrt

HEU_TRIES = 6

# ---------------------------------------------------------------------------
# univariate


def u_trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def u_add(f: list[int], g: list[int]) -> list[int]:
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] += c
    return u_trim(out)


def u_sub(f: list[int], g: list[int]) -> list[int]:
    out = list(f) + [0] * max(0, len(g) - len(f))
    for i, c in enumerate(g):
        out[i] -= c
    return u_trim(out)


def u_mul(f: list[int], g: list[int]) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def u_scale(f: list[int], c: int) -> list[int]:
    if c == 0:
        return []
    return [a * c for a in f]


def u_content(f: list[int]) -> int:
    g = 0
    for a in f:
        g = gcd(g, a)
        if g == 1:
            break
    return g


def u_primitive(f: list[int]) -> tuple[int, list[int]]:
    if not f:
        return 0, []
    c = u_content(f)
    if f[-1] < 0:
        c = -c
    return c, [a // c for a in f]


def u_eval(f: list[int], x: int) -> int:
    acc = 0
    for a in reversed(f):
        acc = acc * x + a
    return acc


def u_divexact(f: list[int], g: list[int]) -> list[int] | None:
    """Return f/g if g divides f exactly in Z[y], else None."""
    if not g:
        raise ZeroDivisionError("division by zero polynomial")
    if not f:
        return []
    df, dg = len(f) - 1, len(g) - 1
    if df < dg:
        return None
    r = list(f)
    lc = g[-1]
    q = [0] * (df - dg + 1)
    for k in range(df - dg, -1, -1):
        c = r[k + dg]
        if c == 0:
            continue
        qc, rem = divmod(c, lc)
        if rem:
            return None
        q[k] = qc
        for j, b in enumerate(g):
            r[k + j] -= qc * b
    if any(r[:dg]):
        return None
    return u_trim(q)


def u_prem(f: list[int], g: list[int]) -> list[int]:
    """Pseudo-remainder of f by g."""
    df, dg = len(f) - 1, len(g) - 1
    r = list(f)
    lc = g[-1]
    e = df - dg + 1
    while r and len(r) - 1 >= dg:
        dr = len(r) - 1
        c = r[-1]
        r = [a * lc for a in r]
        for j, b in enumerate(g):
            r[dr - dg + j] -= c * b
        u_trim(r)
        e -= 1
    if e > 0:
        r = [a * lc**e for a in r]
    return r


def u_gcd_prs(f: list[int], g: list[int]) -> list[int]:
    """Primitive gcd in Z[y] through a primitive remainder sequence."""
    if not f:
        return u_primitive(g)[1]
    if not g:
        return u_primitive(f)[1]
    cf, f = u_primitive(f)
    cg, g = u_primitive(g)
    if len(f) < len(g):
        f, g = g, f
    while g:
        r = u_prem(f, g)
        f, g = g, (u_primitive(r)[1] if r else [])
    return f


def _sym_mod(a: int, x: int) -> int:
    r = a % x
    if r > x // 2:
        r -= x
    return r


def _u_interpolate(h: int, x: int) -> list[int]:
    out = []
    while h:
        g = _sym_mod(h, x)
        out.append(g)
        h = (h - g) // x
    return out


def u_gcd(f: list[int], g: list[int]) -> list[int]:
    """Primitive gcd in Z[y] with positive leading coefficient.

    Heuristic evaluation/interpolation first; every candidate is confirmed by
    exact division, and the remainder-sequence route is the fallback.
    """
    if not f or not g:
        return u_gcd_prs(f, g)
    if len(f) == 1 or len(g) == 1:
        return [1]
    _, fp = u_primitive(f)
    _, gp = u_primitive(g)
    bound = 2 * min(max(abs(a) for a in fp), max(abs(a) for a in gp)) + 29
    x = max(min(bound, 99 * isqrt(bound)), 2 * min(abs(fp[-1]), abs(gp[-1])) + 2)
    for _ in range(HEU_TRIES):
        ff, gg = u_eval(fp, x), u_eval(gp, x)
        if ff and gg:
            h = _u_interpolate(gcd(ff, gg), x)
            if h:
                _, h = u_primitive(h)
                if u_divexact(fp, h) is not None and u_divexact(gp, h) is not None:
                    return h
        x = 73794 * x * isqrt(isqrt(x)) // 27011
    return u_gcd_prs(fp, gp)


# ---------------------------------------------------------------------------
# bivariate: list over powers of x of univariate polys in y


def b_trim(f: list[list[int]]) -> list[list[int]]:
    while f and not f[-1]:
        f.pop()
    return f


def b_content(f: list[list[int]]) -> list[int]:
    """Content in Z[y] (primitive, positive leading coefficient)."""
    g: list[int] = []
    for c in f:
        if c:
            g = u_gcd(g, c) if g else u_primitive(c)[1]
            if len(g) == 1:
                return [1]
    return g


def b_int_content(f: list[list[int]]) -> int:
    g = 0
    for c in f:
        for a in c:
            g = gcd(g, a)
            if g == 1:
                return 1
    return g


def b_divexact_u(f: list[list[int]], c: list[int]) -> list[list[int]] | None:
    out = []
    for fi in f:
        q = u_divexact(fi, c)
        if q is None:
            return None
        out.append(q)
    return out


def b_mul_u(f: list[list[int]], c: list[int]) -> list[list[int]]:
    return b_trim([u_mul(fi, c) for fi in f])


def b_divexact(f: list[list[int]], g: list[list[int]]) -> list[list[int]] | None:
    """Return f/g if g divides f exactly in Z[x, y], else None."""
    if not g:
        raise ZeroDivisionError("division by zero polynomial")
    if not f:
        return []
    df, dg = len(f) - 1, len(g) - 1
    if df < dg:
        return None
    r = [list(c) for c in f]
    lc = g[-1]
    q: list[list[int]] = [[] for _ in range(df - dg + 1)]
    for k in range(df - dg, -1, -1):
        c = r[k + dg]
        if not c:
            continue
        qc = u_divexact(c, lc)
        if qc is None:
            return None
        q[k] = qc
        for j, b in enumerate(g):
            if b:
                r[k + j] = u_sub(r[k + j], u_mul(qc, b))
    if any(r[:dg]):
        return None
    return b_trim(q)


def b_eval_y(f: list[list[int]], y: int) -> list[int]:
    return u_trim([u_eval(c, y) for c in f])


def _b_interpolate(h: list[int], y: int) -> list[list[int]]:
    return b_trim([_u_interpolate(c, y) for c in h])


def b_primitive_int(f: list[list[int]]) -> list[list[int]]:
    c = b_int_content(f)
    lead = f[-1][-1]
    if lead < 0:
        c = -c
    return [[a // c for a in fi] for fi in f]


def b_prem(f: list[list[int]], g: list[list[int]]) -> list[list[int]]:
    df, dg = len(f) - 1, len(g) - 1
    r = [list(c) for c in f]
    lc = g[-1]
    e = df - dg + 1
    while r and len(r) - 1 >= dg:
        dr = len(r) - 1
        c = r[-1]
        r = [u_mul(a, lc) for a in r]
        for j, b in enumerate(g):
            r[dr - dg + j] = u_sub(r[dr - dg + j], u_mul(c, b))
        b_trim(r)
        e -= 1
    if e > 0:
        m = [1]
        for _ in range(e):
            m = u_mul(m, lc)
        r = [u_mul(a, m) for a in r]
    return r


def b_gcd_prs(f: list[list[int]], g: list[list[int]]) -> list[list[int]]:
    """Gcd in Z[y][x] through the subresultant remainder sequence.

    Both inputs are split into content (in Z[y]) and primitive part; the
    primitive parts go through the subresultant sequence and the gcd of the
    contents is multiplied back.
    """
    if not f:
        return b_normalize_sign(g)
    if not g:
        return b_normalize_sign(f)
    if len(f) < len(g):
        f, g = g, f
    cf, cg = b_content(f), b_content(g)
    a = b_divexact_u(f, cf)
    b = b_divexact_u(g, cg)
    c = u_gcd(cf, cg)
    gg: list[int] = [1]
    hh: list[int] = [1]
    while True:
        delta = len(a) - len(b)
        r = b_prem(a, b)
        if not r:
            h = b_divexact_u(b, b_content(b))
            break
        if len(r) == 1:
            h = [[1]]
            break
        a = b
        b = b_divexact_u(r, u_mul(gg, _u_pow(hh, delta)))
        gg = a[-1]
        if delta == 0:
            pass
        else:
            hh = u_divexact(_u_pow(gg, delta), _u_pow(hh, delta - 1))
    return b_normalize_sign(b_mul_u(h, c))


def _u_pow(f: list[int], e: int) -> list[int]:
    out = [1]
    for _ in range(e):
        out = u_mul(out, f)
    return out


def b_normalize_sign(h: list[list[int]]) -> list[list[int]]:
    if h and h[-1][-1] < 0:
        return [[-a for a in c] for c in h]
    return h


def b_maxnorm(f: list[list[int]]) -> int:
    return max(abs(a) for c in f for a in c)


def b_gcd(f: list[list[int]], g: list[list[int]]) -> list[list[int]]:
    """Gcd in Z[x, y], primitive over Z, positive leading coefficient in x.

    Heuristic evaluation at y = large integer, recursive univariate gcd,
    interpolation back, confirmed by exact division of both inputs; the
    subresultant route handles anything the heuristic cannot settle.
    """
    if not f:
        return b_normalize_sign(b_primitive_int(g)) if g else []
    if not g:
        return b_normalize_sign(b_primitive_int(f))
    fp = b_primitive_int(f)
    gp = b_primitive_int(g)
    bound = 2 * min(b_maxnorm(fp), b_maxnorm(gp)) + 29
    lcs = min(abs(u_eval(fp[-1], 1)) or 1, abs(u_eval(gp[-1], 1)) or 1)
    y = max(min(bound, 99 * isqrt(bound)), 2 * lcs + 2)
    for _ in range(HEU_TRIES):
        ff, gg = b_eval_y(fp, y), b_eval_y(gp, y)
        if ff and gg and len(ff) == len(fp) and len(gg) == len(gp):
            hu = u_gcd(ff, gg)
            # lift the integer gcd as well: u_gcd returns a primitive part
            cont = gcd(u_content(ff), u_content(gg))
            hu = u_scale(hu, cont)
            h = _b_interpolate(hu, y)
            if h:
                h = b_primitive_int(h)
                if b_divexact(fp, h) is not None and b_divexact(gp, h) is not None:
                    return b_normalize_sign(h)
        y = 73794 * y * isqrt(isqrt(y)) // 27011
    return b_gcd_prs(fp, gp)
