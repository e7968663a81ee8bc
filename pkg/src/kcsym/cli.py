"""Command-line entry point: ``kcsym <command> [options]``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import special, verify
from .models import (
    ConstructionError,
    Label,
    Params,
    SystemKind,
    build_all,
    degenerate_multiplet,
    label_u,
    random_params,
    rat_str,
)

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUILD = 0, 1, 2, 3

# option name -> default; flags override the config file, which overrides these
DEFAULTS = {
    "system": "4p",
    "pq": "1,1,1,1",
    "seed": "0",
    "params": None,
    "ids": None,
    "json": False,
    "timing": False,
    "no_fit": False,
    "cases": None,
    "seed_label": None,
    "bound": "8",
    "target": None,
    "basis": None,
    "domain": "constants",
}


class UsageError(Exception):
    pass


def read_config(path: "str | Path") -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown key {k!r}")
        out[k] = v
    return out


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def resolve(ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(ns, "config", None):
        cfg.update(read_config(ns.config))
    for k in DEFAULTS:
        v = getattr(ns, k, None)
        if v is not None and v is not False:
            cfg[k] = v
    for k in ("json", "timing", "no_fit"):
        cfg[k] = _truthy(cfg[k])
    return cfg


def _pq(text: str) -> tuple[int, int, int, int]:
    try:
        vals = tuple(int(s) for s in str(text).split(","))
    except ValueError:
        raise UsageError(f"--pq wants four integers, got {text!r}") from None
    if len(vals) != 4:
        raise UsageError(f"--pq wants four integers, got {text!r}")
    return vals  # type: ignore[return-value]


def _kind(text: str) -> SystemKind:
    try:
        return SystemKind.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def make_params(cfg: dict) -> Params:
    kind, pq = _kind(cfg["system"]), _pq(cfg["pq"])
    if cfg["params"]:
        vals = {}
        for item in str(cfg["params"]).replace(";", ",").split(","):
            if not item.strip():
                continue
            k, v = (s.strip() for s in item.split("="))
            vals[k] = Fraction(v)
        missing = {"alpha", "b", "c", "u"} - set(vals)
        if missing:
            raise UsageError(f"--params is missing {sorted(missing)}")
        return Params(*pq, **vals)
    return random_params(pq, random.Random(int(cfg["seed"])), kind)


def emit(cfg: dict, payload: dict, text: str) -> None:
    if cfg["json"]:
        sys.stdout.write(json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: dict) -> int:
    kind, params = _kind(cfg["system"]), make_params(cfg)
    ids = [s.strip() for s in cfg["ids"].split(",")] if cfg["ids"] else None
    reports = verify.run_suite(kind, params, selection=ids, auto_fit=not cfg["no_fit"])
    payload = {
        "command": "verify",
        "system": kind.value,
        "params": params.as_dict(),
        "summary": verify.summarize(reports),
        "healthy": verify.suite_healthy(reports),
        "reports": [r.as_dict(timing=cfg["timing"]) for r in reports],
    }
    head = f"system {kind.value}, params " + " ".join(f"{k}={v}" for k, v in params.as_dict().items())
    emit(cfg, payload, head + "\n" + verify.format_table(reports))
    return EXIT_OK if verify.suite_healthy(reports) else EXIT_FAIL


def cmd_fit(cfg: dict) -> int:
    if not cfg["target"] or not cfg["basis"]:
        raise UsageError("fit needs --target and --basis")
    kind, params = _kind(cfg["system"]), make_params(cfg)
    ev = verify.Evaluator(build_all(kind, params))
    names = [s.strip() for s in cfg["basis"].split(";") if s.strip()]
    nodes = [verify.parse_expr(cfg["target"])] + [verify.parse_expr(b) for b in names]
    missing = sorted({m for nd in nodes for m in ev.missing(nd)})
    if missing:
        raise UsageError(f"unknown operator names {missing}")
    res = verify.fit(ev.op(nodes[0]), [ev.op(nd) for nd in nodes[1:]], cfg["domain"], names)
    payload = {"command": "fit", "system": kind.value, "params": params.as_dict(), "target": cfg["target"],
               "result": res.as_dict()}
    lines = [f"target {cfg['target']}  domain {res.domain}  rank {res.rank}"]
    lines += [f"  {n}: {c}" for n, c in zip(res.basis, res.as_dict()["coefficients"])]
    lines.append("solved" if res.ok else f"no solution ({len(res.residual.terms)} residual shift(s))")
    emit(cfg, payload, "\n".join(lines))
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_ladders(cfg: dict) -> int:
    cases = special.load_ladder_cases(cfg["cases"])
    results = special.check_ladders(cases)
    payload = {"command": "ladders", "cases": [r.as_dict() for r in results],
               "passed": sum(r.ok for r in results), "total": len(results)}
    lines = [f"{r.rid:5} {' '.join(f'{k}={v}' for k, v in r.params.items()):28} "
             f"{r.max_rel_err:9.2e}  {'PASS' if r.ok else 'FAIL'}{'  ' + r.error if r.error else ''}" for r in results]
    lines.append(f"{payload['passed']}/{payload['total']} ladder cases within tolerance")
    emit(cfg, payload, "\n".join(lines))
    return EXIT_OK if payload["passed"] == payload["total"] else EXIT_FAIL


def _seed_label(kind: SystemKind, text: str | None) -> Label:
    if not text:
        raise UsageError("multiplet needs --seed-label")
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 3:
        raise UsageError("--seed-label wants three comma-separated entries")
    if kind is SystemKind.THREE:
        return Label(int(parts[0]), int(parts[1]), 0, Fraction(parts[2]))
    return Label(*(int(s) for s in parts))


def _label_out(kind: SystemKind, lbl: Label) -> list:
    if kind is SystemKind.THREE:
        return [lbl.n, lbl.m, rat_str(lbl.rho)]
    return [lbl.n, lbl.m, lbl.p]


def cmd_multiplet(cfg: dict) -> int:
    kind, params = _kind(cfg["system"]), make_params(cfg)
    seed = _seed_label(kind, cfg["seed_label"])
    bound = int(cfg["bound"])
    labels = sorted(degenerate_multiplet(kind, params, seed, bound), key=lambda l: (l.n, l.m, l.p, l.rho or 0))
    us = {label_u(kind, params, l) for l in labels}
    payload = {"command": "multiplet", "system": kind.value, "params": params.as_dict(),
               "seed_label": _label_out(kind, seed), "bound": bound, "u": rat_str(label_u(kind, params, seed)),
               "shared_u": len(us) == 1, "labels": [_label_out(kind, l) for l in labels]}
    cols = "(n, m, rho)" if kind is SystemKind.THREE else "(n, m, p)"
    lines = [f"{len(labels)} labels {cols}, u = {payload['u']}"]
    lines += ["  " + ", ".join(str(x) for x in _label_out(kind, l)) for l in labels]
    emit(cfg, payload, "\n".join(lines))
    return EXIT_OK if len(us) == 1 else EXIT_FAIL


def cmd_wronskian(cfg: dict) -> int:
    res = special.wronskian_identity_check()
    payload = {"command": "wronskian", **res}
    text = (f"identity holds, sign = {res['sign']:+d}" if res["holds"] else "identity FAILS") + \
        f" ({res['det_terms']} determinant terms)"
    emit(cfg, payload, text)
    return EXIT_OK if res["holds"] else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "fit": cmd_fit,
    "ladders": cmd_ladders,
    "multiplet": cmd_multiplet,
    "wronskian": cmd_wronskian,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' lines; flags take precedence")
    common.add_argument("--json", action="store_true", default=None, help="machine-readable output")
    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--system", help="3p or 4p (default 4p)")
    system.add_argument("--pq", help="p1,q1,p2,q2 (default 1,1,1,1)")
    system.add_argument("--seed", help="seed for the random parameter draw (default 0)")
    system.add_argument("--params", help="explicit parameters, e.g. alpha=1/2,b=1/3,c=2/5,u=7/3,d=1/7")

    ap = argparse.ArgumentParser(prog="kcsym", description="Exact checks for the Kepler-Coulomb ladder algebras.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", parents=[common, system], help="run the identity catalog")
    p.add_argument("--ids", help="comma-separated catalog ids")
    p.add_argument("--timing", action="store_true", default=None, help="include wall times (not deterministic)")
    p.add_argument("--no-fit", dest="no_fit", action="store_true", default=None, help="skip the fitter on failures")
    p = sub.add_parser("fit", parents=[common, system], help="fit a target over a basis")
    p.add_argument("--target", help="expression, e.g. '[J1,K1]'")
    p.add_argument("--basis", help="semicolon-separated expressions")
    p.add_argument("--domain", choices=["constants", "even-right", "even-left"])
    p = sub.add_parser("ladders", parents=[common], help="numeric ladder recurrence cases")
    p.add_argument("--cases", help="case file (default: the shipped one)")
    p = sub.add_parser("multiplet", parents=[common, system], help="degenerate labels sharing the energy")
    p.add_argument("--seed-label", dest="seed_label", help="n,m,p (4p) or n,m,rho (3p)")
    p.add_argument("--bound", help="box half-width (default 8)")
    sub.add_parser("wronskian", parents=[common], help="exact determinant identity")
    return ap


def main(argv: "list[str] | None" = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = resolve(ns)
        return COMMANDS[ns.command](cfg)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"kcsym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"kcsym: construction failed: {exc}", file=sys.stderr)
        return EXIT_BUILD
    except (verify.CatalogError, OSError) as exc:
        print(f"kcsym: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
