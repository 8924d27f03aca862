"""Command line entry point: ``relgw <command> ...``.

All numbers are printed as exact ``p/q`` strings.  ``--format structured``
switches to JSON lines; ``--dump-equations`` prints the equation system a
command works with (possibly empty) in the re-parseable dump format.
Errors go to stderr as ``<ErrorName>: message`` with exit status 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import p1theory, quintic_surface, schemes
from .cohomology import (CohClass, GradedBasis, build_bundle_basis, curve, formal_surface_pair,
                         point, projective_space)
from .degeneration import (BundleContext, PairContext, relation1, relation2, theorem2_system,
                           triangularity_check)
from .equations import Equation, dump_equation, load_equation
from .invariants import (Bounds, InvariantKey, Species, circ_less_pair, circ_less_typeII, diagnose,
                         downset, format_key, hirzebruch_lattice, line_lattice, parse_key,
                         point_bundle_lattice)
from .partitions import format_partition, lex_compare, parse_partition, size_compare
from .rubber import RubberContext, RubberTerm, linearize, reduce
from .solver import OracleTable, explain, solve, verify

CONFIG_ENV = "RELGW_CONFIG"


class ConfigError(ValueError):
    pass


class UsageError(ValueError):
    pass


def fmt(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# config

@dataclass
class Config:
    rings: dict[str, GradedBasis] = field(default_factory=dict)
    oracles: OracleTable = field(default_factory=OracleTable)
    bounds: Bounds = field(default_factory=lambda: Bounds(1, 1, 1))
    format: str = "text"


def load_config(path: str | None) -> Config:
    """Read a JSON config; every referenced file is parsed here, before any command runs."""
    cfg = Config()
    if not path:
        return cfg
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    base = p.parent
    for name, rp in data.get("rings", {}).items():
        try:
            cfg.rings[name] = GradedBasis.from_json(json.loads((base / rp).read_text()))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"ring {name}: {exc}") from None
    for op in data.get("oracles", []):
        cfg.oracles = _read_oracles(base / op, cfg.oracles)
    b = data.get("bounds", {})
    vals = {k: b.get(k, 1) for k in ("max_genus", "max_omega", "max_k")}
    for k, v in vals.items():
        if not isinstance(v, int) or v <= 0:
            raise ConfigError(f"bound {k} must be a positive integer, got {v!r}")
    cfg.bounds = Bounds(vals["max_genus"], vals["max_omega"], vals["max_k"])
    fmt_ = data.get("format", "text")
    if fmt_ not in ("text", "structured", "dot"):
        raise ConfigError(f"unknown output format {fmt_!r}")
    cfg.format = fmt_
    return cfg


def _read_oracles(path, table: OracleTable | None = None) -> OracleTable:
    """JSON lines ``{"name": ..., "value": "p/q", "provenance": ..., "note": ...}``."""
    table = table or OracleTable()
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read oracle file {path}: {exc}") from None
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            table.set(rec["name"], Fraction(rec["value"]), rec.get("provenance", "user"), rec.get("note", ""))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"{path}:{i}: bad oracle record: {exc}") from None
    return table


# ---------------------------------------------------------------------------
# geometry catalog

@dataclass
class Geometry:
    name: str
    lattice: object
    basis: GradedBasis | None
    bundle: BundleContext | None = None
    rubber: RubberContext | None = None
    pair: PairContext | None = None
    bases: dict = field(default_factory=dict)


def geometry(name: str, cfg: Config | None = None) -> Geometry:
    """``point``, ``hirzebruch:k``, ``k3c4`` or ``bundle:<ring from config>``."""
    if name == "point":
        X = point()
        geo = build_bundle_basis(X, CohClass())
        lat = point_bundle_lattice()
        return Geometry(name, lat, X, BundleContext(geo, lat, ample="1"), RubberContext(geo, lat, ample="1"))
    if name.startswith("hirzebruch:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad geometry {name!r}") from None
        X = projective_space(1)
        geo = build_bundle_basis(X, X.cls("h", k) if k else CohClass())
        lat = hirzebruch_lattice(k)
        return Geometry(name, lat, X, BundleContext(geo, lat), RubberContext(geo, lat, c1x=(0, 2)))
    if name == "k3c4":
        V, W, r = formal_surface_pair(3, 4, "S4")
        lat = line_lattice("S4", 4)
        ctx = PairContext(r, lat, space="S4/C4", absolute_space="S4", bubble_space="P/Dinf")
        return Geometry(name, lat, W, pair=ctx, bases={"S4/C4": W, "S4": V, "": W})
    if name.startswith("bundle:") and cfg is not None:
        ring = cfg.rings.get(name.split(":", 1)[1])
        if ring is None:
            raise ConfigError(f"no ring named {name.split(':', 1)[1]!r} in the config")
        geo = build_bundle_basis(ring, CohClass())
        lat = point_bundle_lattice()
        return Geometry(name, lat, ring, BundleContext(geo, lat, ample=ring.identity),
                        RubberContext(geo, lat, ample=ring.identity))
    raise UsageError(f"unknown geometry {name!r}; use point, hirzebruch:k, k3c4 or bundle:<ring>")


def _key(text: str, g: Geometry) -> InvariantKey:
    basis = g.basis
    if g.bases and "space=" in text:
        basis = g.bases.get(text.rsplit("space=", 1)[1].rstrip("]"), basis)
    return parse_key(text, g.lattice, basis)


# ---------------------------------------------------------------------------
# output

class Out:
    def __init__(self, fmt_: str, dump: bool):
        self.format = fmt_
        self.dump = dump
        self.lines: list[str] = []

    def text(self, line: str = ""):
        if self.format == "text" and not self.dump:
            self.lines.append(line)

    def record(self, **rec):
        if self.format == "structured" and not self.dump:
            self.lines.append(json.dumps(rec, sort_keys=True))
        elif self.format == "dot" and not self.dump and "dot" in rec:
            self.lines.append(rec["dot"])

    def equations(self, eqs: Sequence[Equation]):
        if self.dump:
            self.lines.extend(dump_equation(e) for e in eqs)

    def emit(self, stream):
        if self.lines:
            stream.write("\n".join(self.lines) + "\n")


def _both(out: Out, line: str, **rec):
    out.text(line)
    out.record(**rec)


# ---------------------------------------------------------------------------
# commands

def cmd_partitions(a, cfg, out):
    basis = curve(int(a.curve_genus)) if a.curve_genus is not None else None
    if a.op in ("zee", "dual"):
        mu = parse_partition(a.args[0], basis)
        if a.op == "zee":
            c = mu.constants()
            _both(out, str(mu.zee), partition=format_partition(mu), zee=str(mu.zee),
                  constants={k: str(v) for k, v in c.items()})
        else:
            d, sign = mu.dual()
            _both(out, f"{format_partition(d)} sign={sign}", dual=format_partition(d), sign=sign)
    elif a.op == "order":
        pa = parse_partition("{" + a.args[0] + "}", basis).parts[0]
        pb = parse_partition("{" + a.args[1] + "}", basis).parts[0]
        v = size_compare(pa, pb, basis).value
        _both(out, v, result=v)
    else:
        v = lex_compare(parse_partition(a.args[0], basis), parse_partition(a.args[1], basis)).value
        _both(out, v, result=v)


def cmd_order(a, cfg, out):
    g = geometry(a.geometry, cfg)
    if a.op == "downset":
        key = _key(a.keys[0], g)
        b = cfg.bounds
        omega_classes = tuple(("", lab) for lab in (g.basis.labels if g.basis else ()))
        dist = tuple(lab for lab in (g.basis.labels if g.basis else ()) if g.basis.deg(lab) > 0)
        bounds = Bounds(a.max_genus if a.max_genus is not None else b.max_genus,
                        a.max_omega if a.max_omega is not None else b.max_omega,
                        a.max_k if a.max_k is not None else b.max_k,
                        omega_classes=omega_classes, distinguished_labels=dist)
        ds = sorted(format_key(k) for k in downset(key, bounds))
        _both(out, f"downset size = {len(ds)}", size=len(ds))
        for k in ds:
            _both(out, k, key=k)
        return
    if len(a.keys) != 2:
        raise UsageError("order needs two keys")
    k1, k2 = (_key(t, g) for t in a.keys)
    cmp = circ_less_typeII if a.op == "typeII" else circ_less_pair
    v = cmp(k1, k2).value
    why = diagnose(k1, k2) if v != "Lower" else None
    _both(out, v + (f" ({why})" if why else ""), result=v, diagnostic=why)


def _profiles(items: Sequence[str]):
    return [tuple(int(x) for x in s.split(",")) for s in items]


def cmd_hurwitz(a, cfg, out):
    prof = _profiles(a.profiles)
    h = p1theory.hurwitz_number(a.genus, a.degree, prof, connected=not a.disconnected)
    _both(out, f"H = {fmt(h)}", value=fmt(h))
    if a.brute:
        n = p1theory.brute_force_count(a.degree, prof, connected=not a.disconnected)
        f = p1theory.frobenius_count(a.degree, prof) if a.disconnected else p1theory.transitive_count(a.degree, prof)
        _both(out, f"count frobenius = {f}, brute force = {n}", frobenius=f, brute=n)


def cmd_character(a, cfg, out):
    if a.table is not None:
        t = p1theory.CharacterTable(a.table)
        cls = ["(" + ",".join(map(str, r)) + ")" for r in t.classes]
        _both(out, "lambda\\rho " + " ".join(cls), classes=cls)
        for lam in t.irreps:
            row = [t.values[(lam, r)] for r in t.classes]
            _both(out, "(" + ",".join(map(str, lam)) + ") " + " ".join(map(str, row)),
                  irrep=list(lam), row=row)
        return
    if len(a.parts) != 2:
        raise UsageError("character needs lambda and rho, or --table n")
    lam, rho = _profiles(a.parts)
    v = p1theory.character(lam, rho)
    _both(out, str(v), value=v)


def _show_equations(out, eqs):
    out.equations(eqs)
    for e in eqs:
        bad = triangularity_check(e)
        _both(out, str(e), equation=json.loads(dump_equation(e)), triangular=not bad)


def cmd_relation(a, cfg, out):
    g = geometry(a.geometry, cfg)
    if g.bundle is None:
        raise UsageError(f"{a.geometry} is not a P^1-bundle geometry")
    fn = relation1 if a.command == "relation1" else relation2
    _show_equations(out, [fn(_key(t, g), g.bundle) for t in a.keys])


def cmd_theorem2(a, cfg, out):
    g = geometry(a.geometry, cfg)
    if g.pair is None:
        raise UsageError(f"{a.geometry} is not a pair geometry")
    eqs = theorem2_system([_key(t, g) for t in a.keys], g.pair, reduce_divisor=a.reduce_divisor)
    _show_equations(out, eqs)


def _insertions(text: str):
    from .invariants import _parse_ins, _split_fields
    return [_parse_ins(x) for x in _split_fields(text)] if text else []


def cmd_rubber(a, cfg, out):
    g = geometry(a.geometry, cfg)
    if g.rubber is None:
        raise UsageError(f"{a.geometry} has no rubber calculus")
    X = g.basis
    beta = tuple(int(x) for x in a.beta.split(","))
    mu = parse_partition(a.mu, X)
    nu = parse_partition(a.nu, X)
    marked = _insertions(a.marked)[0] if a.marked else None
    term, sign = RubberTerm.build(a.genus, beta, mu, _insertions(a.omega), a.psi, nu, marked=marked, basis=X)
    strategy = int(a.strategy) if a.strategy.lstrip("-").isdigit() else a.strategy
    trace: list = []
    expr = reduce(term, g.rubber, mode=a.mode, strategy=strategy, trace=trace).scale(sign)
    terms = linearize(expr, g.rubber)
    ins = term.insertions()
    key = InvariantKey.make(Species.RUBBER, term.g, term.beta, ins, mu=term.mu, nu=term.nu,
                            psi_inf_power=term.k, space=g.rubber.space, lattice=g.lattice, basis=X)
    key_terms = tuple((c, k) for c, k in terms if isinstance(k, InvariantKey))
    refs = tuple((c, k) for c, k in terms if not isinstance(k, InvariantKey))
    eq = Equation(key, Fraction(1), key_terms, refs, meta={"relation": "rubber-calculus"})
    out.equations([eq])
    _both(out, str(eq), equation=json.loads(dump_equation(eq)))
    if a.trace:
        for s in trace:
            _both(out, f"step {s.rule}: {s.term} {list(s.before)} -> {list(s.after)} {s.note}".rstrip(),
                  rule=s.rule, term=s.term, before=[list(m) for m in s.before],
                  after=[list(m) for m in s.after], note=s.note)


def _read_system(path: str, g: Geometry | None):
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read system {path}: {exc}") from None
    lat = g.lattice if g else None
    bases = (g.bases or g.basis) if g else None
    return [load_equation(l, lat, bases) for l in lines if l.strip()]


def cmd_solve(a, cfg, out):
    g = geometry(a.geometry, cfg) if a.geometry else None
    eqs = _read_system(a.system, g)
    oracles = cfg.oracles
    for p in a.oracles or ():
        oracles = _read_oracles(p, oracles)
    sol = solve(eqs, oracles)
    out.equations(eqs)
    for k in sol.order:
        _both(out, f"{format_key(k)} = {fmt(sol.values[k])}", key=format_key(k), value=fmt(sol.values[k]))
    if a.explain:
        target = next((k for k in sol.values if format_key(k) == a.explain), None)
        if target is None:
            raise UsageError(f"{a.explain} is not an unknown of the system")
        for line in explain(sol, target, eqs):
            _both(out, line, explain=line)


def cmd_verify(a, cfg, out):
    g = geometry(a.geometry, cfg) if a.geometry else None
    eqs = _read_system(a.system, g)
    oracles = cfg.oracles
    for p in a.oracles or ():
        oracles = _read_oracles(p, oracles)
    values = {}
    for rec in _read_oracles(a.values).entries.items():
        values[rec[0]] = rec[1].value
    by_key = {}
    for e in eqs:
        for k in [e.principal, *e.keys()]:
            if format_key(k) in values:
                by_key[k] = values[format_key(k)]
    rep = verify(eqs, by_key, oracles)
    out.equations(eqs)
    _both(out, f"violations = {len(rep)}", violations=len(rep))
    for r in rep:
        _both(out, json.dumps({k: (fmt(v) if isinstance(v, Fraction) else v) for k, v in r.items()},
                              sort_keys=True), violation=r.get("principal"))
    return 0 if not rep else 1


def _emit_dag(dag, out, endpoints_only: bool):
    if endpoints_only:
        eps = dag.endpoints()
        _both(out, ", ".join(eps), endpoints=eps)
        return
    if out.format == "dot" and not out.dump:
        out.lines.append(dag.to_dot().rstrip("\n"))
        return
    if out.format == "structured":
        for r in dag.to_records():
            out.record(**r)
        return
    out.text(dag.to_text().rstrip("\n"))


def cmd_scheme(a, cfg, out):
    if a.op == "quintic":
        _emit_dag(schemes.quintic_scheme(), out, a.endpoints)
    elif a.op == "hypersurface":
        _emit_dag(schemes.hypersurface_closure(schemes.hypersurface(a.ambient, a.degree)), out, a.endpoints)
    else:
        if not a.degrees:
            raise UsageError("scheme blowup needs --degrees d1,d2,...")
        V = schemes.projective(a.ambient)
        divs = [schemes.hypersurface(a.ambient, int(d)) for d in a.degrees.split(",")]
        dag = schemes.SchemeDAG()
        dag.add(schemes.blowup_dependencies(V, divs))
        _emit_dag(dag, out, a.endpoints)


def cmd_quintic(a, cfg, out):
    p_abs = None
    if a.p_absolute:
        p_abs = {}
        for item in a.p_absolute.split(","):
            k, _, v = item.partition("=")
            p_abs[k.strip()] = Fraction(v)
    data = quintic_surface.default_data(p_abs)
    disabled = a.disable or ()
    system = quintic_surface.build_section33_system(data, disabled)
    out.equations(system.equations)
    if out.dump:
        return
    if out.format == "structured":
        sol = quintic_surface.solve_section33(system)
        fin = quintic_surface.assemble_final(sol, system)
        for k in sol.order:
            out.record(key=format_key(k), value=fmt(sol.values[k]))
        for row in fin["rows"]:
            out.record(**{k: (fmt(v) if isinstance(v, Fraction) else v) for k, v in row.items()})
        out.record(result=fmt(fin["result"]))
        return
    text = quintic_surface.report(data, disabled)
    if not a.report:
        text = text.splitlines()[-1] + "\n"
    out.text(text.rstrip("\n"))


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config (default: ${CONFIG_ENV})")
    common.add_argument("--format", choices=("text", "structured", "dot"), default=None)
    common.add_argument("--dump-equations", action="store_true",
                        help="print the equation system in dump format instead of the normal output")

    p = argparse.ArgumentParser(prog="relgw", description="Relative invariants by degeneration.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("partitions", parents=[common])
    s.add_argument("op", choices=("zee", "dual", "order", "lex"))
    s.add_argument("args", nargs="+")
    s.add_argument("--curve-genus", type=int, help="weights live on a genus-g curve")
    s.set_defaults(func=cmd_partitions)

    s = sub.add_parser("order", parents=[common])
    s.add_argument("op", choices=("typeII", "pair", "downset"))
    s.add_argument("keys", nargs="+")
    s.add_argument("--geometry", default="hirzebruch:1")
    s.add_argument("--max-genus", type=int)
    s.add_argument("--max-omega", type=int)
    s.add_argument("--max-k", type=int)
    s.set_defaults(func=cmd_order)

    s = sub.add_parser("hurwitz", parents=[common])
    s.add_argument("profiles", nargs="+", help="ramification profiles like 2,1,1")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--disconnected", action="store_true")
    s.add_argument("--brute", action="store_true", help="also count factorizations directly")
    s.set_defaults(func=cmd_hurwitz)

    s = sub.add_parser("character", parents=[common])
    s.add_argument("parts", nargs="*", help="lambda and rho, like 3,1 2,2")
    s.add_argument("--table", type=int)
    s.set_defaults(func=cmd_character)

    for name in ("relation1", "relation2"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("keys", nargs="+")
        s.add_argument("--geometry", default="hirzebruch:1")
        s.set_defaults(func=cmd_relation)

    s = sub.add_parser("rubber", parents=[common])
    s.add_argument("op", choices=("reduce",))
    s.add_argument("--geometry", default="hirzebruch:1")
    s.add_argument("--genus", type=int, default=0)
    s.add_argument("--beta", required=True)
    s.add_argument("--mu", default="{}")
    s.add_argument("--nu", default="{}")
    s.add_argument("--omega", default="")
    s.add_argument("--marked", default="")
    s.add_argument("--psi", type=int, default=0)
    s.add_argument("--mode", choices=("FiberClass", "NonFiber"))
    s.add_argument("--strategy", default="highest-k")
    s.add_argument("--trace", action="store_true")
    s.set_defaults(func=cmd_rubber)

    s = sub.add_parser("theorem2", parents=[common])
    s.add_argument("op", choices=("system",))
    s.add_argument("keys", nargs="+")
    s.add_argument("--geometry", default="k3c4")
    s.add_argument("--reduce-divisor", action="store_true")
    s.set_defaults(func=cmd_theorem2)

    for name, fn in (("solve", cmd_solve), ("verify", cmd_verify)):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("system", help="equation dump (JSON lines)")
        s.add_argument("--geometry")
        s.add_argument("--oracles", action="append")
        if name == "solve":
            s.add_argument("--explain")
        else:
            s.add_argument("--values", required=True, help="JSON lines of solved values")
        s.set_defaults(func=fn)

    s = sub.add_parser("scheme", parents=[common])
    s.add_argument("op", choices=("quintic", "hypersurface", "blowup"))
    s.add_argument("--endpoints", action="store_true")
    s.add_argument("--ambient", type=int, default=4)
    s.add_argument("--degree", type=int, default=5)
    s.add_argument("--degrees")
    s.set_defaults(func=cmd_scheme)

    s = sub.add_parser("quintic-surface", parents=[common])
    s.add_argument("--report", action="store_true")
    s.add_argument("--p-absolute", help="alternate mode: mu1=8,mu2=4,mu3=2")
    s.add_argument("--disable", action="append", help="drop one exclusion filter")
    s.set_defaults(func=cmd_quintic)
    return p


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config or os.environ.get(CONFIG_ENV))
        out = Out(args.format or cfg.format, args.dump_equations)
        status = args.func(args, cfg, out) or 0
    except Exception as exc:  # every module error is reported by name
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    out.emit(stdout)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
