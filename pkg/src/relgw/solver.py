"""Exact solving of lower-triangular equation systems."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .equations import Coeff, Equation, OracleRef, Slot
from .invariants import InvariantKey, Verdict, format_key
from .p1theory import Unresolved, fiber_constant

__all__ = [
    "SolverError",
    "Cycle",
    "MissingOracle",
    "ZeroPrincipalCoefficient",
    "UndeterminedUnknown",
    "DuplicatePrincipal",
    "OracleEntry",
    "OracleTable",
    "Solution",
    "solve",
    "verify",
    "explain",
]


class SolverError(Exception):
    pass


class Cycle(SolverError):
    def __init__(self, a: str, b: str):
        super().__init__(f"triangularity violated: {a} and {b} depend on each other or are not ordered")
        self.pair = (a, b)


class MissingOracle(SolverError):
    def __init__(self, name: str):
        super().__init__(f"no oracle value for {name}")
        self.name = name


class ZeroPrincipalCoefficient(SolverError, ValueError):
    pass


class UndeterminedUnknown(SolverError):
    pass


class DuplicatePrincipal(SolverError):
    pass


@dataclass(frozen=True)
class OracleEntry:
    value: Fraction
    provenance: str  # "paper-table", "user", "computed", ...
    note: str = ""


@dataclass
class OracleTable:
    """Known values keyed by serialized key or reference name.

    ``rules`` are ``(predicate, value, provenance, note)`` tuples applied to
    keys without an explicit entry.
    """

    entries: dict[str, OracleEntry] = field(default_factory=dict)
    rules: list[tuple[Callable[[InvariantKey], bool], Fraction, str, str]] = field(default_factory=list)
    resolve_fiber_slots: bool = True

    def set(self, name, value, provenance: str = "user", note: str = "") -> None:
        name = format_key(name) if isinstance(name, InvariantKey) else str(name)
        self.entries[name] = OracleEntry(Fraction(value), provenance, note)

    def add_rule(self, predicate, value, provenance: str, note: str = "") -> None:
        self.rules.append((predicate, Fraction(value), provenance, note))

    def lookup(self, item) -> OracleEntry | None:
        if isinstance(item, InvariantKey):
            e = self.entries.get(format_key(item))
            if e is not None:
                return e
            for pred, v, prov, note in self.rules:
                if pred(item):
                    return OracleEntry(v, prov, note)
            return None
        if isinstance(item, OracleRef):
            return self.entries.get(item.name)
        if isinstance(item, Slot):
            e = self.entries.get(item.name)
            if e is None and self.resolve_fiber_slots:
                v = fiber_constant(item.descriptor)
                if not isinstance(v, Unresolved):
                    return OracleEntry(v, "computed", "genus-0 Hurwitz evaluation")
            return e
        return self.entries.get(str(item))

    def __contains__(self, item):
        return self.lookup(item) is not None


@dataclass
class Solution:
    values: dict[InvariantKey, Fraction]
    log: dict[InvariantKey, dict]
    order: list[InvariantKey]

    def __getitem__(self, key: InvariantKey) -> Fraction:
        return self.values[key]

    def by_name(self) -> dict[str, Fraction]:
        return {format_key(k): v for k, v in self.values.items()}


def _coeff_value(c: Coeff, oracles: OracleTable) -> Fraction:
    v = c.value
    for s in c.slots:
        e = oracles.lookup(s)
        if e is None:
            raise MissingOracle(s.name)
        v *= e.value
    return v


def _term_value(c: Coeff, x: Fraction, oracles: OracleTable) -> Fraction:
    # a slot multiplying a vanishing invariant needs no value
    if x == 0:
        return Fraction(0)
    return _coeff_value(c, oracles) * x


def solve(system: Iterable[Equation], oracles: OracleTable | None = None,
          order: Callable[[InvariantKey, InvariantKey], Verdict] | None = None) -> Solution:
    """Solve by substitution in dependency order.

    When ``order`` is given, every unknown on a right-hand side must be
    strictly lower than the principal; otherwise :class:`Cycle` is raised.
    """
    oracles = oracles or OracleTable()
    eqs: dict[InvariantKey, tuple[int, Equation]] = {}
    for i, eq in enumerate(system):
        if eq.principal_coeff == 0:
            raise ZeroPrincipalCoefficient(format_key(eq.principal))
        if eq.principal in eqs:
            raise DuplicatePrincipal(format_key(eq.principal))
        eqs[eq.principal] = (i, eq)

    deps: dict[InvariantKey, set[InvariantKey]] = {}
    for p, (_, eq) in eqs.items():
        d = set()
        for c, k in eq.terms:
            if k == p:
                raise Cycle(format_key(p), format_key(p))
            if k in eqs:
                if order is not None and order(k, p) is not Verdict.LOWER:
                    raise Cycle(format_key(k), format_key(p))
                d.add(k)
            elif oracles.lookup(k) is None:
                raise MissingOracle(format_key(k))
        for c, r in eq.oracle_terms:
            if oracles.lookup(r) is None:
                raise MissingOracle(r.name)
        deps[p] = d

    # Kahn's algorithm; ties broken by serialized key
    users: dict[InvariantKey, list[InvariantKey]] = {p: [] for p in eqs}
    indeg = {p: len(d) for p, d in deps.items()}
    for p, d in deps.items():
        for k in d:
            users[k].append(p)
    heap = [(format_key(p), p) for p, n in indeg.items() if n == 0]
    heapq.heapify(heap)
    values: dict[InvariantKey, Fraction] = {}
    log: dict[InvariantKey, dict] = {}
    rank: dict[InvariantKey, int] = {}
    seq = []
    while heap:
        _, p = heapq.heappop(heap)
        idx, eq = eqs[p]
        rhs = Fraction(0)
        for c, k in eq.terms:
            x = values[k] if k in values else oracles.lookup(k).value
            rhs += _term_value(c, x, oracles)
        for c, r in eq.oracle_terms:
            rhs += _term_value(c, oracles.lookup(r).value, oracles)
        values[p] = rhs / eq.principal_coeff
        rank[p] = 1 + max((rank[k] for k in deps[p]), default=-1)
        log[p] = {"equation": idx, "rank": rank[p], "depends_on": sorted(format_key(k) for k in deps[p])}
        seq.append(p)
        for u in users[p]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(heap, (format_key(u), u))
    if len(values) != len(eqs):
        left = sorted((format_key(p) for p in eqs if p not in values))
        stuck = next(p for p in eqs if p not in values)
        other = next(k for k in deps[stuck] if k not in values)
        raise Cycle(format_key(stuck), format_key(other)) if left else UndeterminedUnknown(left)
    return Solution(values, log, seq)


def verify(system: Iterable[Equation], values: Mapping[InvariantKey, Fraction],
           oracles: OracleTable | None = None) -> list[dict]:
    """Residual report; empty when every equation holds exactly."""
    oracles = oracles or OracleTable()
    report = []
    for i, eq in enumerate(system):
        try:
            def val(k):
                if k in values:
                    return Fraction(values[k])
                e = oracles.lookup(k)
                if e is None:
                    raise MissingOracle(format_key(k) if isinstance(k, InvariantKey) else str(k))
                return e.value

            lhs = eq.principal_coeff * val(eq.principal)
            rhs = sum((_term_value(c, val(k), oracles) for c, k in eq.terms), Fraction(0))
            rhs += sum((_term_value(c, val(r), oracles) for c, r in eq.oracle_terms), Fraction(0))
            if lhs != rhs:
                report.append({"equation": i, "principal": format_key(eq.principal),
                               "residual": lhs - rhs})
        except MissingOracle as exc:
            report.append({"equation": i, "principal": format_key(eq.principal), "missing": exc.name})
    return report


def explain(solution: Solution, key: InvariantKey, system: list[Equation]) -> list[str]:
    """Derivation chain for one unknown, leaves first."""
    by_name = {format_key(k): k for k in solution.values}
    out: list[str] = []
    seen = set()

    def visit(k: InvariantKey):
        if k in seen:
            return
        seen.add(k)
        entry = solution.log[k]
        for dep in entry["depends_on"]:
            visit(by_name[dep])
        out.append(f"[rank {entry['rank']}] {format_key(k)} = {solution.values[k]}"
                   f"  via {system[entry['equation']]}")

    if key not in solution.log:
        raise UndeterminedUnknown(format_key(key))
    visit(key)
    return out
