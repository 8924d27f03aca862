"""The canonical-class invariant of the quintic surface.

The quintic surface S5 degenerates to a K3 surface S4 and the plane
blown up in 20 points (B), glued along a plane quartic C4.  The relative
invariants of (S4, C4) come from the relative/absolute equations solved
against the vanishing of the K3 absolute theory; the same equations on
the bundle P = P(K_C + O) with its section D0 give the P side.  A second
degeneration (of B along C4) removes the term where the whole curve
lies in B.

Inputs that this engine cannot derive (localization on P, the B-side
invariants, the geometric exclusions) are imported values with a
provenance tag.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .cohomology import curve, formal_surface_pair
from .degeneration import PairContext, theorem2_equation, triangularity_check
from .equations import Coeff, Equation, OracleRef, Slot
from .invariants import Insertion, InvariantKey, Species, format_key, line_lattice, weighted_partitions
from .partitions import WeightedPartition, format_partition
from .solver import OracleTable, Solution, SolverError, solve

__all__ = [
    "GENUS_C",
    "SW_EXPECTED",
    "Configuration",
    "ExclusionRule",
    "EXCLUSIONS",
    "Section33Data",
    "default_data",
    "candidate_configurations",
    "shape_of",
    "multiplicities",
    "QuinticSystem",
    "build_section33_system",
    "solve_section33",
    "assemble_final",
    "report",
]

GENUS_C = 3          # plane quartic
SELF_INT = 4         # C4 . C4 in S4, and deg K_C = D0 . D0 in P
H_DOT_C = 4          # |mu| for beta_1 = H
TOTAL_GENUS = 6
SW_EXPECTED = Fraction(-1)  # Seiberg-Witten value of the canonical class, recorded, not computed


# ---------------------------------------------------------------------------
# configurations

@dataclass(frozen=True)
class Configuration:
    """One term of the degeneration sum: ``<1|mu>_{g1,beta1} <mu^v|1>_{g2,beta2}``."""

    g1: int
    beta1: str  # "H" or "0"
    mu: WeightedPartition
    g2: int
    beta2: str  # "L" or "5L-sum E" ...

    @property
    def label(self) -> str:
        return f"g1={self.g1},beta1={self.beta1},mu={format_partition(self.mu)},g2={self.g2},beta2={self.beta2}"


@dataclass(frozen=True)
class ExclusionRule:
    name: str
    provenance: str  # "computed" or "imported"
    note: str

    def excludes(self, c: Configuration, W) -> bool:
        return _RULES[self.name](c, W)


def _odd_unpaired(mu: WeightedPartition, W) -> bool:
    odd = [p.weight for p in mu if W.deg(p.weight) % 2]
    c = Counter(w.rstrip("v") for w in odd)
    have = set(odd)
    return any(n != 2 or (a not in have or a + "v" not in have) for a, n in c.items())


def _relative_vdim_fails(c: Configuration, W) -> bool:
    if c.beta1 != "H":
        return False
    # K3 relative to C4: vdim = (g1 - 1) + l(mu) - |mu| (c1 = 0, no insertions)
    vdim = (c.g1 - 1) + c.mu.length - c.mu.size
    return sum(W.deg(p.weight) for p in c.mu) != 2 * vdim


_RULES = {
    "virtual-dimension": _relative_vdim_fails,
    "linear-system-H": lambda c, W: c.beta1 == "H" and c.g1 == 5,
    "odd-monodromy": lambda c, W: c.beta1 == "H" and _odd_unpaired(c.mu, W),
    "tangent-count": lambda c, W: c.beta1 == "H" and Counter(
        (p.mult, p.weight) for p in c.mu) == Counter({(2, "p"): 1, (1, "1"): 2}),
    "beta2-monodromy": lambda c, W: c.beta1 == "0" and c.beta2 != "5L-E1-...-E20",
}

EXCLUSIONS: tuple[ExclusionRule, ...] = (
    ExclusionRule("virtual-dimension", "computed",
                  "relative weights must fill the virtual dimension of the K3 pair"),
    ExclusionRule("linear-system-H", "imported",
                  "g1 = 5 with beta1 = H needs four point conditions while |H| is 3-dimensional"),
    ExclusionRule("odd-monodromy", "imported",
                  "odd weights survive only as dual pairs alpha, alpha^v"),
    ExclusionRule("tangent-count", "imported",
                  "B side counts tangent lines to C4 through two general points: zero"),
    ExclusionRule("beta2-monodromy", "imported",
                  "with beta1 = 0 only beta2 = 5L - sum E_i has a curve through the 20 points"),
)


def candidate_configurations(W=None) -> list[Configuration]:
    """All terms before pruning.

    beta1 = H forces |mu| = H.C4 = 4 with g2 = 0 and beta2 = L, and
    ``g1 = 7 - l(mu)`` from ``g1 + g2 + l(mu) - 1 = 6``.  For beta1 = 0
    the whole curve lies in B; one excluded example class stands for the
    others.
    """
    W = W or curve(GENUS_C)
    out = []
    for mu in weighted_partitions(H_DOT_C, W.labels, W):
        g1 = TOTAL_GENUS + 1 - mu.length
        out.append(Configuration(g1, "H", mu, 0, "L"))
    empty = WeightedPartition((), W)
    out.append(Configuration(0, "0", empty, TOTAL_GENUS, "5L-E1-...-E20"))
    out.append(Configuration(0, "0", empty, TOTAL_GENUS, "5L-2E1-E3-...-E20"))
    return out


def prune(configs: Iterable[Configuration], W=None, disabled: Iterable[str] = ()
          ) -> tuple[list[Configuration], dict[str, list[Configuration]]]:
    """Apply the exclusion rules in order; returns survivors and what each rule removed."""
    W = W or curve(GENUS_C)
    disabled = set(disabled)
    unknown = disabled - set(_RULES)
    if unknown:
        raise ValueError(f"unknown exclusion rules {sorted(unknown)}")
    removed: dict[str, list[Configuration]] = {r.name: [] for r in EXCLUSIONS}
    keep = []
    for c in configs:
        for r in EXCLUSIONS:
            if r.name not in disabled and r.excludes(c, W):
                removed[r.name].append(c)
                break
        else:
            keep.append(c)
    return keep, removed


def shape_of(mu: WeightedPartition, W=None) -> str:
    """Name a partition by its shape: mu1, mu2, mu3 (genus 3), nu1, nu2 (genus 4), else other."""
    W = W or curve(GENUS_C)
    mults = sorted(mu.mults(), reverse=True)
    if _odd_unpaired(mu, W):
        return "other"
    ws = Counter("odd" if W.deg(p.weight) % 2 else p.weight for p in mu)
    if mults == [1, 1, 1, 1]:
        if ws == Counter({"p": 2, "1": 2}):
            return "mu1"
        if ws == Counter({"odd": 2, "p": 1, "1": 1}):
            return "mu2"
        if ws == Counter({"odd": 4}):
            return "mu3"
    if mults == [2, 1, 1]:
        big = next(p for p in mu if p.mult == 2).weight
        small = Counter(p.weight for p in mu if p.mult == 1)
        if big == "p" and small == Counter({"p": 1, "1": 1}):
            return "nu1"
        if big == "1" and small == Counter({"p": 2}):
            return "nu2"
    return "other"


def multiplicities(configs: Iterable[Configuration], W=None) -> dict[str, int]:
    """Number of distinct labelings per shape."""
    W = W or curve(GENUS_C)
    return dict(Counter(shape_of(c.mu, W) for c in configs if c.beta1 == "H"))


# ---------------------------------------------------------------------------
# data

@dataclass(frozen=True)
class Imported:
    value: Fraction
    provenance: str
    note: str


def _imp(v, note, prov="imported"):
    return Imported(Fraction(v), prov, note)


@dataclass
class Section33Data:
    """Printed partitions and imported values.

    ``p_relative`` holds the P/D0 relative values per shape (default mode).
    ``p_absolute`` switches to the alternate mode: absolute invariants of
    P per shape for the genus-3 insertions, in the printed insertion order.
    """

    printed_partitions: Mapping[str, tuple[tuple[int, str], ...]] = field(default_factory=lambda: {
        "mu1": ((1, "p"), (1, "p"), (1, "1"), (1, "1")),
        "mu2": ((1, "alpha"), (1, "alpha^v"), (1, "p"), (1, "1")),
        "mu3": ((1, "alpha1"), (1, "alpha1^v"), (1, "alpha2"), (1, "alpha2^v")),
        "nu1": ((2, "p"), (1, "p"), (1, "1")),
        "nu2": ((2, "1"), (1, "p"), (1, "p")),
    })
    s4_absolute: Imported = field(default_factory=lambda: _imp(0, "K3: absolute invariants vanish"))
    bubble: Mapping[str, Imported] = field(default_factory=lambda: {
        "mu1": _imp(1, "P/Dinf relative localization"),
        "mu2": _imp(0, "P/Dinf relative localization"),
        "mu3": _imp(0, "P/Dinf relative localization"),
    })
    genus4_relative: Imported = field(default_factory=lambda: _imp(
        0, "genus 4 relative invariants vanish on both sides; bubble terms taken as 0"))
    p_relative: Mapping[str, Imported] | None = field(default_factory=lambda: {
        "mu1": _imp(7, "P/D0 relative (localization)"),
        "mu2": _imp(-3, "P/D0 relative (localization)"),
        "mu3": _imp(1, "P/D0 relative (localization)"),
    })
    p_absolute: Mapping[str, Fraction] | None = None
    b_values: Mapping[str, Imported] = field(default_factory=lambda: {
        "mu1": _imp(1, "B/C4 genus 0 via degeneracy locus"),
        "mu2": _imp(1, "B/C4 genus 0 via degeneracy locus"),
        "mu3": _imp(1, "B/C4 genus 0 via degeneracy locus"),
    })
    b_absolute: Imported = field(default_factory=lambda: _imp(1, "unique quintic through C4 . C5"))

    @property
    def mode(self) -> str:
        return "p-absolute" if self.p_absolute is not None else "p-relative"


def default_data(p_absolute: Mapping[str, object] | None = None) -> Section33Data:
    d = Section33Data()
    if p_absolute is not None:
        d.p_absolute = {k: Fraction(v) for k, v in p_absolute.items()}
        d.p_relative = None
    return d


# ---------------------------------------------------------------------------
# system

@dataclass
class QuinticSystem:
    equations: list[Equation]
    oracles: OracleTable
    configs: list[Configuration]
    removed: dict[str, list[Configuration]]
    s_keys: dict[WeightedPartition, InvariantKey]
    p_keys: dict[WeightedPartition, InvariantKey]
    target: InvariantKey
    whole_b: InvariantKey
    diagnostics: list[str]
    data: Section33Data


def _printed_order_insertions(mu: WeightedPartition, W) -> list[Insertion]:
    """Absolute insertions in printed order: odd pairs first, then p's, then identities."""
    odd = sorted((p.weight for p in mu if W.deg(p.weight) % 2),
                 key=lambda w: (int(w[1:].rstrip("v")), w.endswith("v")))
    ev = sorted((p.weight for p in mu if not W.deg(p.weight) % 2), key=lambda w: w != "p")
    push = {"p": "p", "1": "H"}
    ins = [Insertion(0, "", "f" + w[1:]) for w in odd]
    ins += [Insertion(0, "", push[w]) for w in ev if w != "1"]
    return ins


def build_section33_system(data: Section33Data | None = None, disabled_filters: Iterable[str] = ()
                           ) -> QuinticSystem:
    """Equations for the S4 side, the P side, the whole-curve-in-B term and the target.

    Configurations removed only because a filter was disabled get the
    value the filter asserts (zero contribution) so the result is
    unchanged.
    """
    data = data or default_data()
    disabled = set(disabled_filters)
    W = curve(GENUS_C)
    configs, removed = prune(candidate_configurations(W), W, disabled)
    _, removed_all = prune(candidate_configurations(W), W)
    excluded_by_default = {c for cs in removed_all.values() for c in cs}

    Vs, Wc, rs = formal_surface_pair(GENUS_C, SELF_INT, "S4")
    Vp, _, rp = formal_surface_pair(GENUS_C, SELF_INT, "P")
    lat_s, lat_p = line_lattice("S4", H_DOT_C), line_lattice("P", H_DOT_C)
    ctx_s = PairContext(rs, lat_s, space="S4/C4", absolute_space="S4", bubble_space="P/Dinf")
    ctx_p = PairContext(rp, lat_p, space="P/D0", absolute_space="P", bubble_space="P/Dinf")

    oracles = OracleTable()
    oracles.add_rule(lambda k: k.species is Species.ABSOLUTE and k.space == "S4",
                     data.s4_absolute.value, data.s4_absolute.provenance, data.s4_absolute.note)
    equations: list[Equation] = []
    diagnostics: list[str] = []
    s_keys: dict = {}
    p_keys: dict = {}

    def pair_key(space, lat, g, mu):
        return InvariantKey.make(Species.RELATIVE_PAIR, g, (1,), nu=mu, space=space, lattice=lat, basis=Wc)

    relative = [c for c in configs if c.beta1 == "H"]
    queue_s, queue_p = [], []
    for c in relative:
        s_keys[c.mu] = pair_key("S4/C4", lat_s, c.g1, c.mu)
        p_keys[c.mu] = pair_key("P/D0", lat_p, c.g1, c.mu)
        queue_s.append(s_keys[c.mu])
        queue_p.append(p_keys[c.mu])

    def bubble_value(key) -> tuple[Fraction, str, str]:
        shape = shape_of(key.nu, Wc)
        if key.g == 3 and shape in data.bubble:
            b = data.bubble[shape]
            return b.value, b.provenance, b.note
        if key.g == 4:
            return data.genus4_relative.value, data.genus4_relative.provenance, data.genus4_relative.note
        return Fraction(0), "filter-consistent", "configuration outside the printed list"

    def close(queue, ctx):
        seen = set()
        while queue:
            k = queue.pop()
            if k in seen:
                continue
            seen.add(k)
            eq = theorem2_equation(k, ctx, reduce_divisor=True)
            equations.append(eq)
            bad = triangularity_check(eq)
            if bad:
                diagnostics.append(f"not triangular: {format_key(k)} vs {bad}")
            v, prov, note = bubble_value(k)
            for _, ref in eq.oracle_terms:
                oracles.set(ref.name, v, prov, note)
            for _, t in eq.terms:
                if t.species is Species.RELATIVE_PAIR and t not in seen:
                    queue.append(t)

    close(list(queue_s), ctx_s)

    if data.p_absolute is None:
        for mu, k in p_keys.items():
            shape = shape_of(mu, Wc)
            if k.g == 3 and shape in data.p_relative:
                imp = data.p_relative[shape]
                oracles.set(k, imp.value, imp.provenance, imp.note)
            else:
                v, prov, note = bubble_value(k)
                oracles.set(k, v, prov, note)
    else:
        close(list(queue_p), ctx_p)
        for mu, k in p_keys.items():
            shape = shape_of(mu, Wc)
            ins = _printed_order_insertions(mu, Wc)
            absk, sign = InvariantKey.build(Species.ABSOLUTE, k.g, (1,), ins, space="P",
                                            lattice=lat_p, basis=Vp)
            if k.g == 3 and shape in data.p_absolute:
                oracles.set(absk, sign * data.p_absolute[shape], "user", "P absolute input")
        # genus 4 and closure keys on P: relative values are imported
        for eq in [e for e in equations if e.principal.space == "P/D0"]:
            for _, t in eq.terms:
                if t.species is Species.ABSOLUTE and t not in oracles:
                    oracles.set(t, 0, "filter-consistent", "absolute input not in the printed list")
        for eq in [e for e in equations if e.principal.space == "P/D0" and e.principal.g == 4]:
            equations.remove(eq)
            oracles.set(eq.principal, data.genus4_relative.value, data.genus4_relative.provenance,
                        data.genus4_relative.note)

    # B side slots
    def b_slot(c: Configuration) -> Slot:
        return Slot.of(f"B/C4[{format_partition(c.mu)}]", kind="B/C4", g=c.g2)

    for c in relative:
        shape = shape_of(c.mu, Wc)
        if c in excluded_by_default:
            oracles.set(b_slot(c).name, 0, "filter-consistent", "excluded configuration contributes 0")
        elif shape in data.b_values and c.g1 == 3:
            imp = data.b_values[shape]
            oracles.set(b_slot(c).name, imp.value, imp.provenance, imp.note)

    lat_b = line_lattice("B", 0)
    whole_b = InvariantKey.make(Species.RELATIVE_PAIR, TOTAL_GENUS, (1,), space="B/C4", lattice=lat_b)
    target = InvariantKey.make(Species.ABSOLUTE, TOTAL_GENUS, (1,), space="S5")
    oracles.set("B:absolute", data.b_absolute.value, data.b_absolute.provenance, data.b_absolute.note)

    # 1 = <1>^B = whole-in-B + sum_mu <1|mu>^{P/D0} <mu^v|1>^{B/C4}
    blow_terms = tuple((Coeff(-1, (b_slot(c),)), p_keys[c.mu]) for c in relative)
    equations.append(Equation(whole_b, 1, blow_terms, ((Coeff(1), OracleRef("B:absolute")),),
                              meta={"relation": "blow-up degeneration along C4"}))
    master_terms = [(Coeff(1), whole_b)] + [(Coeff(1, (b_slot(c),)), s_keys[c.mu]) for c in relative]
    equations.append(Equation(target, 1, tuple(master_terms), (),
                              meta={"relation": "degeneration of S5 along C4"}))
    diagnostics += _printed_coefficient_check(equations, Wc)
    return QuinticSystem(equations, oracles, configs, removed, s_keys, p_keys, target, whole_b,
                         diagnostics, data)


_PRINTED_LOWER = {"mu1": {}, "mu2": {"mu1": 1}, "mu3": {"mu2": 2, "mu1": 1}}


def _printed_coefficient_check(equations: list[Equation], W) -> list[str]:
    """Compare generated lower-term coefficients with the printed K3-pair equations."""
    out = []
    for eq in equations:
        k = eq.principal
        if k.space != "S4/C4" or k.g != 3:
            continue
        shape = shape_of(k.nu, W)
        if shape not in _PRINTED_LOWER:
            continue
        got: Counter = Counter()
        for c, t in eq.terms:
            if t.species is Species.RELATIVE_PAIR:
                got[shape_of(t.nu, W)] += -c.value / eq.principal_coeff
        want = Counter({s: Fraction(v) for s, v in _PRINTED_LOWER[shape].items()})
        if got != want:
            out.append(f"{shape}: generated lower coefficients {dict(got)} differ from printed {dict(want)}")
    return out


def solve_section33(system: QuinticSystem | None = None) -> Solution:
    system = system or build_section33_system()
    return solve(system.equations, system.oracles)


def assemble_final(solution: Solution, system: QuinticSystem | None = None) -> dict:
    """Regroup the solved target as ``1 + sum_i m_i (S_i - P_i) B_i``."""
    system = system or build_section33_system()
    W = curve(GENUS_C)
    groups: dict[str, dict] = {}
    for c in system.configs:
        if c.beta1 != "H":
            continue
        shape = shape_of(c.mu, W)
        s = solution.values[system.s_keys[c.mu]]
        pk = system.p_keys[c.mu]
        p = solution.values[pk] if pk in solution.values else system.oracles.lookup(pk).value
        if s == 0 and p == 0:
            b = Fraction(0)
        else:
            e = system.oracles.lookup(Slot.of(f"B/C4[{format_partition(c.mu)}]", kind="B/C4", g=c.g2))
            if e is None:
                raise SolverError(f"no B/C4 value for {format_partition(c.mu)}")
            b = e.value
        grp = groups.setdefault(shape, {"multiplicity": 0, "values": set(), "contribution": Fraction(0)})
        grp["multiplicity"] += 1
        grp["values"].add((s, p, b))
        grp["contribution"] += (s - p) * b
    total = system.oracles.lookup(OracleRef("B:absolute")).value
    rows = []
    for shape in sorted(groups):
        g = groups[shape]
        # labelings of one shape share values; "other" may mix them
        s, p, b = next(iter(g["values"])) if len(g["values"]) == 1 else (None, None, None)
        total += g["contribution"]
        rows.append({"shape": shape, "multiplicity": g["multiplicity"], "S4/C4": s, "P/D0": p,
                     "B/C4": b, "contribution": g["contribution"]})
    solved = solution.values[system.target]
    if total != solved:
        raise SolverError(f"regrouped value {total} differs from solved value {solved}")
    return {"rows": rows, "result": solved, "whole_b": solution.values[system.whole_b],
            "seiberg_witten": SW_EXPECTED}


def _fmt(q) -> str:
    if q is None:
        return "mixed"
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def report(data: Section33Data | None = None, disabled_filters: Iterable[str] = ()) -> str:
    """Text report: pruning, equations, solved values, final assembly."""
    system = build_section33_system(data, disabled_filters)
    sol = solve(system.equations, system.oracles)
    fin = assemble_final(sol, system)
    W = curve(GENUS_C)
    lines = [f"mode = {system.data.mode}", "# pruning"]
    for r in EXCLUSIONS:
        lines.append(f"filter {r.name} [{r.provenance}] removed {len(system.removed[r.name])}: {r.note}")
    lines.append(f"surviving configurations = {len(system.configs)}")
    for c in system.configs:
        lines.append(f"  {shape_of(c.mu, W) if c.beta1 == 'H' else 'whole-B'}: {c.label}")
    lines.append("# equations")
    for eq in system.equations:
        lines.append(str(eq))
    lines.append("# imported values")
    for name in sorted(system.oracles.entries):
        e = system.oracles.entries[name]
        lines.append(f"{name} = {_fmt(e.value)} [{e.provenance}] {e.note}".rstrip())
    lines.append("# solved")
    for k in sol.order:
        lines.append(f"{format_key(k)} = {_fmt(sol.values[k])}")
    for d in system.diagnostics:
        lines.append(f"diagnostic: {d}")
    lines.append("# assembly")
    for row in fin["rows"]:
        lines.append(f"{row['shape']}: multiplicity {row['multiplicity']}, S4/C4 {_fmt(row['S4/C4'])}, "
                     f"P/D0 {_fmt(row['P/D0'])}, B/C4 {_fmt(row['B/C4'])}, "
                     f"contribution {_fmt(row['contribution'])}")
    lines.append(f"whole curve in B = {_fmt(fin['whole_b'])}")
    lines.append(f"Seiberg-Witten (recorded) = {_fmt(fin['seiberg_witten'])}")
    lines.append(f"result = {_fmt(fin['result'])}")
    return "\n".join(lines) + "\n"
