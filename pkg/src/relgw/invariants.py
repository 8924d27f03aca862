"""Canonical keys for brackets and the partial orders on them."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .cohomology import GradedBasis
from .partitions import Cmp, WeightedPart, WeightedPartition, format_partition, lex_compare, parse_partition

__all__ = [
    "InvariantError",
    "Species",
    "CurveLattice",
    "hirzebruch_lattice",
    "point_bundle_lattice",
    "line_lattice",
    "Insertion",
    "InvariantKey",
    "Verdict",
    "circ_less_typeII",
    "circ_less_pair",
    "primary_less",
    "diagnose",
    "Bounds",
    "weighted_partitions",
    "downset",
    "enumerate_keys",
    "comparator_for",
    "format_key",
    "parse_key",
]


class InvariantError(ValueError):
    pass


class Species(str, Enum):
    TYPE_I_D0 = "TypeI_D0"
    TYPE_I_DINF = "TypeI_Dinf"
    TYPE_II = "TypeII"
    RUBBER = "Rubber"
    ABSOLUTE = "Absolute"
    RELATIVE_PAIR = "RelativePair"


# ---------------------------------------------------------------------------
# curve classes

@dataclass(frozen=True)
class CurveLattice:
    """Integer curve classes with an effective cone and linear intersection forms.

    ``generators`` span the effective cone.  ``height`` must be positive on
    every generator; it bounds the search in :meth:`is_effective`.
    ``forms`` maps a divisor name (``D0``, ``Dinf``, ``W``, ``pi``...) to an
    integer covector.  ``pi`` is the pushforward to the base; a zero value
    marks a fiber class.
    """

    name: str
    rank: int
    generators: tuple[tuple[int, ...], ...]
    height: tuple[int, ...]
    forms: Mapping[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "forms", dict(self.forms))
        for g in self.generators:
            if len(g) != self.rank or self._h(g) <= 0:
                raise InvariantError(f"generator {g} needs positive height")

    def __hash__(self):
        return hash((self.name, self.rank, self.generators))

    def _h(self, v) -> int:
        return sum(a * b for a, b in zip(self.height, v))

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def integral(self, beta: Sequence[int], divisor: str) -> int:
        try:
            form = self.forms[divisor]
        except KeyError:
            raise InvariantError(f"lattice {self.name} has no form {divisor!r}") from None
        return sum(a * b for a, b in zip(form, beta))

    def pushforward_nonzero(self, beta) -> bool:
        if "pi" not in self.forms:
            return True
        return any(self.pi_vector(beta))

    def pi_vector(self, beta) -> tuple[int, ...]:
        if "pi" in self.forms:
            return (self.integral(beta, "pi"),)
        return tuple(beta)

    def is_effective(self, beta: Sequence[int]) -> bool:
        beta = tuple(beta)
        if beta == self.zero():
            return True
        return any(True for _ in self._decompositions(beta, 0))

    def _decompositions(self, beta, start):
        if all(x == 0 for x in beta):
            yield ()
            return
        if self._h(beta) <= 0:
            return
        for i in range(start, len(self.generators)):
            g = self.generators[i]
            rest = tuple(a - b for a, b in zip(beta, g))
            if self._h(rest) < 0:
                continue
            for d in self._decompositions(rest, i):
                yield (i,) + d

    def less(self, a, b) -> bool:
        """``a < b``: ``b - a`` is a nonzero effective class."""
        diff = tuple(y - x for x, y in zip(a, b))
        return any(diff) and self.is_effective(diff)

    def effective_below(self, beta) -> list[tuple[int, ...]]:
        """All effective ``b`` with ``beta - b`` effective (including 0 and beta)."""
        out = {self.zero()}
        frontier = [self.zero()]
        while frontier:
            nxt = []
            for v in frontier:
                for g in self.generators:
                    w = tuple(a + b for a, b in zip(v, g))
                    if w not in out and self.is_effective(tuple(y - x for x, y in zip(w, beta))):
                        out.add(w)
                        nxt.append(w)
            frontier = nxt
        return sorted(out)

    def effective_up_to(self, h: int) -> list[tuple[int, ...]]:
        """Effective classes of height at most ``h``."""
        out = {self.zero()}
        frontier = [self.zero()]
        while frontier:
            nxt = []
            for v in frontier:
                for g in self.generators:
                    w = tuple(a + b for a, b in zip(v, g))
                    if w not in out and self._h(w) <= h:
                        out.add(w)
                        nxt.append(w)
            frontier = nxt
        return sorted(out)

    def format(self, beta) -> str:
        return "(" + ",".join(str(x) for x in beta) + ")"


def hirzebruch_lattice(k: int) -> CurveLattice:
    """``P(O(k) + O)`` over P^1 with beta = a F + b S0, S0 the section D0.

    ``D0 . F = 1, D0 . S0 = -k, Dinf . F = 1, Dinf . S0 = 0``.
    """
    return CurveLattice(
        name=f"hirzebruch:{k}", rank=2,
        generators=((1, 0), (0, 1)), height=(1, 1 + max(k, 0)),
        forms={"D0": (1, -k), "Dinf": (1, 0), "pi": (0, 1)},
    )


def point_bundle_lattice() -> CurveLattice:
    """P^1 over a point; every class is a fiber multiple."""
    return CurveLattice(name="point", rank=1, generators=((1,),), height=(1,),
                        forms={"D0": (1,), "Dinf": (1,), "pi": (0,), "W": (1,)})


def line_lattice(name: str, w_degree: int) -> CurveLattice:
    """Rank one lattice ``a * L`` with ``L . W = w_degree``."""
    return CurveLattice(name=name, rank=1, generators=((1,),), height=(1,),
                        forms={"W": (w_degree,)})


# ---------------------------------------------------------------------------
# insertions and keys

@dataclass(frozen=True, order=True)
class Insertion:
    """``tau_k(factor * label)``; factor is '', 'D0' or 'Dinf'."""

    k: int
    factor: str
    label: str

    def __post_init__(self):
        if self.k < 0:
            raise InvariantError("descendent exponent must be nonnegative")
        if self.factor not in ("", "D0", "Dinf"):
            raise InvariantError(f"bad divisor factor {self.factor!r}")

    @property
    def cls_name(self) -> str:
        return f"{self.factor}*{self.label}" if self.factor else self.label

    def degree(self, basis: GradedBasis | None) -> int:
        d = basis.deg(self.label) if basis is not None else 0
        return d + (2 if self.factor else 0)

    def __str__(self):
        return f"tau{self.k}({self.cls_name})"


_EMPTY = WeightedPartition(())


def _sort_insertions(ins: Iterable[Insertion], basis: GradedBasis | None) -> tuple[tuple[Insertion, ...], int]:
    """Sort insertions canonically; returns the Koszul sign of odd swaps."""
    items = list(ins)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            if items[j - 1].degree(basis) % 2 and items[j].degree(basis) % 2:
                sign = -sign
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    return tuple(items), sign


@dataclass(frozen=True)
class InvariantKey:
    """Identifier of one bracket.

    ``space`` names the target (for example ``Y``, ``S4/C4`` or ``P/Dinf``)
    and is part of the identity.  ``basis`` (the ring the weights and
    insertion labels live in) and ``lattice`` are context only.
    """

    species: Species
    g: int
    beta: tuple[int, ...]
    omega: tuple[Insertion, ...] = ()
    distinguished: Insertion | None = None
    mu: WeightedPartition = _EMPTY
    nu: WeightedPartition = _EMPTY
    psi_inf_power: int = 0
    connected: bool = True
    space: str = ""
    lattice: CurveLattice | None = field(default=None, compare=False, repr=False)
    basis: GradedBasis | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "species", Species(self.species))
        object.__setattr__(self, "beta", tuple(self.beta))
        s = self.species
        if s is not Species.RUBBER and self.psi_inf_power:
            raise InvariantError("only rubber keys carry a Psi_inf power")
        if s in (Species.ABSOLUTE, Species.RELATIVE_PAIR) and self.mu.parts:
            raise InvariantError(f"{s.value} keys have no D0 side")
        if s in (Species.ABSOLUTE, Species.TYPE_I_D0) and self.nu.parts:
            raise InvariantError(f"{s.value} keys have no Dinf side")
        if s is Species.TYPE_I_DINF and self.mu.parts:
            raise InvariantError("TypeI_Dinf keys have no D0 side")
        if self.lattice is not None:
            lat = self.lattice
            if s in (Species.TYPE_I_D0, Species.TYPE_II, Species.RUBBER) and "D0" in lat.forms:
                if self.mu.size != lat.integral(self.beta, "D0"):
                    raise InvariantError(f"|mu| = {self.mu.size} but beta.D0 = {lat.integral(self.beta, 'D0')}")
            if s in (Species.TYPE_I_DINF, Species.TYPE_II, Species.RUBBER) and "Dinf" in lat.forms:
                if self.nu.size != lat.integral(self.beta, "Dinf"):
                    raise InvariantError(f"|nu| = {self.nu.size} but beta.Dinf = {lat.integral(self.beta, 'Dinf')}")
            if s is Species.RELATIVE_PAIR and "W" in lat.forms:
                if self.nu.size != lat.integral(self.beta, "W"):
                    raise InvariantError(f"|nu| = {self.nu.size} but beta.W = {lat.integral(self.beta, 'W')}")

    @classmethod
    def build(cls, species, g, beta, omega=(), **kw) -> tuple["InvariantKey", int]:
        """Canonicalize insertions; returns ``(key, sign)``."""
        om, sign = _sort_insertions(omega, kw.get("basis"))
        return cls(species, g, beta, om, **kw), sign

    @classmethod
    def make(cls, species, g, beta, omega=(), **kw) -> "InvariantKey":
        key, _ = cls.build(species, g, beta, omega, **kw)
        return key

    def replace(self, **kw) -> "InvariantKey":
        data = {f: getattr(self, f) for f in (
            "species", "g", "beta", "omega", "distinguished", "mu", "nu",
            "psi_inf_power", "connected", "space", "lattice", "basis")}
        data.update(kw)
        if "omega" in kw:
            data["omega"], _ = _sort_insertions(kw["omega"], data["basis"])
        return InvariantKey(**data)

    @property
    def n_omega(self) -> int:
        return len(self.omega)

    def delta_degree(self) -> int:
        if self.distinguished is None:
            raise InvariantError("key has no distinguished insertion")
        return self.basis.deg(self.distinguished.label) if self.basis else 0

    def serialize(self) -> str:
        return format_key(self)

    def __str__(self):
        return format_key(self)

    def sort_key(self):
        return format_key(self)


# ---------------------------------------------------------------------------
# orders

class Verdict(str, Enum):
    LOWER = "Lower"
    NOT_LOWER = "NotLower"


def _beta_step(a: InvariantKey, b: InvariantKey):
    """-1 if a.beta < b.beta, 0 if equal, +1 otherwise."""
    if a.beta == b.beta:
        return 0
    lat = a.lattice or b.lattice
    if lat is None:
        raise InvariantError("comparing curve classes needs a lattice")
    return -1 if lat.less(a.beta, b.beta) else 1


def _chain(steps) -> Verdict:
    for s in steps:
        v = s()
        if v < 0:
            return Verdict.LOWER
        if v > 0:
            return Verdict.NOT_LOWER
    return Verdict.NOT_LOWER


def _cmp(x, y) -> int:
    return (x > y) - (x < y)


def _lex_step(a: WeightedPartition, b: WeightedPartition) -> int:
    c = lex_compare(a, b)
    if c is Cmp.GREATER:
        return -1
    if c is Cmp.EQUAL:
        return 0
    return 1


def circ_less_typeII(a: InvariantKey, b: InvariantKey) -> Verdict:
    """Whether ``a`` is strictly lower than ``b`` among distinguished type II keys."""
    for k in (a, b):
        if k.species is not Species.TYPE_II:
            raise InvariantError(f"expected TypeII key, got {k.species.value}")
        if k.distinguished is None:
            raise InvariantError("distinguished insertion missing")
    return _chain([
        lambda: _beta_step(a, b),
        lambda: _cmp(a.g, b.g),
        lambda: _cmp(a.n_omega, b.n_omega),
        lambda: _cmp(b.mu.deg, a.mu.deg),
        lambda: _cmp(b.nu.deg, a.nu.deg),
        lambda: _cmp(b.delta_degree(), a.delta_degree()),
        lambda: _lex_step(a.nu, b.nu),
    ])


def circ_less_pair(a: InvariantKey, b: InvariantKey) -> Verdict:
    """Whether ``a`` is strictly lower than ``b`` among invariants of a pair (V, W)."""
    for k in (a, b):
        if k.species is not Species.RELATIVE_PAIR:
            raise InvariantError(f"expected RelativePair key, got {k.species.value}")
    return _chain([
        lambda: _beta_step(a, b),
        lambda: _cmp(a.g, b.g),
        lambda: _cmp(a.n_omega, b.n_omega),
        lambda: _cmp(b.nu.deg, a.nu.deg),
        lambda: _lex_step(a.nu, b.nu),
    ])


def primary_less(a: InvariantKey, b: InvariantKey) -> bool:
    s = _beta_step(a, b)
    return s < 0 or (s == 0 and a.g < b.g)


def comparator_for(species: Species):
    return {Species.TYPE_II: circ_less_typeII, Species.RELATIVE_PAIR: circ_less_pair}[Species(species)]


def diagnose(a: InvariantKey, b: InvariantKey) -> str | None:
    """Explain pairs that differ only in lex-incomparable relative data."""
    less = comparator_for(a.species)
    if a == b or less(a, b) is Verdict.LOWER or less(b, a) is Verdict.LOWER:
        return None
    if lex_compare(a.nu, b.nu) is Cmp.INCOMPARABLE:
        return f"lex-incomparable relative conditions: {format_partition(a.nu)} vs {format_partition(b.nu)}"
    return "incomparable"


# ---------------------------------------------------------------------------
# enumeration

def weighted_partitions(n: int, labels: Sequence[str], basis: GradedBasis | None = None,
                        max_length: int | None = None) -> list[WeightedPartition]:
    """Every weighted partition of ``n`` with weights from ``labels``."""
    pairs = [(m, lab) for m in range(n, 0, -1) for lab in labels]
    odd = {lab for lab in labels if basis is not None and basis.deg(lab) % 2}
    out = []

    def rec(i, left, chosen):
        if left == 0:
            out.append(WeightedPartition(chosen, basis))
            return
        if max_length is not None and len(chosen) >= max_length:
            return
        for j in range(i, len(pairs)):
            m, lab = pairs[j]
            if m > left:
                continue
            if lab in odd and any(p.mult == m and p.weight == lab for p in chosen):
                continue
            rec(j, left - m, chosen + [WeightedPart(m, lab)])

    rec(0, n, [])
    return sorted(set(out), key=format_partition)


@dataclass(frozen=True)
class Bounds:
    """Finite window for downset enumeration."""

    max_genus: int
    max_omega: int
    max_k: int
    omega_classes: tuple[tuple[str, str], ...] = ()  # (factor, label)
    distinguished_labels: tuple[str, ...] = ()
    weight_labels: tuple[str, ...] = ()


def _omegas(bounds: Bounds):
    ins = [Insertion(k, f, lab) for k in range(bounds.max_k + 1) for f, lab in bounds.omega_classes]
    for n in range(bounds.max_omega + 1):
        yield from itertools.combinations_with_replacement(ins, n)


def enumerate_keys(template: InvariantKey, bounds: Bounds) -> list[InvariantKey]:
    """All keys of the template's species inside the bounds with class <= template's."""
    lat, basis = template.lattice, template.basis
    if lat is None:
        raise InvariantError("downset needs curve-class generator data")
    labels = bounds.weight_labels or (basis.labels if basis else ("Id",))
    out = []
    for beta in lat.effective_below(template.beta):
        for g in range(0, bounds.max_genus + 1):
            for om in _omegas(bounds):
                if template.species is Species.TYPE_II:
                    n0, ninf = lat.integral(beta, "D0"), lat.integral(beta, "Dinf")
                    if n0 < 0 or ninf < 0:
                        continue
                    for mu in weighted_partitions(n0, labels, basis):
                        for nu in weighted_partitions(ninf, labels, basis):
                            for d in bounds.distinguished_labels:
                                try:
                                    out.append(InvariantKey.make(
                                        Species.TYPE_II, g, beta, om, distinguished=Insertion(0, "D0", d),
                                        mu=mu, nu=nu, space=template.space, lattice=lat, basis=basis))
                                except InvariantError:
                                    pass
                elif template.species is Species.RELATIVE_PAIR:
                    nw = lat.integral(beta, "W")
                    if nw < 0:
                        continue
                    for nu in weighted_partitions(nw, labels, basis):
                        out.append(InvariantKey.make(
                            Species.RELATIVE_PAIR, g, beta, om, nu=nu,
                            space=template.space, lattice=lat, basis=basis))
                else:
                    raise InvariantError(f"downset is not defined for {template.species.value}")
    return out


def downset(key: InvariantKey, bounds: Bounds) -> frozenset[InvariantKey]:
    """Keys strictly lower than ``key`` inside ``bounds``."""
    less = comparator_for(key.species)
    return frozenset(k for k in enumerate_keys(key, bounds) if less(k, key) is Verdict.LOWER)


# ---------------------------------------------------------------------------
# text form

def _fmt_ins(ins: Sequence[Insertion]) -> str:
    return "[" + ",".join(str(i) for i in ins) + "]"


def format_key(k: InvariantKey) -> str:
    fields = [f"g={k.g}", "beta=" + "(" + ",".join(str(x) for x in k.beta) + ")"]
    if k.species in (Species.TYPE_I_D0, Species.TYPE_II, Species.RUBBER):
        fields.append("mu=" + format_partition(k.mu))
    if k.distinguished is not None:
        fields.append(f"dist={k.distinguished}")
    fields.append("omega=" + _fmt_ins(k.omega))
    if k.species in (Species.TYPE_I_DINF, Species.TYPE_II, Species.RUBBER, Species.RELATIVE_PAIR):
        fields.append("nu=" + format_partition(k.nu))
    if k.species is Species.RUBBER:
        fields.append(f"psi={k.psi_inf_power}")
    if not k.connected:
        fields.append("conn=0")
    if k.space:
        fields.append(f"space={k.space}")
    return f"{k.species.value}[" + ",".join(fields) + "]"


_INS = re.compile(r"tau(\d+)\((?:(D0|Dinf)\*)?([^()\[\],]+)\)")


def _split_fields(body: str) -> list[str]:
    out, depth, cur = [], 0, []
    in_str = False
    for ch in body:
        if ch == '"':
            in_str = not in_str
        if not in_str:
            if ch in "([{":
                depth += 1
            elif ch in ")]}":
                depth -= 1
            elif ch == "," and depth == 0:
                out.append("".join(cur))
                cur = []
                continue
        cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def _parse_ins(text: str) -> Insertion:
    m = _INS.fullmatch(text.strip())
    if not m:
        raise InvariantError(f"bad insertion {text!r}")
    return Insertion(int(m.group(1)), m.group(2) or "", m.group(3))


def parse_key(text: str, lattice: CurveLattice | None = None,
              basis: GradedBasis | None = None) -> InvariantKey:
    """Inverse of :func:`format_key`."""
    m = re.fullmatch(r"\s*(\w+)\[(.*)\]\s*", text, re.S)
    if not m:
        raise InvariantError(f"cannot parse key {text!r}")
    try:
        species = Species(m.group(1))
    except ValueError:
        raise InvariantError(f"unknown species {m.group(1)!r}") from None
    kw: dict = {"species": species, "lattice": lattice, "basis": basis}
    for f in _split_fields(m.group(2)):
        name, _, val = f.partition("=")
        if name == "g":
            kw["g"] = int(val)
        elif name == "beta":
            kw["beta"] = tuple(int(x) for x in val.strip("()").split(",") if x != "")
        elif name in ("mu", "nu"):
            kw[name] = parse_partition(val, basis)
        elif name == "dist":
            kw["distinguished"] = _parse_ins(val)
        elif name == "omega":
            inner = val.strip()[1:-1]
            kw["omega"] = tuple(_parse_ins(x) for x in _split_fields(inner)) if inner else ()
        elif name == "psi":
            kw["psi_inf_power"] = int(val)
        elif name == "conn":
            kw["connected"] = val != "0"
        elif name == "space":
            kw["space"] = val
        else:
            raise InvariantError(f"unknown key field {name!r}")
    return InvariantKey(**kw)
