"""Equation values shared by the generators and the solver.

An equation reads ``principal_coeff * principal = sum(c * key) + sum(o * ref)``
where each coefficient is a rational times a product of named slots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .cohomology import GradedBasis
from .invariants import CurveLattice, InvariantKey, format_key, parse_key

__all__ = ["Slot", "Coeff", "OracleRef", "Equation", "dump_equation", "load_equation"]


@dataclass(frozen=True, order=True)
class Slot:
    """Named symbolic factor, usually a fiber-class integral.

    ``data`` is a JSON object string describing the slot for evaluators.
    """

    name: str
    data: str = "{}"

    @classmethod
    def of(cls, name: str, **descriptor) -> "Slot":
        return cls(name, json.dumps(descriptor, sort_keys=True, separators=(",", ":")))

    @property
    def descriptor(self) -> dict:
        return json.loads(self.data)


@dataclass(frozen=True)
class Coeff:
    value: Fraction
    slots: tuple[Slot, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        object.__setattr__(self, "slots", tuple(sorted(self.slots)))

    def __mul__(self, other: "Coeff | int | Fraction") -> "Coeff":
        if isinstance(other, Coeff):
            return Coeff(self.value * other.value, self.slots + other.slots)
        return Coeff(self.value * Fraction(other), self.slots)

    __rmul__ = __mul__

    def __neg__(self):
        return Coeff(-self.value, self.slots)

    @property
    def is_symbolic(self) -> bool:
        return bool(self.slots)

    def __str__(self):
        s = str(self.value)
        return s if not self.slots else s + "*" + "*".join(x.name for x in self.slots)


@dataclass(frozen=True, order=True)
class OracleRef:
    """Reference to an externally supplied value (oracle table entry)."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Equation:
    principal: InvariantKey
    principal_coeff: Fraction
    terms: tuple[tuple[Coeff, InvariantKey], ...] = ()
    oracle_terms: tuple[tuple[Coeff, OracleRef], ...] = ()
    meta: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "principal_coeff", Fraction(self.principal_coeff))
        if self.principal_coeff == 0:
            from .solver import ZeroPrincipalCoefficient
            raise ZeroPrincipalCoefficient(format_key(self.principal))
        object.__setattr__(self, "terms", tuple(merge_terms(self.terms)))
        object.__setattr__(self, "oracle_terms", tuple(merge_terms(self.oracle_terms)))
        object.__setattr__(self, "meta", dict(self.meta))

    def keys(self) -> list[InvariantKey]:
        return [k for _, k in self.terms]

    def __str__(self):
        rhs = [f"{c}*{format_key(k)}" for c, k in self.terms]
        rhs += [f"{c}*<{r}>" for c, r in self.oracle_terms]
        return f"{self.principal_coeff}*{format_key(self.principal)} = " + (" + ".join(rhs) or "0")


def _sort_key(obj):
    return format_key(obj) if isinstance(obj, InvariantKey) else str(obj)


def merge_terms(terms: Iterable[tuple[Coeff, object]]) -> list[tuple[Coeff, object]]:
    """Combine like terms (same target and same slots); drop zeros; sort deterministically."""
    acc: dict = {}
    for c, t in terms:
        k = (t, c.slots)
        acc[k] = acc.get(k, Fraction(0)) + c.value
    out = [(Coeff(v, slots), t) for (t, slots), v in acc.items() if v != 0]
    out.sort(key=lambda ct: (_sort_key(ct[1]), [s.name for s in ct[0].slots]))
    return out


def _coeff_json(c: Coeff) -> dict:
    d = {"coeff": str(c.value)}
    if c.slots:
        d["slots"] = [{"name": s.name, "data": json.loads(s.data)} for s in c.slots]
    return d


def _coeff_from(d: Mapping) -> Coeff:
    slots = tuple(Slot(s["name"], json.dumps(s.get("data", {}), sort_keys=True, separators=(",", ":")))
                  for s in d.get("slots", []))
    return Coeff(Fraction(d["coeff"]), slots)


def dump_equation(eq: Equation) -> str:
    rec = {
        "principal": format_key(eq.principal),
        "principal_coeff": str(eq.principal_coeff),
        "terms": [dict(_coeff_json(c), key=format_key(k)) for c, k in eq.terms],
        "oracle_terms": [dict(_coeff_json(c), ref=r.name) for c, r in eq.oracle_terms],
    }
    if eq.meta:
        rec["meta"] = dict(eq.meta)
    return json.dumps(rec, sort_keys=True)


def load_equation(line: str, lattice: CurveLattice | None = None,
                  bases: Mapping[str, GradedBasis] | GradedBasis | None = None) -> Equation:
    """Parse one JSON-lines record.  ``bases`` maps key spaces to rings."""
    rec = json.loads(line)

    def pk(text):
        if isinstance(bases, GradedBasis) or bases is None:
            b = bases
        else:
            space = text.rsplit("space=", 1)[1].rstrip("]") if "space=" in text else ""
            b = bases.get(space) or bases.get("")
        return parse_key(text, lattice, b)

    return Equation(
        principal=pk(rec["principal"]),
        principal_coeff=Fraction(rec["principal_coeff"]),
        terms=tuple((_coeff_from(t), pk(t["key"])) for t in rec["terms"]),
        oracle_terms=tuple((_coeff_from(t), OracleRef(t["ref"])) for t in rec["oracle_terms"]),
        meta=rec.get("meta", {}),
    )
