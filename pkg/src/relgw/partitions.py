"""Cohomology weighted partitions.

A weighted partition is an unordered multiset of pairs ``(mult, label)``.
It is stored in standard order: decreasing multiplicity, then decreasing
basis index of the weight.  Reordering odd weights into that order costs a
Koszul sign, which the constructor reports separately.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .cohomology import GradedBasis

__all__ = [
    "PartitionError",
    "WeightedPart",
    "WeightedPartition",
    "Cmp",
    "standard_order",
    "size_compare",
    "lex_compare",
    "parse_partition",
    "format_partition",
    "FREE_IDENTITY",
]

FREE_IDENTITY = "Id"


class PartitionError(ValueError):
    pass


class Cmp(Enum):
    GREATER = "Greater"
    LESS = "Less"
    EQUAL = "Equal"
    EQUAL_SIZE = "EqualSize"
    INCOMPARABLE = "Incomparable"

    def flip(self) -> "Cmp":
        return {Cmp.GREATER: Cmp.LESS, Cmp.LESS: Cmp.GREATER}.get(self, self)


@dataclass(frozen=True, order=True)
class WeightedPart:
    mult: int
    weight: str

    def __post_init__(self):
        if not isinstance(self.mult, int) or self.mult < 1:
            raise PartitionError(f"multiplicity must be a positive integer, got {self.mult!r}")


class _Context:
    """Degree and index lookups; without a basis every label is even and sorted by name."""

    def __init__(self, basis: GradedBasis | None):
        self.basis = basis

    def deg(self, label: str) -> int:
        return self.basis.deg(label) if self.basis is not None else 0

    def key(self, label: str):
        return self.basis.index(label) if self.basis is not None else label

    @property
    def identity(self) -> str:
        return self.basis.identity if self.basis is not None else FREE_IDENTITY


def _sort_with_sign(parts: Sequence[WeightedPart], ctx: _Context) -> tuple[list[WeightedPart], int]:
    keyed = [((p.mult, ctx.key(p.weight)), p) for p in parts]
    # stable insertion sort counting transpositions of odd weights
    sign = 1
    out = list(keyed)
    for i in range(1, len(out)):
        j = i
        while j > 0 and out[j - 1][0] < out[j][0]:
            if ctx.deg(out[j - 1][1].weight) % 2 and ctx.deg(out[j][1].weight) % 2:
                sign = -sign
            out[j - 1], out[j] = out[j], out[j - 1]
            j -= 1
    return [p for _, p in out], sign


def standard_order(parts: Iterable, basis: GradedBasis | None = None) -> list[WeightedPart]:
    """Sort parts by decreasing multiplicity, then decreasing weight index."""
    ps = [p if isinstance(p, WeightedPart) else WeightedPart(*p) for p in parts]
    return _sort_with_sign(ps, _Context(basis))[0]


class WeightedPartition:
    """Immutable weighted partition in standard order.

    ``WeightedPartition.build(parts, basis)`` returns ``(partition, sign)``;
    the plain constructor drops the sign.
    """

    __slots__ = ("parts", "basis", "_ctx")

    def __init__(self, parts: Iterable = (), basis: GradedBasis | None = None):
        p, _ = self._prepare(parts, basis)
        object.__setattr__(self, "parts", tuple(p))
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_ctx", _Context(basis))

    def __setattr__(self, *_):
        raise AttributeError("WeightedPartition is immutable")

    @staticmethod
    def _prepare(parts, basis):
        ctx = _Context(basis)
        ps = [p if isinstance(p, WeightedPart) else WeightedPart(*p) for p in parts]
        for p in ps:
            ctx.deg(p.weight)
        c = Counter(ps)
        for p, n in c.items():
            if n > 1 and ctx.deg(p.weight) % 2:
                raise PartitionError(f"odd weight part {p.mult},{p.weight} repeated; bracket vanishes")
        return _sort_with_sign(ps, ctx)

    @classmethod
    def build(cls, parts: Iterable, basis: GradedBasis | None = None) -> tuple["WeightedPartition", int]:
        _, sign = cls._prepare(parts, basis)
        return cls(parts, basis), sign

    # basic protocol -------------------------------------------------------
    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __eq__(self, other):
        return isinstance(other, WeightedPartition) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        return format_partition(self)

    def __lt__(self, other):
        return self.parts < other.parts

    # constants --------------------------------------------------------------
    @property
    def size(self) -> int:
        return sum(p.mult for p in self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def deg(self) -> int:
        return sum(self._ctx.deg(p.weight) for p in self.parts)

    @property
    def n_id(self) -> int:
        ident = self._ctx.identity
        return sum(1 for p in self.parts if p.mult == 1 and p.weight == ident)

    @property
    def aut_order(self) -> int:
        return math.prod(math.factorial(n) for n in Counter(self.parts).values())

    @property
    def zee(self) -> int:
        return math.prod(p.mult for p in self.parts) * self.aut_order

    def constants(self) -> dict:
        return {"deg": self.deg, "Id": self.n_id, "aut_order": self.aut_order,
                "zee": self.zee, "length": self.length, "size": self.size}

    def mults(self) -> tuple[int, ...]:
        return tuple(p.mult for p in self.parts)

    def weights(self) -> tuple[str, ...]:
        return tuple(p.weight for p in self.parts)

    def is_odd_free(self) -> bool:
        return all(self._ctx.deg(p.weight) % 2 == 0 for p in self.parts)

    # operations -------------------------------------------------------------
    def dual(self) -> tuple["WeightedPartition", int]:
        """Replace every weight by its Poincare dual; returns ``(dual, sign)``.

        The sign collects the scalar signs of the duals and the Koszul sign
        of restoring standard order.
        """
        if self.basis is None:
            raise PartitionError("dual needs a cohomology basis")
        sign = 1
        parts = []
        for p in self.parts:
            s, lab = self.basis.dual_label(p.weight)
            sign *= s
            parts.append(WeightedPart(p.mult, lab))
        out, s2 = WeightedPartition.build(parts, self.basis)
        return out, sign * s2

    def with_basis(self, basis: GradedBasis) -> "WeightedPartition":
        return WeightedPartition(self.parts, basis)

    def remove(self, sub: "WeightedPartition") -> "WeightedPartition":
        c = Counter(self.parts)
        c.subtract(sub.parts)
        if any(v < 0 for v in c.values()):
            raise PartitionError(f"{sub} is not contained in {self}")
        return WeightedPartition(c.elements(), self.basis)

    def __add__(self, other: "WeightedPartition") -> "WeightedPartition":
        return WeightedPartition(self.parts + other.parts, self.basis or other.basis)

    def part_deg(self, p: WeightedPart) -> int:
        return self._ctx.deg(p.weight)


# orders -----------------------------------------------------------------

def size_compare(a: WeightedPart, b: WeightedPart, basis: GradedBasis | None = None) -> Cmp:
    ctx = _Context(basis)
    ka, kb = (a.mult, ctx.deg(a.weight)), (b.mult, ctx.deg(b.weight))
    if ka > kb:
        return Cmp.GREATER
    if ka < kb:
        return Cmp.LESS
    return Cmp.EQUAL if a.weight == b.weight else Cmp.EQUAL_SIZE


def _size_sorted(mu: WeightedPartition) -> list[WeightedPart]:
    ctx = mu._ctx
    return sorted(mu.parts, key=lambda p: (p.mult, ctx.deg(p.weight), ctx.key(p.weight)), reverse=True)


def lex_compare(mu: WeightedPartition, nu: WeightedPartition) -> Cmp:
    """Lexicographic comparison of size-sorted parts.

    The first pair that is not identical decides.  A deciding pair of equal
    size but different labels gives ``Incomparable``.  A proper prefix is
    smaller.
    """
    basis = mu.basis or nu.basis
    a, b = _size_sorted(mu.with_basis(basis) if basis else mu), _size_sorted(
        nu.with_basis(basis) if basis else nu)
    for x, y in zip(a, b):
        c = size_compare(x, y, basis)
        if c is Cmp.EQUAL:
            continue
        if c is Cmp.EQUAL_SIZE:
            return Cmp.INCOMPARABLE
        return c
    if len(a) == len(b):
        return Cmp.EQUAL
    return Cmp.GREATER if len(a) > len(b) else Cmp.LESS


# text syntax -------------------------------------------------------------

_PART = re.compile(r'\(\s*(\d+)\s*,\s*"((?:[^"\\]|\\.)*)"\s*\)')


def format_partition(mu: WeightedPartition | Iterable[WeightedPart]) -> str:
    parts = mu.parts if isinstance(mu, WeightedPartition) else tuple(mu)
    return "{" + ",".join(f'({p.mult},"{p.weight}")' for p in parts) + "}"


def parse_partition(text: str, basis: GradedBasis | None = None) -> WeightedPartition:
    """Parse ``{(2,"d1"),(1,"Id")}``.

    The literal label ``Id`` is mapped to the basis identity when a basis
    is given.
    """
    s = text.strip()
    if not (s.startswith("{") and s.endswith("}")):
        raise PartitionError(f"partition must be wrapped in braces: {text!r}")
    body = s[1:-1].strip()
    parts = []
    pos = 0
    while pos < len(body):
        m = _PART.match(body, pos)
        if not m:
            raise PartitionError(f"cannot parse partition near {body[pos:]!r}")
        label = m.group(2)
        if basis is not None and label == FREE_IDENTITY and label not in basis:
            label = basis.identity
        parts.append(WeightedPart(int(m.group(1)), label))
        pos = m.end()
        while pos < len(body) and body[pos] in " ,":
            pos += 1
    return WeightedPartition(parts, basis)
