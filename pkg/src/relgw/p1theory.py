"""Symmetric group characters and Hurwitz numbers.

Genus-0 fiber-class constants are evaluated here through the
Gromov-Witten/Hurwitz correspondence.  Only the leading term of each
completed cycle can contribute to a connected genus-0 count, so the
evaluations reduce to classical Hurwitz numbers.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

__all__ = [
    "P1Error",
    "Unresolved",
    "PlainPartition",
    "partitions_of",
    "character",
    "class_size",
    "dimension",
    "CharacterTable",
    "frobenius_count",
    "transitive_count",
    "hurwitz_number",
    "brute_force_count",
    "cap_invariant",
    "fiber_constant",
]


class P1Error(ValueError):
    pass


@dataclass(frozen=True)
class Unresolved:
    """Marker for a fiber constant outside genus-0 Hurwitz reach."""

    reason: str

    def __bool__(self):
        return False


Partition = tuple[int, ...]


def PlainPartition(parts: Iterable[int]) -> Partition:
    p = tuple(sorted((int(x) for x in parts), reverse=True))
    if any(x <= 0 for x in p):
        raise P1Error(f"parts must be positive: {p}")
    return p


@lru_cache(maxsize=None)
def partitions_of(n: int, max_part: int | None = None) -> tuple[Partition, ...]:
    """All partitions of n in reverse lexicographic order."""
    if max_part is None:
        max_part = n
    if n == 0:
        return ((),)
    out = []
    for k in range(min(n, max_part), 0, -1):
        for rest in partitions_of(n - k, k):
            out.append((k,) + rest)
    return tuple(out)


# Murnaghan-Nakayama via beta-sets: removing a border strip of length r
# is moving a bead from position x to x - r; the sign counts beads jumped.

@lru_cache(maxsize=None)
def _mn(beads: tuple[int, ...], rho: Partition) -> int:
    if not rho:
        return 1
    r, rest = rho[0], rho[1:]
    bead_set = set(beads)
    total = 0
    for x in beads:
        y = x - r
        if y < 0 or y in bead_set:
            continue
        jumped = sum(1 for b in beads if y < b < x)
        nb = tuple(sorted((bead_set - {x}) | {y}, reverse=True))
        total += (-1) ** jumped * _mn(nb, rest)
    return total


def character(lam: Sequence[int], rho: Sequence[int]) -> int:
    """Irreducible character ``chi^lam`` on the class of cycle type ``rho``.

    >>> character((2, 1), (3,))
    -1
    """
    lam, rho = PlainPartition(lam), PlainPartition(rho)
    if sum(lam) != sum(rho):
        raise P1Error(f"size mismatch: |{lam}| != |{rho}|")
    n = len(lam)
    beads = tuple(lam[i] + (n - 1 - i) for i in range(n))
    return _mn(beads, rho)


def class_size(rho: Sequence[int]) -> int:
    rho = PlainPartition(rho)
    n = sum(rho)
    c = Counter(rho)
    return math.factorial(n) // math.prod(k ** m * math.factorial(m) for k, m in c.items())


def dimension(lam: Sequence[int]) -> int:
    return character(lam, (1,) * sum(lam))


class CharacterTable:
    """Full character table of ``S_n``."""

    def __init__(self, n: int):
        self.n = n
        self.irreps = partitions_of(n)
        self.classes = partitions_of(n)
        self.values = {(l, r): character(l, r) for l in self.irreps for r in self.classes}
        self.class_sizes = {r: class_size(r) for r in self.classes}
        self.dimensions = {l: self.values[(l, (1,) * n)] for l in self.irreps}

    def column_orthogonality_defects(self) -> list:
        bad = []
        f = math.factorial(self.n)
        for r1 in self.classes:
            for r2 in self.classes:
                s = sum(self.values[(l, r1)] * self.values[(l, r2)] for l in self.irreps)
                want = f // self.class_sizes[r1] if r1 == r2 else 0
                if s != want:
                    bad.append((r1, r2))
        return bad

    def row_orthogonality_defects(self) -> list:
        bad = []
        f = math.factorial(self.n)
        for l1 in self.irreps:
            for l2 in self.irreps:
                s = sum(self.class_sizes[r] * self.values[(l1, r)] * self.values[(l2, r)]
                        for r in self.classes)
                if s != (f if l1 == l2 else 0):
                    bad.append((l1, l2))
        return bad


# counting -----------------------------------------------------------------

def _check_profiles(d: int, profiles) -> tuple[Partition, ...]:
    ps = tuple(PlainPartition(p) for p in profiles)
    for p in ps:
        if sum(p) != d:
            raise P1Error(f"profile {p} does not have size {d}")
    return ps


@lru_cache(maxsize=None)
def _frobenius(d: int, profiles: tuple[Partition, ...]) -> int:
    if d == 0:
        return 1
    r = len(profiles)
    total = Fraction(0)
    for lam in partitions_of(d):
        dim = dimension(lam)
        total += Fraction(math.prod(character(lam, p) for p in profiles)) * Fraction(dim) ** (2 - r)
    total *= Fraction(math.prod(class_size(p) for p in profiles), math.factorial(d))
    assert total.denominator == 1
    return int(total)


def frobenius_count(d: int, profiles: Sequence[Sequence[int]]) -> int:
    """Number of tuples ``(s_1, ..., s_r)`` with ``s_i`` of type ``profiles[i]`` and product 1."""
    return _frobenius(d, _check_profiles(d, profiles))


def _sub_multisets(p: Partition, size: int):
    """Distinct sub-multisets of ``p`` with the given sum, paired with the complement."""
    c = sorted(Counter(p).items(), reverse=True)
    out = []

    def rec(i, left, chosen):
        if i == len(c):
            if left == 0:
                sub = tuple(sorted(chosen, reverse=True))
                rest = Counter(p)
                rest.subtract(sub)
                comp = tuple(sorted(rest.elements(), reverse=True))
                # ways to pick those cycles: product of binomials handled by caller
                out.append((sub, comp))
            return
        k, m = c[i]
        for t in range(0, m + 1):
            if t * k > left:
                break
            rec(i + 1, left - t * k, chosen + [k] * t)

    rec(0, size, [])
    return out


@lru_cache(maxsize=None)
def _transitive(d: int, profiles: tuple[Partition, ...]) -> int:
    if d == 0:
        return 0
    total = _frobenius(d, profiles)
    for b in range(1, d):
        choices = [_sub_multisets(p, b) for p in profiles]
        for combo in itertools.product(*choices):
            alpha = tuple(s for s, _ in combo)
            rest = tuple(c for _, c in combo)
            total -= math.comb(d - 1, b - 1) * _transitive(b, alpha) * _frobenius(d - b, rest)
    return total


def transitive_count(d: int, profiles: Sequence[Sequence[int]]) -> int:
    """Number of transitive tuples with product 1 and the given cycle types."""
    return _transitive(d, _check_profiles(d, profiles))


def riemann_hurwitz_genus(d: int, profiles: Sequence[Partition]) -> Fraction:
    ram = sum(d - len(p) for p in profiles)
    return Fraction(ram - 2 * d + 2, 2)


def hurwitz_number(g: int, d: int, profiles: Sequence[Sequence[int]], connected: bool = True) -> Fraction:
    """Automorphism-weighted count of degree-d covers of P^1.

    Profiles list the ramification over distinct points.  The genus is the
    arithmetic genus of the (possibly disconnected) source; inconsistent
    genus gives 0.
    """
    if d <= 0:
        raise P1Error("degree must be positive")
    ps = _check_profiles(d, profiles)
    if riemann_hurwitz_genus(d, ps) != g:
        return Fraction(0)
    count = _transitive(d, ps) if connected else _frobenius(d, ps)
    return Fraction(count, math.factorial(d))


# brute force ---------------------------------------------------------------

def _cycle_type(perm: tuple[int, ...]) -> Partition:
    seen = [False] * len(perm)
    out = []
    for i in range(len(perm)):
        if not seen[i]:
            n = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                n += 1
            out.append(n)
    return tuple(sorted(out, reverse=True))


@lru_cache(maxsize=None)
def _class_members(d: int, rho: Partition) -> tuple[tuple[int, ...], ...]:
    return tuple(p for p in itertools.permutations(range(d)) if _cycle_type(p) == rho)


def _compose(p, q):
    # (p*q)(i) = p(q(i))
    return tuple(p[i] for i in q)


def _inverse(p):
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def _is_transitive(d, perms) -> bool:
    parent = list(range(d))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in perms:
        for i, j in enumerate(p):
            a, b = find(i), find(j)
            if a != b:
                parent[a] = b
    return len({find(i) for i in range(d)}) == 1


def brute_force_count(d: int, profiles: Sequence[Sequence[int]], connected: bool = True) -> int:
    """Direct enumeration of permutation tuples with product 1."""
    ps = _check_profiles(d, profiles)
    if not ps:
        return int(d == 1) if connected else 1
    ident = tuple(range(d))
    count = 0
    for head in itertools.product(*(_class_members(d, p) for p in ps[:-1])):
        acc = ident
        for p in head:
            acc = _compose(acc, p)
        last = _inverse(acc)
        if _cycle_type(last) != ps[-1]:
            continue
        if connected and not _is_transitive(d, head + (last,)):
            continue
        count += 1
    return count


# fiber constants ----------------------------------------------------------

def cap_invariant(d: int, exponents: Sequence[int]) -> Fraction:
    """Genus-0 relative invariant ``<(d) | prod_j tau_{a_j}(pt)>`` of P^1 relative to 0.

    Dimension forces ``sum(a_j) = d - 1``; otherwise the value is 0.  Each
    ``tau_a(pt)`` becomes the completed cycle of length ``a + 1`` over
    ``a!``; in connected genus 0 only the leading cycle survives, and a
    1-cycle contributes the factor ``d``.
    """
    a = [int(x) for x in exponents]
    if d <= 0 or any(x < 0 for x in a) or sum(a) != d - 1:
        return Fraction(0)
    profiles = [(d,)]
    coeff = Fraction(1)
    for x in a:
        coeff /= math.factorial(x)
        if x == 0:
            coeff *= d
        else:
            profiles.append((x + 1,) + (1,) * (d - x - 1))
    return coeff * hurwitz_number(0, d, profiles, connected=True)


def fiber_constant(descriptor: dict) -> Fraction | Unresolved:
    """Evaluate a fiber-constant slot descriptor.

    Recognised kinds:

    ``principal``  {"kind": "principal", "nu_mults": [...], "n_id": k, "n": n}
    ``cap``        {"kind": "cap", "d": d, "exponents": [...]}
    ``hurwitz``    {"kind": "hurwitz", "g": g, "d": d, "profiles": [...]}

    Anything with positive genus, Hodge classes or an unknown kind is
    :class:`Unresolved`.
    """
    kind = descriptor.get("kind")
    if descriptor.get("genus", 0) > 0 or descriptor.get("hodge"):
        return Unresolved("positive genus or Hodge-weighted fiber integral")
    if kind == "principal":
        c = Fraction(1)
        for m in descriptor["nu_mults"]:
            c *= Fraction(m) * cap_invariant(m, [m - 1])
        return c * Fraction(descriptor["n"]) ** descriptor.get("n_id", 0)
    if kind == "cap":
        return cap_invariant(descriptor["d"], descriptor["exponents"])
    if kind == "hurwitz":
        if descriptor.get("g", 0) != 0:
            return Unresolved("positive genus Hurwitz data")
        return hurwitz_number(0, descriptor["d"], descriptor["profiles"], True)
    return Unresolved(f"no evaluation rule for slot kind {kind!r}")
