"""Equation generation from the degeneration formula.

Two geometric contexts are supported:

* :class:`BundleContext` -- ``Y = P(L + O)`` over X, keys of type I/II.
  Relation 1 comes from degenerating Y to the normal cone of D_inf;
  Relations 2 and 2' are emitted as templates over symbolic slots.
* :class:`PairContext` -- a divisor ``W`` in ``V``.  Each relative
  invariant of (V, W) is tied to an absolute invariant of V.

Fiber-class coefficients that genus-0 Hurwitz theory reaches are exact
rationals.  All others are named :class:`~relgw.equations.Slot` atoms.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .cohomology import BundleGeometry, CohClass, GradedBasis, RestrictionData, pushforward
from .equations import Coeff, Equation, OracleRef, Slot
from .invariants import (CurveLattice, Insertion, InvariantKey, Species, Verdict,
                         circ_less_pair, circ_less_typeII, format_key, weighted_partitions)
from .p1theory import cap_invariant
from .partitions import PartitionError, WeightedPart, WeightedPartition, format_partition

__all__ = [
    "DegenerationError",
    "BundleContext",
    "PairContext",
    "SplittingTerm",
    "coefficient_C",
    "set_partitions",
    "block_expansion",
    "enumerate_splittings",
    "relation1",
    "relation2",
    "relation2prime",
    "associated_absolute",
    "theorem2_equation",
    "theorem2_system",
    "simple_class_filter",
    "triangularity_check",
]


class DegenerationError(ValueError):
    pass


@dataclass(frozen=True)
class BundleContext:
    geometry: BundleGeometry
    lattice: CurveLattice
    ample: str = "h"
    space: str = "Y"

    @property
    def base(self) -> GradedBasis:
        return self.geometry.base

    @property
    def dim_x(self) -> int:
        return self.base.dim_real


@dataclass(frozen=True)
class PairContext:
    restriction: RestrictionData
    lattice: CurveLattice
    space: str = "V/W"
    absolute_space: str = "V"
    bubble_space: str = "P/Dinf"

    @property
    def V(self) -> GradedBasis:
        return self.restriction.source

    @property
    def W(self) -> GradedBasis:
        return self.restriction.target


# ---------------------------------------------------------------------------
# combinatorics

def coefficient_C(nu: WeightedPartition, n_inf: int) -> Fraction:
    """``prod_j 1/(nu_j - 1)! * n_inf^Id(nu)``."""
    if n_inf < 0:
        raise DegenerationError("negative intersection number")
    c = Fraction(1)
    for p in nu:
        c /= math.factorial(p.mult - 1)
    return c * Fraction(n_inf) ** nu.n_id


def set_partitions(items: Sequence):
    """Set partitions of a sequence; blocks keep input order, ordered by first element."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _koszul_regroup(order: Sequence[int], odd: Sequence[bool]) -> int:
    """Sign of permuting positions ``0..n-1`` into ``order`` with odd items anticommuting."""
    sign = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j] and odd[order[i]] and odd[order[j]]:
                sign = -sign
    return sign


def _canon(parts: Sequence[tuple[int, str]], basis: GradedBasis) -> tuple[WeightedPartition, int] | None:
    try:
        return WeightedPartition.build([WeightedPart(m, w) for m, w in parts], basis)
    except PartitionError:
        return None


def block_expansion(nu: WeightedPartition, n: int, basis: GradedBasis
                    ) -> tuple[dict[WeightedPartition, Fraction], set[WeightedPartition]]:
    """Rational fiber side of the degeneration along the relative divisor.

    The parts of ``nu`` other than ``(1, Id)`` are distributed over the
    rational components.  A block ``B`` yields the part
    ``(1 + sum_B (nu_j - 1), prod_B delta_j)`` weighted by
    ``eta_k * <(eta_k) | prod tau_{nu_j - 1}(pt)>``.  Each ``(1, Id)``
    contributes ``n`` by the divisor equation, and the remaining
    intersection is padded with ``(1, Id)``.

    Returns the exact coefficients of every equality-degree ``eta``
    (including ``eta = nu``) and the set of strictly higher-degree
    ``eta`` whose coefficients are fiber integrals left symbolic.
    """
    ident = basis.identity
    parts = [p for p in nu if not (p.mult == 1 and p.weight == ident)]
    odd = [basis.is_odd(p.weight) for p in parts]
    exact: dict[WeightedPartition, Fraction] = {}
    strict: set[WeightedPartition] = set()
    nid_factor = Fraction(n) ** nu.n_id
    for blocks in set_partitions(list(range(len(parts)))):
        order = [i for b in blocks for i in b]
        sign = _koszul_regroup(order, odd)
        block_data = []
        for b in blocks:
            eta_k = 1 + sum(parts[i].mult - 1 for i in b)
            rho = basis.product_of(basis.cls(parts[i].weight) for i in b)
            pi_deg = sum(basis.deg(parts[i].weight) for i in b)
            weight = eta_k * cap_invariant(eta_k, [parts[i].mult - 1 for i in b])
            block_data.append((eta_k, rho, pi_deg, weight, b))
        pad = n - sum(d[0] for d in block_data)
        if pad < 0:
            continue
        # equality case: rho is the cup product
        for choice in itertools.product(*(d[1].items() for d in block_data)):
            coef = Fraction(sign) * nid_factor
            eta_parts = []
            for (eta_k, _, _, w, _), (lab, c) in zip(block_data, choice):
                coef *= c * w
                eta_parts.append((eta_k, lab))
            got = _canon(eta_parts + [(1, ident)] * pad, basis)
            if got is None or coef == 0:
                continue
            eta, s = got
            exact[eta] = exact.get(eta, Fraction(0)) + s * coef
        # strict case: some block carries a class of higher degree
        options = []
        for eta_k, _, pi_deg, _, _ in block_data:
            opts = []
            for lab in basis.labels:
                extra = basis.deg(lab) - pi_deg
                if extra > 0 and extra % 2 == 0 and eta_k - extra // 2 >= 1:
                    opts.append((eta_k - extra // 2, lab, True))
            opts.append((eta_k, None, False))
            options.append(opts)
        for choice in itertools.product(*options):
            if not any(c[2] for c in choice):
                continue
            per_block = []
            for (eta_k, rho, _, _, _), (e, lab, is_strict) in zip(block_data, choice):
                per_block.append([(e, lab)] if is_strict else [(e, x) for x in rho.labels()])
            for eta_parts in itertools.product(*per_block):
                pad2 = n - sum(e for e, _ in eta_parts)
                if pad2 < 0:
                    continue
                got = _canon(list(eta_parts) + [(1, ident)] * pad2, basis)
                if got is not None:
                    strict.add(got[0])
    exact = {k: v for k, v in exact.items() if v != 0}
    strict -= set(exact)
    return exact, strict


# ---------------------------------------------------------------------------
# splittings

@dataclass(frozen=True)
class SplittingTerm:
    g1: int
    g2: int
    beta1: tuple[int, ...]
    beta2: tuple[int, ...]
    eta: WeightedPartition
    omega1: tuple[Insertion, ...]
    omega2: tuple[Insertion, ...]
    label: str  # "case1", "case2" or "nonprincipal"


def _distributions(omega: Sequence[Insertion], forced1=("D0",), forced2=("Dinf",)):
    """Distinct ways of splitting ``omega`` into (side 1, side 2)."""
    seen = set()
    choices = []
    for ins in omega:
        if ins.factor in forced1:
            choices.append((1,))
        elif ins.factor in forced2:
            choices.append((2,))
        else:
            choices.append((1, 2))
    for pick in itertools.product(*choices):
        a = tuple(sorted(i for i, s in zip(omega, pick) if s == 1))
        b = tuple(sorted(i for i, s in zip(omega, pick) if s == 2))
        if (a, b) not in seen:
            seen.add((a, b))
            yield a, b


def enumerate_splittings(key: InvariantKey, ctx: BundleContext) -> list[SplittingTerm]:
    """All degeneration splittings for the type I invariant behind a type II key.

    Side 1 is the original Y (it keeps D0, ``mu`` and the distinguished
    insertion); side 2 is the bubble, glued along its D0 and keeping
    D_inf with the ``nu`` insertions.  Classes split so that
    ``beta1.D0 = beta.D0``, ``beta2.Dinf = beta.Dinf``,
    ``beta1.Dinf = beta2.D0`` and the base classes add up.  The total
    domain is connected; a side with no curve has arithmetic genus 1.
    """
    lat = ctx.lattice
    labels = ctx.base.labels
    theta = tuple(Insertion(p.mult - 1, "Dinf", p.weight) for p in key.nu)
    pi = lat.pi_vector
    pi_beta = pi(key.beta)
    h = lat._h(key.beta)
    eff = lat.effective_up_to(h)
    zero = lat.zero()
    out = []
    for beta1 in eff:
        if lat.integral(beta1, "D0") != lat.integral(key.beta, "D0"):
            continue
        for beta2 in eff:
            if tuple(a + b for a, b in zip(pi(beta1), pi(beta2))) != pi_beta:
                continue
            if lat.integral(beta2, "Dinf") != lat.integral(key.beta, "Dinf"):
                continue
            n1 = lat.integral(beta1, "Dinf")
            if n1 != lat.integral(beta2, "D0") or n1 < 0:
                continue
            for om1, om2 in _distributions(key.omega):
                if n1 == 0:
                    if beta2 == zero and not om2 and not theta:
                        out.append(SplittingTerm(key.g, 1, beta1, beta2, WeightedPartition((), ctx.base),
                                                 om1, om2, _label(key, ctx, beta1, beta2, key.g, 1)))
                    continue
                for eta in weighted_partitions(n1, labels, ctx.base):
                    ell = eta.length
                    for g1 in range(1 - ell, key.g + 1):
                        g2 = key.g + 1 - ell - g1
                        if g2 < 1 - ell:
                            continue
                        out.append(SplittingTerm(g1, g2, beta1, beta2, eta, om1, om2,
                                                 _label(key, ctx, beta1, beta2, g1, g2)))
    return out


def _label(key, ctx, beta1, beta2, g1, g2) -> str:
    fiber = lambda b: not ctx.lattice.pushforward_nonzero(b)
    if tuple(beta1) == tuple(key.beta) and fiber(beta2) and g1 == key.g:
        return "case1"
    if tuple(beta2) == tuple(key.beta) and fiber(beta1) and g2 == key.g:
        return "case2"
    return "nonprincipal"


# ---------------------------------------------------------------------------
# Relation 1

def _slot(name: str, **desc) -> Coeff:
    return Coeff(1, (Slot.of(name, **desc),))


def _check_type_ii(R: InvariantKey, ctx: BundleContext):
    if R.species is not Species.TYPE_II or R.distinguished is None:
        raise DegenerationError("Relation 1 needs a distinguished type II key")
    if ctx.base.deg(R.distinguished.label) <= 0:
        raise DegenerationError("distinguished class must have positive degree")
    if not any(R.beta) or not ctx.lattice.is_effective(R.beta):
        raise DegenerationError("Relation 1 needs a nonzero effective class")
    if ctx.lattice.integral(R.beta, "Dinf") < 0:
        raise DegenerationError("negative intersection with D_inf")
    if any(i.factor == "Dinf" for i in R.omega):
        raise DegenerationError("rewrite Dinf-divisible insertions with D0 = Dinf - c1(L) first")


def _theta(nu: WeightedPartition) -> list[Insertion]:
    return [Insertion(p.mult - 1, "Dinf", p.weight) for p in nu]


def _type_i(ctx: BundleContext, g, beta, omega, mu, distinguished=None) -> tuple[InvariantKey, int]:
    return InvariantKey.build(Species.TYPE_I_D0, g, beta, omega, distinguished=distinguished, mu=mu,
                              space=ctx.space, lattice=ctx.lattice, basis=ctx.base)


def _case2_keys(R: InvariantKey, ctx: BundleContext) -> set[InvariantKey]:
    """Type I keys ``<eta^vee | omega_2 theta>`` from rational fibers on side 1."""
    X = ctx.base
    dim = X.dim_real
    theta = _theta(R.nu)
    out = set()
    mu_parts = list(R.mu)
    if not mu_parts:
        return out
    d_deg = X.deg(R.distinguished.label)
    for blocks in set_partitions(list(range(len(mu_parts)))):
        ell = len(blocks)
        sizes = [sum(mu_parts[i].mult for i in b) for b in blocks]
        pis = [sum(X.deg(mu_parts[i].weight) for i in b) for b in blocks]
        for om1, om2 in _distributions(R.omega, forced1=("D0",), forced2=("Dinf",)):
            # side-1 objects: distinguished plus omega_1, each placed on a component
            objs = [d_deg] + [X.deg(i.label) for i in om1]
            for rhos in itertools.product(X.labels, repeat=ell):
                load = [pis[k] + X.deg(rhos[k]) for k in range(ell)]
                if not _placeable(objs, load, dim):
                    continue
                parts = []
                ok = True
                for sz, rho in zip(sizes, rhos):
                    s = X.dual(rho).single()
                    if s is None:
                        ok = False
                        break
                    parts.append((sz, s[1]))
                got = _canon(parts, X) if ok else None
                if got is None:
                    continue
                eta_v = got[0]
                key, _ = _type_i(ctx, R.g, R.beta, list(om2) + theta, eta_v)
                out.add(key)
    return out


def _placeable(objs: Sequence[int], load: Sequence[int], cap: int) -> bool:
    """Can the objects be placed on components so each total degree stays <= cap?"""
    if any(x > cap for x in load):
        return False
    if not objs:
        return True
    first, rest = objs[0], objs[1:]
    for k in range(len(load)):
        if load[k] + first <= cap:
            nl = list(load)
            nl[k] += first
            if _placeable(rest, nl, cap):
                return True
    return False


def relation1(R: InvariantKey, ctx: BundleContext) -> Equation:
    """Degenerate the type I partner of ``R`` along D_inf.

    ``C * R = <mu | tau_0(D0 d) omega theta> - (lower type II) - (type I, Case 2) - dots``.
    """
    _check_type_ii(R, ctx)
    X = ctx.base
    n = ctx.lattice.integral(R.beta, "Dinf")
    C = coefficient_C(R.nu, n)
    terms: list[tuple[Coeff, InvariantKey]] = []
    first, s1 = _type_i(ctx, R.g, R.beta, list(R.omega) + _theta(R.nu), R.mu, R.distinguished)
    terms.append((Coeff(s1), first))

    exact, strict = block_expansion(R.nu, n, X)
    if exact.get(R.nu) != C:
        raise DegenerationError(f"block model gives {exact.get(R.nu)} for the principal, expected {C}")
    for eta, c in exact.items():
        if eta != R.nu:
            terms.append((Coeff(-c), R.replace(nu=eta)))
    for eta in strict:
        terms.append((-_slot(f"C[{format_key(R.replace(nu=eta))}<-{format_key(R)}]",
                             kind="strict_block", genus=0, hodge=True), R.replace(nu=eta)))
    # Case 1 with insertions moved to the fiber side
    for om1, om2 in _distributions(R.omega):
        if not om2:
            continue
        for eta in weighted_partitions(n, X.labels, X):
            lower = R.replace(omega=om1, nu=eta)
            terms.append((-_slot(f"C[{format_key(lower)}<-{format_key(R)}]",
                                 kind="moved_insertions", hodge=True), lower))
    # Case 2
    for key in sorted(_case2_keys(R, ctx), key=format_key):
        terms.append((-_slot(f"C[{format_key(key)}|{format_key(R)}]", kind="case2", hodge=True), key))
    oracle = ((Coeff(-1), OracleRef(f"nonprincipal:{format_key(R)}")),)
    return Equation(R, C, tuple(terms), oracle, meta={"relation": "1", "n_inf": str(n)})


# ---------------------------------------------------------------------------
# Relations 2 and 2'

def _sub_multisets(items: Sequence[Insertion]):
    c = sorted(Counter(items).items())
    for counts in itertools.product(*(range(m + 1) for _, m in c)):
        yield tuple(x for (x, _), k in zip(c, counts) for _ in range(k))


def _split_theta(key: InvariantKey) -> tuple[list[Insertion], WeightedPartition]:
    omega = [i for i in key.omega if i.factor != "Dinf"]
    nu = WeightedPartition([WeightedPart(i.k + 1, i.label) for i in key.omega if i.factor == "Dinf"],
                           key.basis)
    return omega, nu


def _c1_powers(ctx: BundleContext, start: CohClass):
    X = ctx.base
    m = 0
    cls = start
    while m <= ctx.dim_x // 2:
        yield m, cls
        cls = X.product(cls, ctx.geometry.c1L)
        m += 1


def _family(ctx, key, *, omega, mu_min, nu_min, dist_cls: CohClass, m, name, sign):
    lat, X = ctx.lattice, ctx.base
    n0, ninf = lat.integral(key.beta, "D0"), lat.integral(key.beta, "Dinf")
    out = []
    for om in _sub_multisets(omega):
        for mu in weighted_partitions(n0, X.labels, X):
            if mu.deg < mu_min:
                continue
            for nu in weighted_partitions(ninf, X.labels, X):
                if nu.deg < nu_min:
                    continue
                for lab, c in dist_cls.items():
                    if X.deg(lab) <= 0:
                        continue
                    k2 = InvariantKey.make(Species.TYPE_II, key.g, key.beta, om,
                                           distinguished=Insertion(0, "D0", lab), mu=mu, nu=nu,
                                           space=ctx.space, lattice=lat, basis=X)
                    slot = Slot.of(f"C[{name};{format_partition(mu)};{format_partition(nu)};"
                                   f"{','.join(str(i) for i in om)};m={m}]",
                                   kind="relation2", hodge=True)
                    out.append((Coeff(sign * c, (slot,)), k2))
    return out


def relation2(key: InvariantKey, ctx: BundleContext) -> Equation:
    """Template for the type I key ``<mu | tau_0(D0 d) omega theta>``, ``pi_* beta != 0``."""
    if key.species is not Species.TYPE_I_D0 or key.distinguished is None:
        raise DegenerationError("Relation 2 needs a type I key with a distinguished insertion")
    if not ctx.lattice.pushforward_nonzero(key.beta):
        raise DegenerationError("fiber class: use the fiber-class evaluation instead")
    X = ctx.base
    delta = X.cls(key.distinguished.label)
    if X.deg(key.distinguished.label) <= 0:
        raise DegenerationError("distinguished class must have positive degree")
    omega, nu = _split_theta(key)
    H = X.cls(ctx.ample)
    terms = []
    families = []
    for m, cls in _c1_powers(ctx, H):
        if not cls:
            continue
        families.append(f"1:m={m}")
        terms += _family(ctx, key, omega=omega, mu_min=key.mu.deg + 1, nu_min=nu.deg,
                         dist_cls=cls, m=m, name="F1", sign=1)
        families.append(f"2:m={m}")
        terms += _family(ctx, key, omega=omega, mu_min=key.mu.deg, nu_min=nu.deg + 1,
                         dist_cls=cls, m=m, name="F2", sign=1)
    for m, cls in _c1_powers(ctx, X.product(ctx.geometry.c1L, delta)):
        if not cls:
            continue
        families.append(f"3:m={m}")
        terms += _family(ctx, key, omega=omega, mu_min=key.mu.deg, nu_min=nu.deg,
                         dist_cls=cls, m=m, name="F3", sign=-1)
    oracle = ((Coeff(1), OracleRef(f"nonprincipal:{format_key(key)}")),)
    return Equation(key, 1, tuple(terms), oracle,
                    meta={"relation": "2", "families": " ".join(families),
                          "m_range": f"0..{ctx.dim_x // 2}"})


def relation2prime(key: InvariantKey, ctx: BundleContext) -> Equation:
    """Template for ``<mu | omega theta>`` without a distinguished insertion."""
    if key.species is not Species.TYPE_I_D0:
        raise DegenerationError("Relation 2' needs a type I key")
    if not ctx.lattice.pushforward_nonzero(key.beta):
        raise DegenerationError("fiber class: use the fiber-class evaluation instead")
    omega, nu = _split_theta(key)
    H = ctx.base.cls(ctx.ample)
    terms, families = [], []
    for m, cls in _c1_powers(ctx, H):
        if not cls:
            continue
        families.append(f"1:m={m}")
        terms += _family(ctx, key, omega=omega, mu_min=key.mu.deg, nu_min=nu.deg,
                         dist_cls=cls, m=m, name="F1'", sign=1)
    oracle = ((Coeff(1), OracleRef(f"nonprincipal:{format_key(key)}")),)
    return Equation(key, 1, tuple(terms), oracle,
                    meta={"relation": "2'", "families": " ".join(families),
                          "m_range": f"0..{ctx.dim_x // 2}"})


# ---------------------------------------------------------------------------
# Theorem 2

def associated_absolute(key: InvariantKey, ctx: PairContext) -> dict[InvariantKey, Fraction]:
    """Absolute invariant of V with ``nu`` replaced by ``tau_{nu_j-1}(i_* delta_j)``, expanded."""
    V = ctx.V
    pushed = [pushforward(ctx.restriction, ctx.W.cls(p.weight)) for p in key.nu]
    out: dict[InvariantKey, Fraction] = {}
    for choice in itertools.product(*(c.items() for c in pushed)):
        ins = list(key.omega) + [Insertion(p.mult - 1, "", lab) for p, (lab, _) in zip(key.nu, choice)]
        coef = math.prod((c for _, c in choice), start=Fraction(1))
        k, s = InvariantKey.build(Species.ABSOLUTE, key.g, key.beta, ins, space=ctx.absolute_space,
                                  lattice=ctx.lattice, basis=V)
        out[k] = out.get(k, Fraction(0)) + s * coef
    return {k: v for k, v in out.items() if v != 0}


def _divisor_reduce(expr: dict[InvariantKey, Fraction], D: str, copies: int, V: GradedBasis,
                    lattice: CurveLattice) -> dict[InvariantKey, Fraction]:
    """Remove ``copies`` insertions ``tau_0(D)`` with the divisor equation."""
    for _ in range(copies):
        nxt: dict[InvariantKey, Fraction] = {}
        for k, c in expr.items():
            om = list(k.omega)
            idx = om.index(Insertion(0, "", D))
            rest = om[:idx] + om[idx + 1:]
            # moving tau_0(D) to the front is free: D is even
            base = k.replace(omega=rest)
            nxt[base] = nxt.get(base, Fraction(0)) + c * lattice.integral(k.beta, "W")
            for j, ins in enumerate(rest):
                if ins.k == 0:
                    continue
                prod = V.product(V.cls(ins.label), V.cls(D))
                for lab, pc in prod.items():
                    new = rest[:j] + [Insertion(ins.k - 1, "", lab)] + rest[j + 1:]
                    k2, s = InvariantKey.build(k.species, k.g, k.beta, new, space=k.space,
                                               lattice=k.lattice, basis=k.basis)
                    nxt[k2] = nxt.get(k2, Fraction(0)) + c * pc * s
        expr = {k: v for k, v in nxt.items() if v != 0}
    return expr


def theorem2_equation(key: InvariantKey, ctx: PairContext, reduce_divisor: bool = False) -> Equation:
    """Degeneration equation of ``key`` along the normal cone of W.

    ``C * <omega | nu> = <omega prod tau(i_* delta)>^V - lower - <bubble/nonprincipal>``.
    With ``reduce_divisor`` the ``tau_0(i_* 1)`` insertions are removed by
    the divisor equation and the equation is divided by ``n^Id(nu)``.
    """
    if key.species is not Species.RELATIVE_PAIR:
        raise DegenerationError("Theorem 2 equations need RelativePair keys")
    W = ctx.W
    n = ctx.lattice.integral(key.beta, "W")
    C = coefficient_C(key.nu, n)
    absolute = associated_absolute(key, ctx)
    norm = Fraction(1)
    if reduce_divisor and key.nu.n_id:
        s = pushforward(ctx.restriction, W.one).single()
        if s is None or s[0] != 1:
            raise DegenerationError("divisor reduction needs i_*1 to be a basis label")
        absolute = _divisor_reduce(absolute, s[1], key.nu.n_id, ctx.V, ctx.lattice)
        norm = Fraction(n) ** key.nu.n_id
    terms = [(Coeff(c / norm), k) for k, c in absolute.items()]
    exact, strict = block_expansion(key.nu, n, W)
    if exact.get(key.nu) != C:
        raise DegenerationError(f"block model gives {exact.get(key.nu)} for the principal, expected {C}")
    for eta, c in exact.items():
        if eta != key.nu:
            terms.append((Coeff(-c / norm), key.replace(nu=eta)))
    for eta in strict:
        low = key.replace(nu=eta)
        terms.append((-_slot(f"C[{format_key(low)}<-{format_key(key)}]", kind="strict_block", hodge=True), low))
    for om1, om2 in _distributions(key.omega, forced1=(), forced2=()):
        if not om2:
            continue
        for eta in weighted_partitions(n, W.labels, W):
            low = key.replace(omega=om1, nu=eta)
            terms.append((-_slot(f"C[{format_key(low)}<-{format_key(key)}]", kind="moved_insertions",
                                 hodge=True), low))
    oracle = ((Coeff(-1), OracleRef(f"nonprincipal:{format_key(key)}")),)
    return Equation(key, C / norm, tuple(terms), oracle,
                    meta={"relation": "theorem2", "n_W": str(n), "normalized": str(norm)})


def theorem2_system(pair_keys: Iterable[InvariantKey], ctx: PairContext,
                    reduce_divisor: bool = False) -> list[Equation]:
    return [theorem2_equation(k, ctx, reduce_divisor) for k in pair_keys]


def simple_class_filter(key: InvariantKey, r: int, simple_V: Iterable[str], simple_W: Iterable[str],
                        W: GradedBasis | None = None) -> bool:
    """Whether a hypersurface-pair key only involves simple classes.

    Insertions must be simple on V.  A relative weight that is not simple
    on W must sit in real degree ``r - 2``; its pushforward then has degree
    ``r`` and is simple.
    """
    simple_V, simple_W = set(simple_V), set(simple_W)
    if any(i.label not in simple_V for i in key.omega):
        return False
    W = W or key.basis
    for p in key.nu:
        if p.weight in simple_W:
            continue
        if W is None or W.deg(p.weight) != r - 2:
            return False
    return True


# ---------------------------------------------------------------------------
# triangularity

def triangularity_check(eq: Equation) -> list[str]:
    """Terms of the principal's own species that are not strictly lower."""
    sp = eq.principal.species
    if sp is Species.TYPE_II:
        less = circ_less_typeII
    elif sp is Species.RELATIVE_PAIR:
        less = circ_less_pair
    else:
        return []
    bad = []
    for _, k in eq.terms:
        if k.species is sp and k.space == eq.principal.space and less(k, eq.principal) is not Verdict.LOWER:
            bad.append(format_key(k))
    return bad
