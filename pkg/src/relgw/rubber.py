"""Rubber calculus as a rewriting system.

Rubber brackets ``<mu| omega Psi_inf^k |nu>~`` are reduced to type II
brackets of ``Y = P(L + O)`` by four rules:

* inverse dilaton: add a ``tau_1(1)`` marking (fiber classes),
* inverse divisor: add a ``tau_0(H)`` marking (non-fiber classes),
* TRR pulled back along the map to the 3-pointed Artin stack (lowers k),
* rigidification: a marked k = 0 rubber bracket equals the type II
  bracket with the marking cupped with ``[D0]``.

Expressions are rational combinations of monomials (products of factors),
since the splitting terms of the TRR are products.  :func:`linearize`
turns fiber-class factors into named slots afterwards.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .cohomology import BundleGeometry, CohClass
from .degeneration import _placeable, set_partitions
from .equations import Coeff, OracleRef, Slot
from .invariants import (CurveLattice, Insertion, InvariantKey, Species, _sort_insertions,
                         format_key, weighted_partitions)
from .partitions import PartitionError, WeightedPart, WeightedPartition, format_partition

__all__ = [
    "RubberError",
    "Mode",
    "RubberContext",
    "RubberTerm",
    "RubberExpr",
    "dilaton_factor",
    "dilaton",
    "inverse_dilaton",
    "divisor",
    "inverse_divisor",
    "rubber_splittings",
    "trr_step",
    "rigidify",
    "measure",
    "TraceStep",
    "reduce",
    "STRATEGIES",
    "linearize",
    "audit_lemma_ab",
    "vdim",
    "fiber_placeable",
]

log = logging.getLogger(__name__)


class RubberError(ValueError):
    pass


class Mode(str, Enum):
    FIBER = "FiberClass"
    NONFIBER = "NonFiber"


@dataclass(frozen=True)
class RubberContext:
    """Geometry of ``Y = P(L + O)`` for the calculus.

    ``pairings`` maps a degree-2 label H of X to the covector computing
    ``int_{pi_* beta} H``; by default the ample label uses the lattice form
    ``pi``.  ``c1x`` is the covector of ``int_{pi_* beta} c1(T_X)``; when
    given, terms that vanish for dimension reasons are dropped.
    """

    geometry: BundleGeometry
    lattice: CurveLattice
    ample: str = "h"
    space: str = "Y"
    pairings: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    c1x: tuple[int, ...] | None = None

    @property
    def base(self):
        return self.geometry.base

    def h_integral(self, beta, label: str) -> int:
        if label in self.pairings:
            return sum(a * b for a, b in zip(self.pairings[label], beta))
        if label == self.ample and "pi" in self.lattice.forms:
            return self.lattice.integral(beta, "pi")
        raise RubberError(f"no pairing known for {label!r} against pi_* beta")

    def is_fiber(self, beta) -> bool:
        return not self.lattice.pushforward_nonzero(beta)


# ---------------------------------------------------------------------------
# terms

_EMPTY = WeightedPartition(())


@dataclass(frozen=True)
class RubberTerm:
    """``<mu| marked * omega  Psi_inf^k |nu>~_{g,beta}``.

    ``marked`` is the marking p the calculus works with (the added
    ``tau_1(1)`` or ``tau_0(H)``); it is an ordinary insertion kept apart
    from ``omega`` so the rules know which one to use.
    """

    g: int
    beta: tuple[int, ...]
    mu: WeightedPartition = _EMPTY
    omega: tuple[Insertion, ...] = ()
    k: int = 0
    nu: WeightedPartition = _EMPTY
    connected: bool = True
    marked: Insertion | None = None
    psi0: int = 0

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(self.beta))
        if self.k < 0:
            raise RubberError("Psi_inf power must be nonnegative")
        if self.psi0:
            raise RubberError("Psi_0 insertions are not part of the calculus")
        if tuple(sorted(self.omega)) != tuple(self.omega):
            raise RubberError("omega must be canonically sorted; use RubberTerm.build")

    @classmethod
    def build(cls, g, beta, mu=_EMPTY, omega=(), k=0, nu=_EMPTY, connected=True, marked=None,
              basis=None) -> tuple["RubberTerm", int]:
        om, sign = _sort_insertions(omega, basis)
        return cls(g, tuple(beta), mu, om, k, nu, connected, marked), sign

    @property
    def n_markings(self) -> int:
        return len(self.omega) + (self.marked is not None)

    def insertions(self) -> tuple[Insertion, ...]:
        return self.omega + ((self.marked,) if self.marked is not None else ())

    def __str__(self):
        parts = [f"g={self.g}", f"beta={tuple(self.beta)}", f"mu={format_partition(self.mu)}"]
        if self.marked is not None:
            parts.append(f"mark={self.marked}")
        parts.append("omega=[" + ",".join(map(str, self.omega)) + "]")
        parts.append(f"psi={self.k}")
        parts.append(f"nu={format_partition(self.nu)}")
        if not self.connected:
            parts.append("conn=0")
        return "Rubber[" + ",".join(parts) + "]"

    def __lt__(self, other):
        return str(self) < str(other)


def _item_key(x) -> str:
    return ("0" if isinstance(x, InvariantKey) else "1" if isinstance(x, RubberTerm) else "2") + \
        (format_key(x) if isinstance(x, InvariantKey) else str(x))


Monomial = tuple  # sorted tuple of factors


class RubberExpr:
    """Rational combination of monomials in rubber terms, keys and slots."""

    __slots__ = ("data",)

    def __init__(self, data: Mapping[Monomial, Fraction] | None = None):
        acc: dict[Monomial, Fraction] = {}
        for mono, c in (data or {}).items():
            mono = tuple(sorted(mono, key=_item_key))
            acc[mono] = acc.get(mono, Fraction(0)) + Fraction(c)
        self.data = {m: c for m, c in acc.items() if c != 0}

    @classmethod
    def of(cls, item, coeff=1) -> "RubberExpr":
        return cls({(item,): Fraction(coeff)})

    @classmethod
    def zero(cls) -> "RubberExpr":
        return cls()

    def __add__(self, other: "RubberExpr") -> "RubberExpr":
        d = dict(self.data)
        for m, c in other.data.items():
            d[m] = d.get(m, Fraction(0)) + c
        return RubberExpr(d)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "RubberExpr":
        c = Fraction(c)
        return RubberExpr({m: v * c for m, v in self.data.items()})

    def times(self, factors: Sequence) -> "RubberExpr":
        return RubberExpr({m + tuple(factors): v for m, v in self.data.items()})

    def __eq__(self, other):
        return isinstance(other, RubberExpr) and self.data == other.data

    def __hash__(self):
        return hash(frozenset(self.data.items()))

    def __bool__(self):
        return bool(self.data)

    def items(self):
        return sorted(self.data.items(), key=lambda mc: [_item_key(x) for x in mc[0]])

    def rubber_factors(self) -> list[RubberTerm]:
        return [x for m in self.data for x in m if isinstance(x, RubberTerm)]

    def is_rubber_free(self) -> bool:
        return not self.rubber_factors()

    def keys(self) -> set[InvariantKey]:
        return {x for m in self.data for x in m if isinstance(x, InvariantKey)}

    def __str__(self):
        if not self.data:
            return "0"
        out = []
        for m, c in self.items():
            out.append(f"{c}*" + "*".join(format_key(x) if isinstance(x, InvariantKey) else str(x) for x in m))
        return " + ".join(out)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# class arithmetic on insertions

def _times_base(ctx: RubberContext, ins: Insertion, cls: CohClass) -> list[tuple[Fraction, Insertion]]:
    """``ins * cls`` for a class pulled back from X, expanded over labels."""
    prod = ctx.base.product(ctx.base.cls(ins.label), cls)
    return [(c, Insertion(ins.k, ins.factor, lab)) for lab, c in prod.items()]


def _times_divisor(ctx: RubberContext, ins: Insertion, which: str) -> list[tuple[Fraction, Insertion]]:
    """``ins * [D]`` for D = D0 or Dinf, using ``D0 Dinf = 0`` and ``Dinf = D0 + c1(L)``."""
    c1L = ctx.geometry.c1L
    other = "Dinf" if which == "D0" else "D0"
    if ins.factor == "":
        return [(Fraction(1), Insertion(ins.k, which, ins.label))]
    if ins.factor == other:
        return []
    # D0^2 = -D0 c1(L) and Dinf^2 = Dinf c1(L)
    sign = -1 if which == "D0" else 1
    return [(sign * c, Insertion(x.k, which, x.label)) for c, x in _times_base(ctx, ins, c1L)]


def _identity_tau1(ctx: RubberContext) -> Insertion:
    return Insertion(1, "", ctx.base.identity)


def _with_omega(ctx, term: RubberTerm, omega: Sequence[Insertion], **kw) -> tuple[RubberTerm, int]:
    om, sign = _sort_insertions(omega, ctx.geometry.basis)
    return replace(term, omega=om, **kw), sign


def _replace_part(nu: WeightedPartition, idx: int, new_weight: str, basis) -> tuple[WeightedPartition, int]:
    parts = list(nu.parts)
    parts[idx] = WeightedPart(parts[idx].mult, new_weight)
    return WeightedPartition.build(parts, basis)


# ---------------------------------------------------------------------------
# dilaton and divisor

def dilaton_factor(g: int, n: int, len_mu: int, len_nu: int) -> int:
    """``2g - 2 + n + l(mu) + l(nu)``; n counts the remaining markings."""
    return 2 * g - 2 + n + len_mu + len_nu


def _strip(ctx, term: RubberTerm, ins: Insertion) -> RubberTerm:
    if term.marked == ins:
        return replace(term, marked=None)
    om = list(term.omega)
    om.remove(ins)
    return replace(term, omega=tuple(om))


def dilaton(term: RubberTerm, ctx: RubberContext) -> RubberExpr:
    """Strip a ``tau_1(1)`` insertion, multiplying by the dilaton factor."""
    t1 = _identity_tau1(ctx)
    if t1 != term.marked and t1 not in term.omega:
        raise RubberError("dilaton needs a tau_1(1) insertion")
    out = _strip(ctx, term, t1)
    f = dilaton_factor(out.g, out.n_markings, term.mu.length, term.nu.length)
    return RubberExpr.of(out, f)


def inverse_dilaton(term: RubberTerm, ctx: RubberContext) -> RubberExpr:
    """``term = (1/f) * term with a marked tau_1(1)``.

    For a fiber class every stable configuration has ``f > 0``; when
    ``f <= 0`` all components are trivial cylinders, the moduli space is
    empty and the term is zero.
    """
    if term.marked is not None:
        raise RubberError("term already carries a marking")
    f = dilaton_factor(term.g, term.n_markings, term.mu.length, term.nu.length)
    if f <= 0:
        if ctx.is_fiber(term.beta):
            return RubberExpr()
        raise RubberError(f"dilaton factor {f} for {term}")
    return RubberExpr.of(replace(term, marked=_identity_tau1(ctx)), Fraction(1, f))


def _divisor_tail(term: RubberTerm, H: str, ctx: RubberContext) -> RubberExpr:
    """Families two and three of the divisor equation (H already stripped)."""
    hcls = ctx.base.cls(H)
    out = RubberExpr()
    # lowered descendents, the marking included
    ins = list(term.omega)
    for j, x in enumerate(ins):
        if x.k == 0:
            continue
        lowered = Insertion(x.k - 1, x.factor, x.label)
        for c, y in _times_base(ctx, lowered, hcls):
            new = ins[:j] + [y] + ins[j + 1:]
            t, s = _with_omega(ctx, term, new)
            out = out + RubberExpr.of(t, s * c)
    if term.marked is not None and term.marked.k > 0:
        lowered = Insertion(term.marked.k - 1, term.marked.factor, term.marked.label)
        for c, y in _times_base(ctx, lowered, hcls):
            out = out + RubberExpr.of(replace(term, marked=y), c)
    # Psi_inf lowered, one nu weight cupped with H
    if term.k >= 1:
        for j, p in enumerate(term.nu.parts):
            for lab, c in ctx.base.cup_labels(p.weight, H).items():
                try:
                    nu2, s = _replace_part(term.nu, j, lab, ctx.base)
                except PartitionError:
                    continue
                out = out + RubberExpr.of(replace(term, k=term.k - 1, nu=nu2), s * c * p.mult)
    return out


def _check_h(ctx, H: str):
    if ctx.base.deg(H) != 2:
        raise RubberError(f"divisor class {H!r} must have degree 2")


def divisor(term: RubberTerm, H: str, ctx: RubberContext) -> RubberExpr:
    """Apply the modified divisor equation to a ``tau_0(H)`` insertion."""
    _check_h(ctx, H)
    tH = Insertion(0, "", H)
    if term.marked != tH and tH not in term.omega:
        raise RubberError(f"term has no tau_0({H}) insertion")
    stripped = _strip(ctx, term, tH)
    c = ctx.h_integral(term.beta, H)
    return RubberExpr.of(stripped, c) + _divisor_tail(stripped, H, ctx)


def inverse_divisor(term: RubberTerm, ctx: RubberContext, H: str | None = None) -> RubberExpr:
    """Solve the divisor equation for the H-free term."""
    H = H or ctx.ample
    _check_h(ctx, H)
    if term.marked is not None:
        raise RubberError("term already carries a marking")
    c = ctx.h_integral(term.beta, H)
    if c == 0:
        raise RubberError("H integrates to zero on pi_* beta; use the fiber-class rules")
    withH = replace(term, marked=Insertion(0, "", H))
    return RubberExpr.of(withH, Fraction(1, c)) - _divisor_tail(term, H, ctx).scale(Fraction(1, c))


# ---------------------------------------------------------------------------
# dimensions

def vdim(ctx: RubberContext, g: int, beta, n: int, mu: WeightedPartition, nu: WeightedPartition,
         rubber: bool) -> int | None:
    """Complex virtual dimension for maps to Y relative to D0 and Dinf."""
    if ctx.c1x is None:
        return None
    lat = ctx.lattice
    c1 = sum(a * b for a, b in zip(ctx.c1x, beta)) + lat.integral(beta, "D0") + lat.integral(beta, "Dinf")
    dim_y = ctx.base.dim_real // 2 + 1
    d = c1 + (dim_y - 3) * (1 - g) + n + mu.length + nu.length - mu.size - nu.size
    return d - 1 if rubber else d


def _load(ctx, ins: Iterable[Insertion], mu, nu) -> int:
    tot = sum(x.k + x.degree(ctx.base) // 2 for x in ins)
    return tot + mu.deg // 2 + nu.deg // 2


def fiber_placeable(ctx: RubberContext, g: int, top: WeightedPartition, bottom: WeightedPartition,
                    ins: Sequence[Insertion]) -> bool:
    """Necessary condition for a fiber-class bracket not to vanish.

    Each connected component maps into one fiber, so the classes it
    carries multiply to at most the top degree of X.  Components are
    unions of top parts matched with bottom parts of equal total degree.
    """
    X = ctx.base
    cap = X.dim_real
    T, B = list(top), list(bottom)
    objs = sorted((X.deg(x.label) for x in ins), reverse=True)
    if not T:
        return not B
    for blocks in set_partitions(list(range(len(T)))):
        c = len(blocks)
        if g < 1 - c:
            continue
        sizes = [sum(T[i].mult for i in b) for b in blocks]
        base_load = [sum(X.deg(T[i].weight) for i in b) for b in blocks]
        for assign in itertools.product(range(c), repeat=len(B)):
            got = [0] * c
            load = list(base_load)
            for j, b in enumerate(assign):
                got[b] += B[j].mult
                load[b] += X.deg(B[j].weight)
            if got != sizes:
                continue
            if _placeable(objs, load, cap):
                return True
    return False


def _dimension_ok(ctx, g, beta, ins, mu, nu, k, rubber) -> bool:
    d = vdim(ctx, g, beta, len(ins), mu, nu, rubber)
    if d is None:
        return True
    return 2 * _load(ctx, ins, mu, nu) + 2 * k == 2 * d


# ---------------------------------------------------------------------------
# TRR

@dataclass(frozen=True)
class RubberSplitting:
    g1: int
    g2: int
    beta1: tuple[int, ...]
    beta2: tuple[int, ...]
    eta: WeightedPartition
    omega1: tuple[Insertion, ...]
    omega2: tuple[Insertion, ...]


def _subsets(omega: Sequence[Insertion]):
    seen = set()
    for pick in itertools.product((1, 2), repeat=len(omega)):
        a = tuple(sorted(x for x, s in zip(omega, pick) if s == 1))
        b = tuple(sorted(x for x, s in zip(omega, pick) if s == 2))
        if (a, b) not in seen:
            seen.add((a, b))
            yield a, b


def rubber_splittings(term: RubberTerm, ctx: RubberContext) -> list[RubberSplitting]:
    """Two-level splittings with the marking on the upper (D0) level.

    For a connected term every component of each level meets ``eta``, so
    both level genera are at least ``1 - l(eta)``; a disconnected term
    may also have components carrying only markings or contact points.

    Classes split so that ``beta1.D0 = |mu|``, ``beta2.Dinf = |nu|``,
    ``beta1.Dinf = beta2.D0 = |eta|`` and base classes add.  A lower
    level made only of trivial cylinders is unstable and skipped.
    """
    lat = ctx.lattice
    pi = lat.pi_vector
    eff = lat.effective_up_to(lat._h(term.beta) + 0)
    out = []
    for beta1 in eff:
        if lat.integral(beta1, "D0") != term.mu.size:
            continue
        n1 = lat.integral(beta1, "Dinf")
        if n1 <= 0:
            continue
        for beta2 in eff:
            if tuple(a + b for a, b in zip(pi(beta1), pi(beta2))) != pi(term.beta):
                continue
            if lat.integral(beta2, "D0") != n1 or lat.integral(beta2, "Dinf") != term.nu.size:
                continue
            for eta in weighted_partitions(n1, ctx.base.labels, ctx.base):
                ell = eta.length
                for om1, om2 in _subsets(term.omega):
                    if term.connected:
                        # every component of either level meets eta
                        lo1 = lo2 = 1 - ell
                    else:
                        lo1 = 1 - (term.mu.length + ell + len(om1) + 1)
                        lo2 = 1 - (ell + term.nu.length + len(om2))
                    for g1 in range(lo1, term.g + 2 - ell - lo2):
                        g2 = term.g + 1 - ell - g1
                        if (not om2 and ctx.is_fiber(beta2) and g2 == 1 - ell
                                and eta.dual()[0] == term.nu):
                            continue
                        out.append(RubberSplitting(g1, g2, tuple(beta1), tuple(beta2), eta, om1, om2))
    return out


def trr_step(term: RubberTerm, ctx: RubberContext, trace: list | None = None) -> RubberExpr:
    """Lower the Psi_inf power by one using the marking p.

    ``Psi_inf - ev_p^* c1(L)`` is the pull-back of a boundary class, so
    the bracket is the ``tau(p * c1(L)) Psi^(k-1)`` bracket plus the
    sum over splittings; the upper factor is rigidified at once.
    """
    if term.marked is None:
        raise RubberError("TRR needs a marking (add tau_1(1) or tau_0(H) first)")
    if term.k == 0:
        raise RubberError("TRR needs a positive Psi_inf power")
    out = RubberExpr()
    for c, y in _times_base(ctx, term.marked, ctx.geometry.c1L):
        out = out + RubberExpr.of(replace(term, marked=y, k=term.k - 1), c)
    for s in rubber_splittings(term, ctx):
        upper = RubberTerm(s.g1, s.beta1, term.mu, s.omega1, 0, s.eta, False, term.marked)
        if not _dimension_ok(ctx, s.g1, s.beta1, upper.insertions(), term.mu, s.eta, 0, True):
            continue
        try:
            eta_v, sv = s.eta.dual()
        except PartitionError:
            continue
        lower = RubberTerm(s.g2, s.beta2, eta_v, s.omega2, term.k - 1, term.nu, False)
        if not _dimension_ok(ctx, s.g2, s.beta2, lower.insertions(), eta_v, term.nu, term.k - 1, True):
            continue
        if ctx.is_fiber(s.beta1) and not fiber_placeable(ctx, s.g1, term.mu, s.eta, upper.insertions()):
            continue
        if ctx.is_fiber(s.beta2) and not fiber_placeable(ctx, s.g2, eta_v, term.nu, lower.insertions()):
            continue
        # Koszul sign of moving omega2 past omega1 in the original order
        _, s_split = _sort_insertions(s.omega1 + s.omega2, ctx.geometry.basis)
        up = rigidify(upper, ctx, trace=trace)
        out = out + up.times([lower]).scale(Fraction(sv * s_split) * s.eta.zee)
    return out


# ---------------------------------------------------------------------------
# rigidification

def rigidify(term: RubberTerm, ctx: RubberContext, divisor_side: str = "D0",
             trace: list | None = None) -> RubberExpr:
    """A k = 0 rubber bracket as a type II bracket with ``p * [D]``.

    Uses the marking, or the first insertion of omega when unmarked.
    ``divisor_side='Dinf'`` gives the equal-valued alias.
    """
    if term.k != 0:
        raise RubberError("rigidification needs Psi_inf power 0")
    if divisor_side not in ("D0", "Dinf"):
        raise RubberError("divisor_side is D0 or Dinf")
    if term.marked is not None:
        p, rest = term.marked, term.omega
    elif term.omega:
        p, rest = term.omega[0], term.omega[1:]
    else:
        raise RubberError("no marking to rigidify at; add tau_1(1) by inverse dilaton")
    if p.k > 0:
        note = f"descendent exponent {p.k} carried through rigidification at {p}"
        log.debug(note)
        if trace is not None:
            trace.append(TraceStep("rigidify-note", str(term), (), (), note))
    out = RubberExpr()
    for c, q in _times_divisor(ctx, p, divisor_side):
        key, s = InvariantKey.build(Species.TYPE_II, term.g, term.beta, rest, distinguished=q,
                                    mu=term.mu, nu=term.nu, connected=term.connected,
                                    space=ctx.space, lattice=ctx.lattice, basis=ctx.base)
        out = out + RubberExpr.of(key, c * s)
    return out


# ---------------------------------------------------------------------------
# driver

def measure(term: RubberTerm) -> tuple[int, int, int]:
    """Per-term measure: Psi_inf power, unmarked flag, descendent total."""
    return (term.k, int(term.marked is None), sum(x.k for x in term.omega))


def expr_measure(expr: RubberExpr) -> list[tuple[int, int, int]]:
    """Multiset of term measures, largest first."""
    return sorted((measure(t) for t in expr.rubber_factors()), reverse=True)


def multiset_less(a: list, b: list) -> bool:
    """Dershowitz-Manna: a < b for multisets of tuples."""
    from collections import Counter
    ca, cb = Counter(a), Counter(b)
    common = ca & cb
    ca, cb = ca - common, cb - common
    if not ca and not cb:
        return False
    if not cb:
        return False
    return all(any(y > x for y in cb) for x in ca)


@dataclass(frozen=True)
class TraceStep:
    rule: str
    term: str
    before: tuple
    after: tuple
    note: str = ""


def _pick_highest(candidates: list[RubberTerm]) -> RubberTerm:
    return max(candidates, key=lambda t: (measure(t), str(t)))


def _pick_lowest(candidates):
    return min(candidates, key=lambda t: (measure(t), str(t)))


def _pick_lex(candidates):
    return min(candidates, key=str)


STRATEGIES: dict[str, Callable[[list[RubberTerm]], RubberTerm]] = {
    "highest-k": _pick_highest,
    "lowest-k": _pick_lowest,
    "lexical": _pick_lex,
}


def _rule_for(term: RubberTerm, ctx: RubberContext):
    if term.marked is not None:
        if term.k >= 1:
            return "trr", trr_step
        return "rigidify", rigidify
    if ctx.is_fiber(term.beta):
        return "dilaton", inverse_dilaton
    return "divisor", inverse_divisor


def reduce(expr: RubberExpr | RubberTerm, ctx: RubberContext, mode: Mode | str | None = None,
           strategy: str | Callable | int = "highest-k", trace: list | None = None,
           max_steps: int = 100000) -> RubberExpr:
    """Rewrite until no rubber factor remains.

    ``mode`` is checked against the input terms.  ``strategy`` picks the
    next factor: a name from :data:`STRATEGIES`, a callable, or an integer
    seed for a random choice.
    """
    if isinstance(expr, RubberTerm):
        expr = RubberExpr.of(expr)
    if mode is not None:
        mode = Mode(mode)
        for t in expr.rubber_factors():
            if (mode is Mode.FIBER) != ctx.is_fiber(t.beta):
                raise RubberError(f"mode {mode.value} does not match the class of {t}")
    if isinstance(strategy, int) and not isinstance(strategy, bool):
        rng = random.Random(strategy)
        pick = lambda ts: rng.choice(sorted(ts, key=str))
    elif callable(strategy):
        pick = strategy
    else:
        pick = STRATEGIES[strategy]
    steps = 0
    while True:
        rubber = sorted(set(expr.rubber_factors()), key=str)
        if not rubber:
            return expr
        steps += 1
        if steps > max_steps:
            raise RubberError("reduction did not terminate within the step limit")
        t = pick(rubber)
        name, rule = _rule_for(t, ctx)
        repl = rule(t, ctx, trace=trace) if rule in (trr_step, rigidify) else rule(t, ctx)
        before = expr_measure(expr)
        expr = _substitute(expr, t, repl)
        if trace is not None:
            trace.append(TraceStep(name, str(t), tuple(before), tuple(expr_measure(expr))))


def _substitute(expr: RubberExpr, t: RubberTerm, repl: RubberExpr) -> RubberExpr:
    out: dict = {}
    for mono, c in expr.data.items():
        if t not in mono:
            out[mono] = out.get(mono, Fraction(0)) + c
            continue
        # expand every occurrence of t
        cur = RubberExpr({(): c})
        rest = []
        for x in mono:
            if x == t:
                cur = RubberExpr({m1 + m2: a * b for m1, a in cur.data.items() for m2, b in repl.data.items()})
            else:
                rest.append(x)
        for m, v in cur.times(rest).data.items():
            out[m] = out.get(m, Fraction(0)) + v
    return RubberExpr(out)


# ---------------------------------------------------------------------------
# linear form and audit

def _fiber_slot(x) -> Slot:
    if isinstance(x, InvariantKey):
        return Slot.of(format_key(x), kind="typeII-fiber", g=x.g, beta=list(x.beta))
    return Slot.of(str(x), kind="other")


def linearize(expr: RubberExpr, ctx: RubberContext) -> list[tuple[Coeff, InvariantKey | OracleRef]]:
    """Terms ``(coeff, key)`` linear in the non-fiber type II keys.

    Fiber-class keys become slots.  A monomial with no non-fiber key is
    attached to ``OracleRef('1')``; one with several becomes a
    ``nonprincipal:`` oracle reference.
    """
    if not expr.is_rubber_free():
        raise RubberError("linearize needs a fully reduced expression")
    out = []
    for mono, c in expr.items():
        slots, keys = [], []
        for x in mono:
            if isinstance(x, InvariantKey) and not ctx.is_fiber(x.beta):
                keys.append(x)
            elif isinstance(x, Slot):
                slots.append(x)
            else:
                slots.append(_fiber_slot(x))
        if len(keys) == 1:
            out.append((Coeff(c, tuple(slots)), keys[0]))
        elif not keys:
            out.append((Coeff(c, tuple(slots)), OracleRef("1")))
        else:
            name = "nonprincipal:" + "*".join(format_key(k) for k in keys)
            out.append((Coeff(c, tuple(slots)), OracleRef(name)))
    return out


def _distinguished_labels(ctx: RubberContext, H: str) -> set[str]:
    labs = set()
    cur = ctx.base.cls(H)
    while cur:
        labs.update(cur.labels())
        cur = ctx.base.product(cur, ctx.geometry.c1L)
    return labs


def audit_lemma_ab(term: RubberTerm, expr: RubberExpr, ctx: RubberContext, H: str | None = None) -> list[str]:
    """Check the principal keys of a reduced non-fiber term.

    A key is principal when it has the input genus and class.  Each must
    have distinguished insertion ``tau_0([D0] H c1(L)^m)``, no more
    insertions than omega, and weights at least as deep as mu and nu.
    Returns the violations.
    """
    H = H or ctx.ample
    allowed = _distinguished_labels(ctx, H)
    bad = []
    for key in expr.keys():
        if key.g != term.g or tuple(key.beta) != tuple(term.beta):
            continue
        d = key.distinguished
        if d is None or d.k != 0 or d.factor != "D0" or d.label not in allowed:
            bad.append(f"{format_key(key)}: distinguished insertion not of the form [D0] H c1(L)^m")
        if len(key.omega) > len(term.omega):
            bad.append(f"{format_key(key)}: more insertions than the input")
        if key.mu.deg < term.mu.deg:
            bad.append(f"{format_key(key)}: deg(mu') < deg(mu)")
        if key.nu.deg < term.nu.deg:
            bad.append(f"{format_key(key)}: deg(nu') < deg(nu)")
    return bad
