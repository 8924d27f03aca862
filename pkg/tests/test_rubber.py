import itertools
from dataclasses import replace
from fractions import Fraction

import pytest

from relgw.cli import geometry
from relgw.cohomology import CohClass, build_bundle_basis, projective_space
from relgw.invariants import Insertion, InvariantKey, Species, hirzebruch_lattice, weighted_partitions
from relgw.partitions import WeightedPartition
from relgw.rubber import (Mode, RubberContext, RubberError, RubberExpr, RubberTerm, audit_lemma_ab,
                          dilaton, dilaton_factor, divisor, expr_measure, inverse_dilaton, measure,
                          multiset_less, reduce, rigidify, rubber_splittings, trr_step)

PT = geometry("point")
X = projective_space(1)


def hirz(k):
    geo = build_bundle_basis(X, X.cls("h", k) if k else CohClass())
    return RubberContext(geo, hirzebruch_lattice(k), c1x=(0, 2))


def term(g, beta, mu=(), omega=(), k=0, nu=(), marked=None, basis=X):
    t, s = RubberTerm.build(g, beta, WeightedPartition(mu, basis), tuple(omega), k,
                            WeightedPartition(nu, basis), marked=marked, basis=basis)
    assert s == 1
    return t


T1 = Insertion(1, "", "1")
TH = Insertion(0, "", "h")


# ---------------------------------------------------------------------------
# dilaton

@pytest.mark.parametrize("g,n,lm,ln,want", [(2, 1, 1, 1, 5), (0, 3, 0, 0, 1), (1, 0, 1, 1, 2),
                                            (0, 0, 1, 2, 1), (3, 2, 2, 3, 11)])
def test_dilaton_factor_values(g, n, lm, ln, want):
    assert dilaton_factor(g, n, lm, ln) == want


def test_dilaton_grid_matches_substitution():
    ctx = hirz(0)
    a = 4
    for g, n, lm, ln in itertools.product(range(4), range(3), range(1, 4), range(1, 4)):
        omega = [Insertion(0, "", "1")] * n + [T1]
        t = term(g, (a, 1), mu=[(1, "1")] * (lm - 1) + [(a - lm + 1, "1")],
                 nu=[(1, "1")] * (ln - 1) + [(a - ln + 1, "1")], omega=omega)
        want = 2 * g - 2 + n + lm + ln
        out = dilaton(t, ctx)
        assert out == RubberExpr.of(term(g, (a, 1), mu=t.mu.parts, nu=t.nu.parts, omega=omega[:-1]), want)


def test_dilaton_needs_tau1():
    with pytest.raises(RubberError):
        dilaton(term(0, (1, 0), mu=[(1, "1")], nu=[(1, "1")]), hirz(0))


def test_fiber_dilaton_factor_positive():
    # every fiber-class configuration the driver meets has a positive factor
    ctx = PT.rubber
    B = PT.basis
    for d in (1, 2, 3):
        for mu in weighted_partitions(d, B.labels, B):
            for nu in weighted_partitions(d, B.labels, B):
                for g in (0, 1):
                    t = term(g, (d,), mu=mu.parts, nu=nu.parts, k=1, basis=B)
                    f = dilaton_factor(g, 0, mu.length, nu.length)
                    if f > 0:
                        assert inverse_dilaton(t, ctx).items()[0][1] == Fraction(1, f)
                    else:
                        assert not inverse_dilaton(t, ctx)


# ---------------------------------------------------------------------------
# divisor

def test_divisor_fiber_first_family_zero():
    ctx = hirz(1)
    t = term(0, (2, 0), mu=[(2, "1")], nu=[(2, "1")], omega=[TH])
    out = divisor(t, "h", ctx)
    stripped = term(0, (2, 0), mu=[(2, "1")], nu=[(2, "1")])
    assert stripped not in {m[0] for m, _ in out.items()}


def test_divisor_first_family_nonfiber():
    ctx = hirz(1)
    t = term(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")], omega=[TH])
    out = divisor(t, "h", ctx)
    assert out == RubberExpr.of(term(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")]), 1)


def test_divisor_no_third_family_at_k0():
    ctx = hirz(0)
    t = term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], omega=[TH, Insertion(1, "", "1")])
    for mono, _ in divisor(t, "h", ctx).items():
        assert mono[0].k == 0
        assert mono[0].nu == t.nu


def test_divisor_third_family():
    ctx = hirz(0)
    t = term(0, (2, 0), mu=[(2, "1")], nu=[(2, "1")], omega=[TH], k=1)
    out = divisor(t, "h", ctx)
    want = term(0, (2, 0), mu=[(2, "1")], nu=[(2, "h")], k=0)
    assert out == RubberExpr.of(want, 2)


def test_divisor_descendent_family():
    ctx = hirz(0)
    t = term(1, (2, 1), mu=[(2, "1")], nu=[(2, "1")], omega=[TH, Insertion(2, "", "1")])
    out = dict(divisor(t, "h", ctx).items())
    lowered = term(1, (2, 1), mu=[(2, "1")], nu=[(2, "1")], omega=[Insertion(1, "", "h")])
    plain = term(1, (2, 1), mu=[(2, "1")], nu=[(2, "1")], omega=[Insertion(2, "", "1")])
    assert out == {(plain,): 1, (lowered,): 1}


def test_divisor_requires_degree_two():
    with pytest.raises(RubberError):
        divisor(term(0, (1, 0), mu=[(1, "1")], nu=[(1, "1")], omega=[Insertion(0, "", "1")]), "1", hirz(0))


# ---------------------------------------------------------------------------
# TRR and rigidification

def test_trr_lowers_psi_power():
    ctx = hirz(1)
    t = term(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")], k=2, marked=TH)
    out = trr_step(t, ctx)
    assert out
    for mono, _ in out.items():
        for x in mono:
            if isinstance(x, RubberTerm):
                assert x.k == t.k - 1


def test_trr_trivial_bundle_drops_first_term():
    ctx = hirz(0)
    t = term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], k=1, marked=TH)
    out = trr_step(t, ctx)
    first = term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], k=0, marked=TH)
    assert all(first not in mono for mono, _ in out.items())


def test_trr_preconditions():
    ctx = hirz(0)
    with pytest.raises(RubberError):
        trr_step(term(0, (1, 0), mu=[(1, "1")], nu=[(1, "1")], k=1), ctx)
    with pytest.raises(RubberError):
        trr_step(term(0, (1, 0), mu=[(1, "1")], nu=[(1, "1")], marked=T1), ctx)


def _brute_rubber_splittings(t, ctx):
    lat, B = ctx.lattice, ctx.base
    box = [v for v in itertools.product(range(0, 4), repeat=lat.rank) if lat.is_effective(v)]
    out = set()
    om = list(t.omega)
    for b1, b2 in itertools.product(box, repeat=2):
        if lat.integral(b1, "D0") != t.mu.size or lat.integral(b2, "Dinf") != t.nu.size:
            continue
        n1 = lat.integral(b1, "Dinf")
        if n1 <= 0 or n1 != lat.integral(b2, "D0"):
            continue
        if lat.integral(b1, "pi") + lat.integral(b2, "pi") != lat.integral(t.beta, "pi"):
            continue
        for eta in weighted_partitions(n1, B.labels, B):
            ell = eta.length
            for pick in itertools.product((1, 2), repeat=len(om)):
                o1 = tuple(sorted(x for x, s in zip(om, pick) if s == 1))
                o2 = tuple(sorted(x for x, s in zip(om, pick) if s == 2))
                # components per level: at most one per contact point or marking,
                # and only those meeting eta when the whole domain is connected
                c1 = ell if t.connected else ell + t.mu.length + len(o1) + 1
                c2 = ell if t.connected else ell + t.nu.length + len(o2)
                for g1, g2 in itertools.product(range(-8, t.g + 8), repeat=2):
                    if g1 + g2 + ell - 1 != t.g or g1 < 1 - c1 or g2 < 1 - c2:
                        continue
                    # a lower level of bare trivial cylinders is unstable
                    if not o2 and not lat.pushforward_nonzero(b2) and g2 == 1 - ell and eta.dual()[0] == t.nu:
                        continue
                    out.add((g1, g2, b1, b2, eta, o1, o2))
    return out


@pytest.mark.parametrize("spec", [
    dict(g=0, beta=(1,), mu=[(1, "1")], nu=[(1, "1")], k=1),
    dict(g=1, beta=(1,), mu=[(1, "1")], nu=[(1, "1")], k=1, omega=[Insertion(0, "", "1")]),
    dict(g=0, beta=(2,), mu=[(2, "1")], nu=[(1, "1"), (1, "1")], k=2),
    dict(g=0, beta=(2,), mu=[(1, "1"), (1, "1")], nu=[(2, "1")], k=1, omega=[Insertion(0, "", "1")]),
])
@pytest.mark.parametrize("connected", [True, False])
def test_rubber_splittings_brute_force(spec, connected):
    ctx = PT.rubber
    t = replace(term(**spec, marked=T1, basis=PT.basis), connected=connected)
    got = {(s.g1, s.g2, s.beta1, s.beta2, s.eta, s.omega1, s.omega2) for s in rubber_splittings(t, ctx)}
    assert got == _brute_rubber_splittings(t, ctx)


def test_rigidify_tau1_marking():
    ctx = hirz(1)
    t = term(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")], marked=T1)
    out = rigidify(t, ctx)
    [(mono, c)] = out.items()
    assert c == 1
    key = mono[0]
    assert key.species is Species.TYPE_II
    assert key.distinguished == Insertion(1, "D0", "1")


def test_rigidify_dinf_alias():
    ctx = hirz(0)
    t = term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], marked=TH)
    a, b = rigidify(t, ctx), rigidify(t, ctx, divisor_side="Dinf")
    [((ka,), _)], [((kb,), _)] = a.items(), b.items()
    assert ka.distinguished.factor == "D0" and kb.distinguished.factor == "Dinf"
    assert ka.replace(distinguished=kb.distinguished) == kb


def test_rigidify_descendent_note():
    trace = []
    rigidify(term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], marked=T1), hirz(0), trace=trace)
    assert [s.rule for s in trace] == ["rigidify-note"]


def test_rigidify_errors():
    with pytest.raises(RubberError):
        rigidify(term(0, (1, 0), mu=[(1, "1")], nu=[(1, "1")], k=1, marked=T1), hirz(0))
    with pytest.raises(RubberError):
        rigidify(term(0, (1, 0), mu=[(1, "1")], nu=[(1, "1")]), hirz(0))


def test_zero_expression_reduces_to_zero():
    assert reduce(RubberExpr(), hirz(0)) == RubberExpr()


def test_psi0_rejected():
    with pytest.raises(RubberError):
        RubberTerm(0, (1, 0), psi0=1)


# ---------------------------------------------------------------------------
# the driver

def test_single_rigidify_step():
    trace = []
    t = term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], marked=TH)
    reduce(t, hirz(0), trace=trace)
    assert [s.rule for s in trace] == ["rigidify"]


def test_mode_mismatch():
    t = term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], k=1)
    with pytest.raises(RubberError):
        reduce(t, hirz(0), mode=Mode.FIBER)
    with pytest.raises(RubberError):
        reduce(term(0, (2,), mu=[(2, "1")], nu=[(2, "1")], k=1, basis=PT.basis), PT.rubber, mode="NonFiber")


def test_multiset_order():
    assert multiset_less([(0, 0, 0)] * 5, [(1, 0, 0)])
    assert multiset_less([], [(0, 1, 0)])
    assert not multiset_less([(1, 0, 0)], [(1, 0, 0)])
    assert not multiset_less([(2, 0, 0)], [(1, 1, 1)] * 3)


def rubber_grid():
    for k in (0, 1, 2):
        ctx = hirz(k)
        for a, b in [(1, 1), (2, 1), (3, 1)]:
            if a - b * k < 0:
                continue
            for mu in weighted_partitions(a - b * k, X.labels, X):
                for nu in weighted_partitions(a, X.labels, X):
                    for psi in (0, 1, 2):
                        for om in [(), (TH,), (Insertion(1, "", "1"),)]:
                            yield ctx, term(0, (a, b), mu=mu.parts, nu=nu.parts, omega=om, k=psi)


def check_reduction(ctx, t):
    """Trace measure decrease and the Lemma (ab) shape for one reduction."""
    trace = []
    out = reduce(t, ctx, mode="NonFiber", trace=trace)
    steps = [s for s in trace if s.rule != "rigidify-note"]
    decreasing = all(multiset_less(list(s.after), list(s.before)) for s in steps)
    return out.is_rubber_free() and decreasing, audit_lemma_ab(t, out, ctx)


def test_nonfiber_termination_and_shape():
    n = 0
    for ctx, t in itertools.islice(rubber_grid(), 0, None, 7):
        ok, bad = check_reduction(ctx, t)
        assert ok and bad == [], (str(t), bad)
        n += 1
    assert n > 20


FIBER_TOYS = [
    dict(g=0, beta=(2,), mu=[(2, "1")], nu=[(1, "1"), (1, "1")], k=1),
    dict(g=0, beta=(2,), mu=[(1, "1"), (1, "1")], nu=[(1, "1"), (1, "1")], k=1),
    dict(g=1, beta=(2,), mu=[(2, "1")], nu=[(2, "1")], k=2),
    dict(g=0, beta=(3,), mu=[(3, "1")], nu=[(1, "1")] * 3, k=2),
]


@pytest.mark.parametrize("spec", FIBER_TOYS)
def test_fiber_confluence(spec):
    t = term(**spec, basis=PT.basis)
    results = set()
    for strategy in ["highest-k", "lowest-k", "lexical", 0, 1, 2, 3, 4, 5]:
        trace = []
        out = reduce(t, PT.rubber, mode=Mode.FIBER, strategy=strategy, trace=trace)
        assert out.is_rubber_free()
        for s in trace:
            if s.rule != "rigidify-note":
                assert multiset_less(list(s.after), list(s.before))
        results.add(out)
    assert len(results) == 1
    assert all(isinstance(x, InvariantKey) for mono, _ in results.pop().items() for x in mono)


def test_measure_components():
    t = term(0, (2, 1), mu=[(2, "1")], nu=[(2, "1")], k=2, omega=[Insertion(3, "", "1")])
    assert measure(t) == (2, 1, 3)
    assert expr_measure(RubberExpr.of(t, 2)) == [(2, 1, 3)]
