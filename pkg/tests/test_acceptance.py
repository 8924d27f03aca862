"""Acceptance suite: one PASS/FAIL line per headline criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
Each check returns a short detail string and raises AssertionError on
failure; the wall-clock budget is part of the check.
"""

import itertools
import math
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from test_degeneration import _line_pair_keys, _relation1_family  # noqa: E402
from test_invariants import _check_strict_order, brute_pair_downset, pair_family, rp, type_ii_family  # noqa: E402
from test_partitions import _small_partitions, brute_aut  # noqa: E402
from test_rubber import check_reduction, hirz, rubber_grid, term  # noqa: E402

from relgw.cli import run  # noqa: E402
from relgw.cohomology import curve, projective_space  # noqa: E402
from relgw.degeneration import coefficient_C, relation1, theorem2_system, triangularity_check  # noqa: E402
from relgw.invariants import (Bounds, Insertion, Species, Verdict, circ_less_pair,  # noqa: E402
                              circ_less_typeII, downset)
from relgw.p1theory import CharacterTable, brute_force_count, frobenius_count, transitive_count  # noqa: E402
from relgw.partitions import Cmp, PartitionError, WeightedPartition, lex_compare, size_compare  # noqa: E402
from relgw.quintic_surface import assemble_final, build_section33_system, shape_of, solve_section33  # noqa: E402
from relgw.rubber import RubberExpr, dilaton  # noqa: E402


def _cli(*argv):
    import io
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    assert code == 0, err.getvalue()
    return out.getvalue()


# ---------------------------------------------------------------------------
# the eight checks

def check_quintic():
    system = build_section33_system()
    sol = solve_section33(system)
    final = assemble_final(sol, system)
    W = curve(3)
    by = {}
    for k, v in sol.values.items():
        by.setdefault((k.space, k.g, shape_of(k.nu, W) if k.nu else None), set()).add(v)
    k3 = [by[("S4/C4", 3, s)] for s in ("mu1", "mu2", "mu3")]
    assert k3 == [{-1}, {1}, {-1}], k3
    rows = {r["shape"]: r for r in final["rows"]}
    assert [rows[s]["P/D0"] for s in ("mu1", "mu2", "mu3")] == [7, -3, 1]
    assert [rows[s]["B/C4"] for s in ("mu1", "mu2", "mu3")] == [1, 1, 1]
    assert system.oracles.lookup("B:absolute").value == 1
    g4 = set().union(*(v for (sp, g, _), v in by.items() if sp == "S4/C4" and g == 4))
    assert g4 == {0}, g4
    assert final["result"] == -1
    return "result -1; K3 (-1,1,-1); P (7,-3,1); B (1,1,1); <1>^B 1; genus 4 all 0"


def check_endpoints():
    q = _cli("scheme", "quintic", "--endpoints").strip().split(", ")
    assert set(q) == {"P3", "P2", "S2", "S3", "S4", "C(1,2)", "C(2,3)", "C(3,4)", "C(4,5)"}, q
    s = _cli("scheme", "hypersurface", "--ambient", "3", "--degree", "5", "--endpoints").strip().split(", ")
    assert set(s) == {"P2", "S4", "C4", "P0"}, s
    return f"quintic {len(q)} endpoints; S5 {sorted(s)}"


def check_hurwitz():
    rng = random.Random(5)
    n = 0
    for d in range(2, 6):
        simple = (2,) + (1,) * (d - 2)
        for b in range(0, 5):
            profiles = [simple] * b
            # one arbitrary profile per case
            extra = rng.choice([p for p in _partitions(d)])
            for prof in (profiles, profiles + [extra]):
                assert frobenius_count(d, prof) == brute_force_count(d, prof, connected=False), (d, prof)
                assert transitive_count(d, prof) == brute_force_count(d, prof, connected=True), (d, prof)
                n += 1
    return f"{n} profile lists, d <= 5"


def _partitions(n, top=None):
    top = n if top is None else top
    if n == 0:
        yield ()
        return
    for k in range(min(n, top), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def check_characters():
    for n in range(1, 9):
        t = CharacterTable(n)
        assert t.row_orthogonality_defects() == [], n
        assert t.column_orthogonality_defects() == [], n
        assert sum(d * d for d in t.dimensions.values()) == math.factorial(n)
    return "row and column orthogonality for n = 1..8"


def check_order():
    t2 = type_ii_family()
    pr = pair_family()
    assert len(t2) >= 500 and len(pr) >= 500
    _check_strict_order(t2, circ_less_typeII)
    _check_strict_order(pr, circ_less_pair)
    fam = _small_partitions(3, ["1", "a1", "a1v", "p"], curve(1))
    for less in (lambda a, b: lex_compare(a, b) is Cmp.LESS,):
        rel = {(a, b) for a in fam for b in fam if less(a, b)}
        assert all((b, a) not in rel for a, b in rel)
        assert all((a, c) in rel for a, b in rel for c in fam if (b, c) in rel)
    parts = sorted({p for mu in fam for p in mu})
    srel = {(a, b) for a in parts for b in parts if size_compare(a, b, curve(1)) is Cmp.LESS}
    assert all((b, a) not in srel for a, b in srel)
    assert all((a, c) in srel for a, b in srel for c in parts if (b, c) in srel)
    for d, g in [(1, 0), (1, 1), (2, 0), (2, 1)]:
        key = rp(g, d, [(d, "1")], [Insertion(0, "", "p")])
        b = Bounds(1, 1, 1, omega_classes=(("", "1"), ("", "p")), weight_labels=("1", "p"))
        got = downset(key, b)
        assert got == brute_pair_downset(key, 1, 1, 1, ("1", "p"))
        assert all(downset(k, b) <= got for k in got)
    return f"type II family {len(t2)}, pair family {len(pr)}, {len(fam)} partitions; downsets agree"


def check_triangularity():
    n = 0
    for k in (0, 1):
        geo, keys = _relation1_family(k)
        for key in keys:
            eq = relation1(key, geo.bundle)
            assert triangularity_check(eq) == [], key
            for _, t in eq.terms:
                if t.species is Species.TYPE_II:
                    assert circ_less_typeII(t, key) is Verdict.LOWER
            n += 1
    ctx, keys = _line_pair_keys()
    for eq in theorem2_system(keys, ctx):
        assert triangularity_check(eq) == []
        for _, t in eq.terms:
            if t.species is Species.RELATIVE_PAIR:
                assert circ_less_pair(t, eq.principal) is Verdict.LOWER
        n += 1
    return f"{n} equations, 0 violations"


def check_rubber():
    n = 0
    for ctx, t in rubber_grid():
        ok, bad = check_reduction(ctx, t)
        assert ok, str(t)
        assert bad == [], (str(t), bad)
        n += 1
    ctx = hirz(0)
    a = 4
    t1 = Insertion(1, "", "1")
    grid = 0
    for g, m, lm, ln in itertools.product(range(4), range(3), range(1, 4), range(1, 4)):
        omega = [Insertion(0, "", "1")] * m + [t1]
        t = term(g, (a, 1), mu=[(1, "1")] * (lm - 1) + [(a - lm + 1, "1")],
                 nu=[(1, "1")] * (ln - 1) + [(a - ln + 1, "1")], omega=omega)
        stripped = term(g, (a, 1), mu=t.mu.parts, nu=t.nu.parts, omega=omega[:-1])
        # remove tau_1(1) by hand: 2g - 2 + n + l(mu) + l(nu) with n the remaining markings
        assert dilaton(t, ctx) == RubberExpr.of(stripped, 2 * g - 2 + m + lm + ln)
        grid += 1
    return f"{n} reductions terminate with Lemma (ab) shape; dilaton grid {grid}"


def check_partitions():
    P2 = projective_space(2)
    rng = random.Random(11)
    labels = ["1", "h", "h2"]
    count = 0
    for ell in range(0, 7):
        for _ in range(40):
            ps = [(rng.randint(1, 3), rng.choice(labels)) for _ in range(ell)]
            mu = WeightedPartition(ps, P2)
            assert mu.aut_order == brute_aut(list(mu.parts))
            assert mu.zee == math.prod(m for m, _ in ps) * mu.aut_order
            d, s = mu.dual()
            assert d.dual()[0] == mu
            assert d.dual()[1] * s == 1
            count += 1
    C = curve(1)
    odd = 0
    for mu in _small_partitions(3, ["1", "a1", "a1v", "p"], C):
        d, s = mu.dual()
        dd, s2 = d.dual()
        # the double dual is (-1)^deg on each odd weight
        n_odd = sum(C.deg(p.weight) % 2 for p in mu)
        assert dd == mu and s * s2 == (-1) ** n_odd
        odd += n_odd > 0
    assert odd > 0
    for ps in itertools.product([(1, "1"), (2, "1"), (1, "h"), (3, "h")], repeat=3):
        try:
            nu = WeightedPartition(ps, projective_space(1))
        except PartitionError:
            continue
        for n_inf in range(1, 6):
            assert coefficient_C(nu, n_inf) != 0
    return f"{count} random partitions, {odd} with odd weights"


CRITERIA = [
    ("quintic-surface reproduction", check_quintic, 5),
    ("endpoint audit", check_endpoints, 1),
    ("Hurwitz oracle equivalence", check_hurwitz, 60),
    ("character correctness", check_characters, 30),
    ("order soundness", check_order, 60),
    ("triangularity audit", check_triangularity, 120),
    ("rubber termination and shape", check_rubber, 60),
    ("partition algebra", check_partitions, 10),
]


def evaluate(check, budget):
    start = time.perf_counter()
    try:
        detail = check()
        ok = True
    except AssertionError as exc:
        detail, ok = f"assertion failed: {exc}", False
    elapsed = time.perf_counter() - start
    if ok and elapsed > budget:
        ok, detail = False, f"{detail}; took {elapsed:.2f}s over the {budget}s budget"
    return ok, elapsed, detail


@pytest.mark.parametrize("name,check,budget", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(name, check, budget, capsys):
    ok, elapsed, detail = evaluate(check, budget)
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {name} ({elapsed:.2f}s): {detail}")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for name, check, budget in CRITERIA:
        ok, elapsed, detail = evaluate(check, budget)
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} ({elapsed:.2f}s): {detail}")
    sys.exit(1 if failed else 0)
