import itertools

import pytest

from relgw.cohomology import curve, projective_space
from relgw.invariants import (Bounds, Insertion, InvariantError, InvariantKey, Species, Verdict,
                              circ_less_pair, circ_less_typeII, diagnose, downset, enumerate_keys,
                              format_key, hirzebruch_lattice, line_lattice, parse_key, primary_less)
from relgw.partitions import Cmp, WeightedPartition, lex_compare

X = projective_space(1)
LAT = hirzebruch_lattice(1)
P1 = curve(0)
LINE = line_lattice("P1", 1)


def t2(g, beta, mu=(), nu=(), omega=(), dist="h", dfac="D0"):
    return InvariantKey.make(Species.TYPE_II, g, beta, tuple(omega), distinguished=Insertion(0, dfac, dist),
                             mu=WeightedPartition(mu, X), nu=WeightedPartition(nu, X), space="Y",
                             lattice=LAT, basis=X)


def rp(g, d, nu=(), omega=()):
    return InvariantKey.make(Species.RELATIVE_PAIR, g, (d,), tuple(omega), nu=WeightedPartition(nu, P1),
                             space="P1/pt", lattice=LINE, basis=P1)


def test_type_ii_condition_one():
    assert circ_less_typeII(t2(5, (1, 1), nu=[(1, "1")]), t2(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")])) \
        is Verdict.LOWER


def test_type_ii_condition_four():
    a = t2(0, (2, 1), mu=[(1, "h")], nu=[(2, "1")])
    b = t2(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")])
    assert a.mu.deg == b.mu.deg + 2
    assert circ_less_typeII(a, b) is Verdict.LOWER
    assert circ_less_typeII(b, a) is Verdict.NOT_LOWER


def test_type_ii_lex_incomparable_pair():
    C = curve(1)
    a = InvariantKey.make(Species.TYPE_II, 0, (1,), distinguished=Insertion(0, "D0", "p"),
                          nu=WeightedPartition([(2, "a1")], C), space="Y", basis=C)
    b = a.replace(nu=WeightedPartition([(2, "a1v")], C))
    assert lex_compare(a.nu, b.nu) is Cmp.INCOMPARABLE
    assert circ_less_typeII(a, b) is Verdict.NOT_LOWER
    assert circ_less_typeII(b, a) is Verdict.NOT_LOWER
    assert "lex-incomparable" in diagnose(a, b)


def test_wrong_species_rejected():
    with pytest.raises(InvariantError):
        circ_less_typeII(rp(0, 1, [(1, "1")]), rp(0, 1, [(1, "p")]))
    k = InvariantKey.make(Species.TYPE_II, 0, (1, 1), nu=WeightedPartition([(1, "1")], X), lattice=LAT, basis=X)
    with pytest.raises(InvariantError):
        circ_less_typeII(k, k)


def test_pair_conditions():
    assert circ_less_pair(rp(0, 1, [(1, "1")]), rp(1, 1, [(1, "1")])) is Verdict.LOWER
    assert circ_less_pair(rp(0, 1, [(1, "p")]), rp(0, 1, [(1, "1")])) is Verdict.LOWER
    k = rp(1, 2, [(2, "1")])
    assert circ_less_pair(k, k) is Verdict.NOT_LOWER


def test_primary_less():
    assert primary_less(t2(2, (1, 1), nu=[(1, "1")]), t2(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")]))
    assert primary_less(rp(1, 1, [(1, "1")]), rp(2, 1, [(1, "1")]))
    assert not primary_less(rp(1, 1, [(1, "1")]), rp(1, 1, [(1, "p")]))


def test_mu_size_must_match_beta():
    with pytest.raises(InvariantError):
        t2(0, (2, 1), mu=[], nu=[(2, "1")])


def test_canonical_insertions():
    ins = [Insertion(1, "", "h"), Insertion(0, "", "1"), Insertion(2, "D0", "1")]
    keys = {t2(0, (1, 1), nu=[(1, "1")], omega=p) for p in itertools.permutations(ins)}
    assert len(keys) == 1


def test_key_text_round_trip():
    k = t2(1, (2, 1), mu=[(1, "h")], nu=[(1, "h"), (1, "1")], omega=[Insertion(1, "Dinf", "1")])
    assert format_key(parse_key(format_key(k), LAT, X)) == format_key(k)
    assert parse_key(format_key(k), LAT, X) == k


# ---------------------------------------------------------------------------
# strict partial order on generated families


def _check_strict_order(keys, less):
    lower = {k: {j for j in keys if less(j, k) is Verdict.LOWER} for k in keys}
    for k, ls in lower.items():
        assert k not in ls
        for j in ls:
            assert lower[j] <= ls
            assert k not in lower[j]


def type_ii_family():
    b = Bounds(1, 1, 1, omega_classes=(("", "1"), ("", "h"), ("D0", "1")), distinguished_labels=("h",))
    return enumerate_keys(t2(0, (2, 1), mu=[(1, "1")], nu=[(2, "1")]), b)


def pair_family():
    C = curve(1)
    lat = line_lattice("E", 1)
    top = InvariantKey.make(Species.RELATIVE_PAIR, 0, (3,), nu=WeightedPartition([(3, "1")], C),
                            lattice=lat, basis=C, space="E/pt")
    b = Bounds(2, 1, 1, omega_classes=(("", "p"), ("", "1")), weight_labels=C.labels)
    return enumerate_keys(top, b)


def test_type_ii_strict_order():
    fam = type_ii_family()
    assert len(fam) >= 500
    _check_strict_order(fam, circ_less_typeII)


def test_pair_strict_order():
    fam = pair_family()
    assert len(fam) >= 500
    _check_strict_order(fam, circ_less_pair)


# ---------------------------------------------------------------------------
# downsets


def test_minimal_key_has_empty_downset():
    k = t2(0, (0, 0))
    b = Bounds(1, 1, 1, omega_classes=(("", "1"),), distinguished_labels=("h",))
    assert downset(k, b) == frozenset()


def brute_pair_downset(key, max_genus, max_omega, max_k, classes):
    """Enumerate-and-filter with the order conditions spelled out."""
    out = set()
    ins = [Insertion(k, "", c) for k in range(max_k + 1) for c in classes]
    for d in range(0, key.beta[0] + 1):
        for g in range(max_genus + 1):
            for n in range(max_omega + 1):
                for om in itertools.combinations_with_replacement(ins, n):
                    for nu in _pair_weights(d):
                        cand = rp(g, d, nu, om)
                        steps = [(cand.beta[0], key.beta[0]), (g, key.g), (n, key.n_omega),
                                 (-cand.nu.deg, -key.nu.deg)]
                        verdict = None
                        for x, y in steps:
                            if x != y:
                                verdict = x < y
                                break
                        if verdict is None:
                            verdict = lex_compare(cand.nu, key.nu) is Cmp.GREATER
                        if verdict:
                            out.add(cand)
    return out


def _pair_weights(d):
    parts = [(m, w) for m in range(1, d + 1) for w in ("1", "p")]
    seen = set()
    for r in range(d + 1):
        for combo in itertools.combinations_with_replacement(parts, r):
            if sum(m for m, _ in combo) == d:
                seen.add(tuple(sorted(combo)))
    return sorted(seen)


@pytest.mark.parametrize("d,g", [(1, 0), (1, 1), (2, 0), (2, 1)])
def test_downset_matches_brute_force(d, g):
    key = rp(g, d, [(d, "1")], [Insertion(0, "", "p")])
    b = Bounds(1, 1, 1, omega_classes=(("", "1"), ("", "p")), weight_labels=("1", "p"))
    got = downset(key, b)
    assert got == brute_pair_downset(key, 1, 1, 1, ("1", "p"))
    # order closed
    for k in got:
        assert downset(k, b) <= got
