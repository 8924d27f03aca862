import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from relgw.cohomology import projective_space
from relgw.degeneration import coefficient_C
from relgw.p1theory import (CharacterTable, P1Error, PlainPartition, Unresolved, brute_force_count,
                            cap_invariant, character, class_size, dimension, fiber_constant,
                            hurwitz_number, partitions_of)
from relgw.partitions import WeightedPartition


def _cycle_type(perm):
    seen, out = set(), []
    for i in range(len(perm)):
        if i in seen:
            continue
        n, j = 0, i
        while j not in seen:
            seen.add(j)
            j = perm[j]
            n += 1
        out.append(n)
    return tuple(sorted(out, reverse=True))


def test_partition_canonical():
    assert PlainPartition([1, 3, 2, 1]) == (3, 2, 1, 1)
    assert len(partitions_of(8)) == 22
    with pytest.raises(P1Error):
        PlainPartition([2, 0])


@given(st.integers(1, 7), st.data())
def test_trivial_and_sign(n, data):
    rho = data.draw(st.sampled_from(partitions_of(n)))
    assert character((n,), rho) == 1
    assert character((1,) * n, rho) == (-1) ** (n - len(rho))


def test_standard_rep_trace():
    # permutation matrices on C^n split as trivial + standard
    for n in range(2, 7):
        seen = set()
        for perm in itertools.permutations(range(n)):
            rho = _cycle_type(perm)
            if rho in seen:
                continue
            seen.add(rho)
            trace = sum(1 for i in range(n) if perm[i] == i)
            assert character((n - 1, 1), rho) == trace - 1
    assert character((2, 1), (3,)) == -1


def test_class_sizes_count_permutations():
    for n in range(1, 7):
        counts = {}
        for perm in itertools.permutations(range(n)):
            r = _cycle_type(perm)
            counts[r] = counts.get(r, 0) + 1
        assert counts == {r: class_size(r) for r in partitions_of(n)}


@pytest.mark.parametrize("n", range(1, 9))
def test_orthogonality(n):
    table = CharacterTable(n)
    assert table.row_orthogonality_defects() == []
    assert table.column_orthogonality_defects() == []
    assert sum(d * d for d in table.dimensions.values()) == math.factorial(n)


def test_character_size_mismatch():
    with pytest.raises(P1Error):
        character((2, 1), (2,))


def test_dimension_hook_values():
    assert dimension((3, 2)) == 5
    assert dimension((2, 2, 1)) == 5
    assert dimension((4, 3, 1)) == 70


# ---------------------------------------------------------------------------
# Hurwitz numbers

def _simple(d):
    return (2,) + (1,) * (d - 2)


HURWITZ_CASES = [(d, [_simple(d)] * b) for d in range(2, 6) for b in range(0, 5)]
HURWITZ_CASES += [(3, [(3,), (3,)]), (4, [(4,), (2, 2), (3, 1)]), (5, [(5,), (3, 2), (2, 2, 1)]),
                  (5, [(3, 1, 1), (3, 1, 1), (5,)]), (4, [(2, 2), (2, 2), (2, 2), (2, 1, 1)])]


@pytest.mark.parametrize("d,profiles", HURWITZ_CASES)
def test_hurwitz_matches_brute_force(d, profiles):
    from relgw.p1theory import frobenius_count, transitive_count
    assert frobenius_count(d, profiles) == brute_force_count(d, profiles, connected=False)
    assert transitive_count(d, profiles) == brute_force_count(d, profiles, connected=True)


def test_degree_one():
    assert hurwitz_number(0, 1, [(1,), (1,)]) == 1
    assert hurwitz_number(1, 1, [(1,), (1,)]) == 0


def test_small_examples():
    assert hurwitz_number(0, 2, [(2,), (2,)]) == Fraction(brute_force_count(2, [(2,), (2,)]), 2) == Fraction(1, 2)
    simple4 = [(2, 1)] * 4
    assert hurwitz_number(0, 3, simple4) == Fraction(brute_force_count(3, simple4), 6) == 4
    assert hurwitz_number(1, 3, simple4) == 0


def test_disconnected_genus_convention():
    # two sheets with no branching: a disjoint pair of lines has genus -1
    assert hurwitz_number(-1, 2, [], connected=False) == Fraction(1, 2)
    assert hurwitz_number(-1, 2, [], connected=True) == 0


def test_bad_profile_size():
    with pytest.raises(P1Error):
        hurwitz_number(0, 3, [(2,)])


# ---------------------------------------------------------------------------
# fiber constants

@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_totally_ramified_cap(d):
    got = cap_invariant(d, [d - 1])
    assert got == Fraction(1, math.factorial(d))
    brute = Fraction(brute_force_count(d, [(d,), (d,)]), math.factorial(d)) / math.factorial(d - 1)
    assert got == brute


def test_cap_dimension_constraint():
    assert cap_invariant(3, [1]) == 0
    assert cap_invariant(3, [1, 1]) == Fraction(hurwitz_number(0, 3, [(3,), (2, 1), (2, 1)]))
    assert cap_invariant(2, [0, 1]) == 2 * cap_invariant(2, [1])


def test_principal_slot_matches_coefficient():
    P = projective_space(1)
    for mults, nid, n in [((3,), 0, 4), ((2, 2), 1, 5), ((1,), 1, 3), ((), 2, 2), ((4, 2), 0, 1)]:
        nu = WeightedPartition([(m, "h") for m in mults] + [(1, "1")] * nid, P)
        desc = {"kind": "principal", "nu_mults": list(mults), "n_id": nid, "n": n}
        assert fiber_constant(desc) == coefficient_C(nu, n)


def test_unresolved_slots():
    assert isinstance(fiber_constant({"kind": "principal", "nu_mults": [2], "genus": 1, "n": 1}), Unresolved)
    assert isinstance(fiber_constant({"kind": "moved_insertions", "hodge": True}), Unresolved)
    assert isinstance(fiber_constant({"kind": "hurwitz", "g": 1, "d": 2, "profiles": []}), Unresolved)
    assert fiber_constant({"kind": "hurwitz", "g": 0, "d": 2, "profiles": [[2], [2]]}) == Fraction(1, 2)
    assert fiber_constant({"kind": "cap", "d": 3, "exponents": [2]}) == Fraction(1, 6)
