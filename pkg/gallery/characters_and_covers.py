"""
Characters and branched covers of the line
==========================================

Hurwitz counts are computed from the character table of S_d.  Here we
print a small table and compare a few counts against a direct search
over tuples of permutations.
"""

from relgw.p1theory import CharacterTable, brute_force_count, frobenius_count, hurwitz_number

# the character table of S_4, rows are irreducibles
table = CharacterTable(4)
print("classes:", table.classes)
for lam in table.irreps:
    print(lam, [table.values[(lam, r)] for r in table.classes])

# degree 3 covers with four simple branch points
simple = [(2, 1)] * 4
# the character sum counts all tuples, connected or not
print("Frobenius:", frobenius_count(3, simple), "search:", brute_force_count(3, simple, connected=False))
print("transitive only:", brute_force_count(3, simple))
print("H_0 =", hurwitz_number(0, 3, simple))

# one triple point and four simple branch points
profiles = [(3, 1)] + [(2, 1, 1)] * 4
print("H_0(4; (3,1),(2,1,1)^4) =", hurwitz_number(0, 4, profiles))
