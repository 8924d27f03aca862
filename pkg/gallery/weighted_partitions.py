"""
Weighted partitions on a genus one curve
========================================

Parts carry a multiplicity and a cohomology weight.  Odd weights make
the dual map pick up signs, and a repeated odd part is refused.
"""

from relgw.cohomology import curve
from relgw.partitions import PartitionError, WeightedPartition, format_partition, lex_compare

E = curve(1)
print("basis of H*(E):", E.labels)

mu = WeightedPartition([(2, "a1"), (1, "a1v"), (1, "p")], E)
print(format_partition(mu), "zee =", mu.zee, "|Aut| =", mu.aut_order)

d, sign = mu.dual()
print("dual:", format_partition(d), "sign", sign)
dd, sign2 = d.dual()
print("dual twice:", format_partition(dd), "total sign", sign * sign2)

try:
    WeightedPartition([(1, "a1"), (1, "a1")], E)
except PartitionError as exc:
    print("refused:", exc)

# comparing two partitions of the same size
nu = WeightedPartition([(2, "p"), (1, "1"), (1, "1")], E)
print(format_partition(mu), "vs", format_partition(nu), "->", lex_compare(mu, nu).value)
