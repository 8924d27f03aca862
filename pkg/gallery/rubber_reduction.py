"""
Reducing a rubber invariant
===========================

A rubber invariant on the trivial P^1-bundle over P^1 is rewritten until
no rubber remains.  The trace shows each rule and the multiset measure
before and after, which always goes down.
"""

from relgw.cli import geometry
from relgw.invariants import Insertion
from relgw.partitions import WeightedPartition
from relgw.rubber import RubberTerm, linearize, reduce

geo = geometry("hirzebruch:0")
X = geo.basis

term, sign = RubberTerm.build(0, (2, 1), WeightedPartition([(2, "1")], X), (Insertion(0, "", "h"),), 1,
                              WeightedPartition([(1, "1"), (1, "h")], X), basis=X)
print("start:", term)

trace = []
out = reduce(term, geo.rubber, mode="NonFiber", trace=trace)
for step in trace:
    print(f"  {step.rule:14s} {list(step.before)} -> {list(step.after)}")

for coeff, key in linearize(out.scale(sign), geo.rubber):
    print(f"{coeff} * {key}")
