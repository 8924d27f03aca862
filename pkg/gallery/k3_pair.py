"""
Relative invariants of a quartic K3 along a plane quartic
=========================================================

Each relative invariant is expressed through absolute invariants and
lower relative ones.  We build the three genus three equations used for
the quintic surface and solve them.
"""

from relgw.cohomology import curve
from relgw.invariants import circ_less_pair, format_key
from relgw.quintic_surface import build_section33_system, shape_of
from relgw.solver import explain, solve

system = build_section33_system()
W = curve(3)
k3 = [e for e in system.equations if e.principal.space == "S4/C4" and e.principal.g == 3]
for e in k3:
    print(e)

sol = solve(k3, system.oracles, order=circ_less_pair)
for key in sol.order:
    print(shape_of(key.nu, W), "=", sol.values[key], " ", format_key(key))

top = sol.order[-1]
print()
for line in explain(sol, top, k3):
    print(line)
