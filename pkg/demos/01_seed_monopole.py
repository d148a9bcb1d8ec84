"""The charge-1 seed on a lattice: residual, energy, charge and far field.

Run: python3 demos/01_seed_monopole.py [n]
"""
import sys

from haydys.lattice import Grid
from haydys.monopole import asymptotic_check, bogomolny_residual, bps_seed, charge, energy, interior_norm

n = int(sys.argv[1]) if len(sys.argv) > 1 else 33
grid = Grid.from_radius(n, 8.0)
m = bps_seed(grid)
print(f"grid n={grid.n} h={grid.h:.4f} R={grid.radius:g}")

# the lattice residual is pure discretisation error and drops ~4x per halving of h
print(f"interior Bogomolny residual: {interior_norm(bogomolny_residual(m), grid):.3e}")

total, terms = energy(m)
print(f"energy {total:.4f}  (" + ", ".join(f"{k} {v:.3f}" for k, v in terms.items()) + ")")
print(f"flux charge at r=4: {charge(m, 4.0):+.4f}")

rep = asymptotic_check(m)
print(f"far field: |Phi| ~ {rep.c0:.4f} - {rep.c1:.3f}/(2r), |d_A Phi| ~ r^{rep.decay_slope:.2f}")
