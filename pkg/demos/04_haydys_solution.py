"""A Haydys monopole that is not Bogomolny.

Starts from the seed plus i*t*v0 with v0 a translation tangent and runs the
contraction iteration at t and t/2. The imaginary part of the result stays
of size ~t while the residual sits at the lattice floor, and the first
contraction ratio halves with t.

Run: python3 demos/04_haydys_solution.py [n] [direction]   (n=33 takes a few minutes)
"""
import sys

from haydys.lattice import Grid
from haydys.linops import LinearizedOperator, make_tangent, norm_Dstar
from haydys.monopole import bps_seed
from haydys.solver import fixed_point_solve

n = int(sys.argv[1]) if len(sys.argv) > 1 else 33
direction = sys.argv[2] if len(sys.argv) > 2 else "x"
m0 = bps_seed(Grid.from_radius(n, 8.0))
op = LinearizedOperator(m0)
nd = norm_Dstar(op)
v0 = make_tangent(op, direction)
print(f"n={n} direction={direction} |D*|={nd:.3f}")

for t in (0.05, 0.025):
    c, rep, _ = fixed_point_solve(m0, v0, t, op=op, norm_dstar=nd)
    print(f"t={t}: converged={rep.converged} in {rep.iterations} steps, ratios {[f'{r:.2e}' for r in rep.ratios]}")
    print(f"    |kappa| = {[f'{k:.2e}' for k in rep.kappa_norms]}, gauge {rep.gauge_residual:.1e}, floor {rep.floor:.3e}")
    print(f"    |(a, Psi)| = {rep.imag_norm:.4f}  ({rep.wall_time:.0f} s)")
