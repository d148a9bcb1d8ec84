"""Near-kernel of the gauge-fixed linearisation at the seed.

Builds the four tangent directions (three translations and the phase),
reports how close each is to ker D, and counts the eigenvalues of D*D
below the first gap.
The default grid is small so this runs in about a minute.
"""
import sys

import numpy as np

from haydys.lattice import Grid
from haydys.linops import DIRECTIONS, LinearizedOperator, kernel_and_gap, make_tangent, tangent_defect
from haydys.monopole import bps_seed

n = int(sys.argv[1]) if len(sys.argv) > 1 else 21
op = LinearizedOperator(bps_seed(Grid.from_radius(n, 8.0)))

for d in DIRECTIONS:
    v = make_tangent(op, d)
    print(f"tangent {d:5s}: |Dv|/|v|_H1 = {tangent_defect(op, v):.2e}")

# Lanczos alone sees each near-degenerate cluster once; the block solve counts them
vals, _, res, lanczos = kernel_and_gap(op)
print("Lanczos values:           ", np.array2string(lanczos, precision=3))
print("lowest eigenvalues of D*D:", np.array2string(vals, precision=3))
print(f"gap ratio lambda_4 / lambda_5 = {vals[3] / vals[4]:.1e}")
