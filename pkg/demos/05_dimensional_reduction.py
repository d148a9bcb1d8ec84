"""Static 4D fields versus the three-dimensional Haydys map.

A random lattice quadruple is lifted to a complex 4D connection; the
self-dual part of its curvature and its 4D Coulomb term reproduce the
three components of kappa.
"""
import numpy as np

from haydys import linear_model as lm
from haydys.dimred import dimred_check
from haydys.lattice import Grid

grid = Grid.from_radius(11, 2.0)
rng = np.random.default_rng(7)
for k in range(3):
    r = dimred_check(lm.random_configuration(grid, rng))
    print(f"config {k}: Re F+ {r['re_defect']:.1e}, Im F+ {r['im_defect']:.1e}, Coulomb {r['coulomb_defect']:.1e}")

c = lm.random_configuration(grid, rng)
r = lm.field_moment_correspondence(c)
print("moment-map triples vs kappa:", {k: f"{v:.1e}" for k, v in r["defects"].items()})
