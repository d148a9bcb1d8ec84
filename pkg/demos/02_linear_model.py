"""Nine complex structures on g (x) H^2 and their moment maps.

Prints every identity row with its worst relative defect over random
points. The two triple-product rows stated as diag(1,-1) are expected to
fail; the rows marked (measured) show what those products equal.
"""
from haydys import linear_model as lm

for N in (2, 3):
    print(f"--- su({N})")
    for check in (lm.clifford_check, lm.moment_transform_check, lm.lagrangian_check):
        r = check(N, trials=1000)
        print(f"{check.__name__}: {'ok' if r['passed'] else 'VIOLATED ' + str(r['violations'])}")
        for name, d in r["defects"].items():
            print(f"    {d:9.2e}  {name}")
    h = lm.hamiltonian_check(N)
    worst = max(row["defect"] for row in h["rows"].values())
    print(f"hamiltonian_check: worst central-difference defect {worst:.1e}")
