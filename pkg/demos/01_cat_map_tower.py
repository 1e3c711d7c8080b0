"""Torsion growth along the cyclic tower of the cat map.

The mapping torus of A = [[2, 1], [1, 1]] has k-fold cyclic covers with
monodromy A^k.  Their first homology has torsion |det(A^k - I)|, and
log(torsion)/k approaches log of the Mahler measure of the characteristic
polynomial, here log((3 + sqrt 5)/2).
"""
import math
import sys

from fibertor import IntMatrix, char_poly, cyclic_tower, mahler_measure

A = IntMatrix.from_rows([[2, 1], [1, 1]])
print("monodromy on H_1 of the fiber:", A)
print("characteristic polynomial:", char_poly(A))

M = mahler_measure(char_poly(A))
print(f"Mahler measure {M.value:.12f} (certified to {M.error_bound:.1e})")

report = cyclic_tower(A, 60)
print()
print(" k  torsion                     log(torsion)/k")
for lv in report.levels[:8] + report.levels[-3:]:
    print(f"{lv.index:2d}  {lv.torsion_order:<26d}  {lv.normalized_log_torsion:.6f}")
print()
print(f"tail estimate {report.limit_estimate:.6f}  vs  log M = {math.log(M.value):.6f}")

# plot-ready data: python 01_cat_map_tower.py plot.csv
if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write("index,normalized_log_torsion,mahler_reference\n")
        for lv in report.levels:
            fh.write(f"{lv.index},{lv.normalized_log_torsion!r},{report.mahler_reference!r}\n")
    print("wrote", sys.argv[1])
