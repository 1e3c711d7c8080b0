"""Cyclotomic monodromies and their bounded torsion.

When every eigenvalue of the monodromy is a root of unity the torsion
along the cyclic tower cannot grow exponentially.  The Kronecker test
decides this exactly; Lehmer's polynomial sits just above the line.
"""
from fibertor import IntMatrix, IntPoly, classify_monodromy, cyclic_tower, cyclotomic_poly


def companion(p):
    n = p.degree
    rows = [[0] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = 1
    for i in range(n):
        rows[i][n - 1] = -p.coeffs[i]
    return IntMatrix.from_rows(rows)


phi12 = companion(cyclotomic_poly(12))
print("companion of", cyclotomic_poly(12), "->", classify_monodromy(phi12).label)
print("torsion orders:", [lv.torsion_order for lv in cyclic_tower(phi12, 24).levels])

lehmer = IntPoly((1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1))
c = classify_monodromy(companion(lehmer))
print()
print("Lehmer's polynomial ->", c.label, f"spectral radius {c.witness.value:.10f}")

# A unipotent monodromy is cyclotomic, yet its mapping tori still carry torsion
# that |det'(A^k - I)| = 1 does not see.  The tower report flags the mismatch.
U = IntMatrix.from_rows([[1, 2], [0, 1]])
r = cyclic_tower(U, 6)
print()
print("unipotent [[1,2],[0,1]]:", [lv.torsion_order for lv in r.levels])
for note in r.notes:
    print("note:", note)
