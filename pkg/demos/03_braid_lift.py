"""A cyclotomic monodromy whose lift to a finite cover is not.

The braid sigma_1 sigma_2^-1 acts on the free group F_3.  On H_1(F_3) it
permutes the generators, so its action is periodic.  On the double cover
coming from the coinvariant quotient the lifted action picks up the
eigenvalue (3 + sqrt 5)/2, and the character decomposition shows where it
comes from.
"""
from fibertor import (Automorphism, build_cover, char_poly, classify_monodromy,
                      coinvariant_cover_spec, lift_automorphism, search_noncyclotomic_lift)
from fibertor.alexander import (character_group, evaluate_character, fox_alexander_matrix,
                                torus_presentation)

psi = Automorphism.from_braid(3, [1, -2])
print("images:", [str(w) for w in psi.images])
A = psi.abelianization_matrix()
print("on H_1:", classify_monodromy(A).label, "with char poly", char_poly(A))

result = search_noncyclotomic_lift(psi, [2, 3, 4], budget=4)
print()
print("search attempts (modulus, outcome):", result.attempts)
print(f"first non-cyclotomic lift at N = {result.modulus}, spectral radius {result.witness.value:.9f}")

cover = build_cover(coinvariant_cover_spec(psi, 2))
lift = lift_automorphism(psi, cover)
print()
print(f"cover degree {cover.degree}, H_1 rank {cover.h1_rank}")
print("lifted char poly:", char_poly(lift.matrix))

m = fox_alexander_matrix(torus_presentation(psi))
for chi in character_group(m, 2):
    p = evaluate_character(m, chi)
    print("  character", chi.values, "->", [round(c.real, 9) for c in reversed(p.coeffs)])
