"""Covers of a closed genus-2 surface and lifts of mapping classes.

The mod-2 homology cover of the genus-2 surface has degree 16 and genus
17, so H_1 has rank 34.  A product of Dehn twists lifts to it; the lift
preserves the intersection form, and its spectral radius can be compared
with that of the base action.
"""
from fibertor import (Automorphism, CoverSpec, SurfacePresentation, build_cover, char_poly,
                      classify_monodromy, intersection_form, lift_automorphism)
from fibertor.linalg import determinant

S = SurfacePresentation.closed(2)
print("relator:", S.relator)

psi = Automorphism.dehn_twist(2, "a", 0).compose(Automorphism.dehn_twist(2, "b", 0, -1))
psi = psi.compose(Automorphism.dehn_twist(2, "a", 1))
print("monodromy on H_1(S):")
print(psi.abelianization_matrix())
print("base classification:", classify_monodromy(psi.abelianization_matrix()).label)

cover = build_cover(CoverSpec.abelian(S, 2))
print()
print(f"mod-2 cover: degree {cover.degree}, H_1 rank {cover.h1_rank}")
omega = intersection_form(cover)
print("intersection form: antisymmetric", omega.transpose() == -omega, " det", determinant(omega))

L = lift_automorphism(psi, cover).matrix
print("lift preserves the form:", L @ omega @ L.transpose() == omega)
c = classify_monodromy(L)
print("lift classification:", c.label, f"(spectral radius {c.witness.value:.6f})" if not c.is_cyclotomic else "")
print("lifted char poly degree", char_poly(L).degree)
