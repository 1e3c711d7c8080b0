"""Fox calculus and the Alexander polynomial of a mapping torus.

The mapping torus group is presented by t x t^-1 = psi(x).  Fox
derivatives pushed into the free abelian quotient give the Alexander
matrix; the gcd of its maximal minors is the Alexander polynomial, and
specializing x at roots of unity gives the characteristic polynomials of
the lifted actions.
"""
import cmath

from fibertor import Automorphism
from fibertor.alexander import (Character, alexander_polynomial, evaluate_character,
                                fox_alexander_matrix, torus_presentation)

psi = Automorphism.from_braid(3, [1, -2])
pres = torus_presentation(psi)
print("relations:", [str(r) for r in pres.relations], "(d is the stable letter t)")

m = fox_alexander_matrix(pres)
print("variables:", m.variable_names)
for row in m.entries:
    print("   ", " | ".join(str(e) for e in row))

delta = alexander_polynomial(m)
print()
print("Alexander polynomial:", delta)


def substitute_x(delta, x):
    """Coefficients in u (highest first) of Delta with x replaced by a number."""
    top = max(e[0] for e, _ in delta.terms)
    out = [0j] * (top + 1)
    for (i, j), c in delta.terms:
        out[top - i] += c * x ** j
    return [round(z.real, 6) + 0.0 for z in out]


print("x = exp(2 pi i/N)   character prediction   Delta(u, x)")
for N in (1, 2, 3, 6):
    p = evaluate_character(m, Character(((1 % N, N),)))
    x = cmath.exp(2j * cmath.pi / N)
    print(f"N = {N}              {[round(c.real, 6) + 0.0 for c in reversed(p.coeffs)]!s:22} "
          f"{substitute_x(delta, x)}")
