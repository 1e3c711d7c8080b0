import cmath
import itertools

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from fibertor.alexander import (Character, LaurentPoly, alexander_polynomial, character_group,
                                character_product, evaluate_character, evaluate_characters,
                                fox_alexander_matrix, fox_identity_residual, laurent_gcd,
                                maximal_minors, torus_presentation)
from fibertor.covers import build_cover, coinvariant_cover_spec, lift_automorphism
from fibertor.errors import DomainError, UnsupportedScaleError
from fibertor.group import Automorphism, SurfacePresentation
from fibertor.linalg import char_poly

u, x, y = sympy.symbols("u x y")
F1 = SurfacePresentation.free(1)
F2 = SurfacePresentation.free(2)
F3 = SurfacePresentation.free(3)
SIGMA = Automorphism.from_braid(3, [1, -2])
# pinned by hand Fox calculus before the build: u^2 - u(1 - x - 1/x) + 1
SIGMA_DELTA = u ** 2 - u * (1 - x - 1 / x) + 1


def to_sympy(p: LaurentPoly):
    names = [u, x, y][:p.nvars]
    return sum(c * sympy.Mul(*[v ** k for v, k in zip(names, e)]) for e, c in p.terms)


def same_up_to_units(p, q, gens):
    """p / q is +-monomial."""
    ratio = sympy.factor(sympy.cancel(p / q))
    num, den = sympy.fraction(ratio)
    for part in (num, den):
        poly = sympy.Poly(part, *gens)
        if len(poly.terms()) != 1 or abs(poly.terms()[0][1]) != 1:
            return False
    return True


def oracle_fox(word, gen, subs):
    """Fox derivative from the product rule, in sympy, then abelianized by ``subs``.

    ``word`` is a list of (generator, sign); ``subs`` maps generator -> sympy monomial.
    """
    total, prefix = 0, sympy.Integer(1)
    for g, s in word:
        if s > 0:
            if g == gen:
                total += prefix
            prefix *= subs[g]
        else:
            prefix /= subs[g]
            if g == gen:
                total -= prefix
    return sympy.expand(total)


def oracle_alexander(a: Automorphism, subs_fiber):
    r = a.rank
    subs = dict(enumerate(subs_fiber))
    subs[r] = u
    rows = []
    for rel in torus_presentation(a).relations:
        rows.append([oracle_fox(rel.letters, r, subs)] + [oracle_fox(rel.letters, j, subs) for j in range(r)])
    Mx = sympy.Matrix(rows)
    minors = []
    for cdel in range(r + 1):
        sub = Mx[:, [j for j in range(r + 1) if j != cdel]]
        for rsel in itertools.combinations(range(Mx.rows), r):
            minors.append(sympy.together(sub[list(rsel), :].det()))
    g = 0
    for mnr in minors:
        g = sympy.gcd(g, sympy.numer(sympy.together(mnr)))
    return g


# ---- fixtures

def test_sigma_fixture_oracle_is_pinned_value():
    delta = oracle_alexander(SIGMA, [x, x, x])
    assert same_up_to_units(delta, SIGMA_DELTA, (u, x))


def test_sigma_fixture_library():
    m = fox_alexander_matrix(torus_presentation(SIGMA))
    assert (len(m.entries), len(m.entries[0])) == (3, 4)
    delta = alexander_polynomial(m)
    assert same_up_to_units(to_sympy(delta), SIGMA_DELTA, (u, x))
    assert str(delta) == "u^2 + u*x - u + u*x^-1 + 1"


def test_sigma_substitutions():
    assert sympy.expand(SIGMA_DELTA.subs(x, -1)) == u ** 2 - 3 * u + 1
    assert sympy.expand(SIGMA_DELTA.subs(x, 1)) == u ** 2 + u + 1


def test_cat_map_one_variable():
    cat = Automorphism.from_images(F2, ["aab", "ab"])
    m = fox_alexander_matrix(torus_presentation(cat))
    assert m.nvars == 1
    assert sympy.expand(to_sympy(alexander_polynomial(m))) == u ** 2 - 3 * u + 1


def test_f1_identity_fixture():
    m = fox_alexander_matrix(torus_presentation(Automorphism.identity(F1)))
    d_t, d_x = (to_sympy(e) for e in m.entries[0])
    assert sympy.expand(d_t - (1 - x)) == 0
    assert sympy.expand(d_x - (u - 1)) == 0
    # the single-entry minors are 1 - x and u - 1, whose gcd is a unit
    assert sorted(str(p) for p in maximal_minors(m)) == ["-x + 1", "u - 1"]
    assert str(alexander_polynomial(m)) == "1"


def test_transvection_matrix_shape_and_delta():
    a = Automorphism.from_images(F2, ["ab", "b"])
    m = fox_alexander_matrix(torus_presentation(a))
    assert (len(m.entries), len(m.entries[0])) == (2, 3)
    expected = oracle_alexander(a, _coinvariant_subs(a))
    assert same_up_to_units(to_sympy(alexander_polynomial(m)), expected, (u, x))


def _coinvariant_subs(a):
    P = fox_alexander_matrix(torus_presentation(a)).projection
    names = [x, y][:P.rows]
    return [sympy.Mul(*[v ** P[i, j] for i, v in enumerate(names)]) for j in range(a.rank)]


@pytest.mark.parametrize("braid", [[1, -2], [1, 2], [1, -2, 1, -2], [1, 1, 2, -1]])
def test_braid_alexander_matches_oracle(braid):
    a = Automorphism.from_braid(3, braid)
    m = fox_alexander_matrix(torus_presentation(a))
    assert m.nvars == 2
    expected = oracle_alexander(a, _coinvariant_subs(a))
    assert same_up_to_units(to_sympy(alexander_polynomial(m)), expected, (u, x))


def test_three_variable_gcd_refused():
    m = fox_alexander_matrix(torus_presentation(Automorphism.identity(F2)))
    assert m.nvars == 3
    with pytest.raises(UnsupportedScaleError):
        alexander_polynomial(m)


# ---- Fox calculus identities

moves = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.sampled_from([1, -1])), max_size=6)


@given(moves)
def test_fundamental_formula_of_fox_calculus(ms):
    a = Automorphism.identity(F3)
    for i, j, s in ms:
        if i != j:
            a = Automorphism.transvection(F3, i, j, s).compose(a)
    m = fox_alexander_matrix(torus_presentation(a))
    for row in range(len(m.entries)):
        assert fox_identity_residual(m, row).is_zero()


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=4),
       st.lists(st.integers(-3, 3), min_size=1, max_size=4),
       st.lists(st.integers(-3, 3), min_size=1, max_size=3))
def test_laurent_gcd_matches_sympy(a, b, c):
    def mk(cs, shift):
        return LaurentPoly.from_dict(2, {(i, (i * shift) % 3 - 1): v for i, v in enumerate(cs) if v})
    p, q, g = mk(a, 1), mk(b, 2), mk(c, 1)
    if p.is_zero() or q.is_zero() or g.is_zero():
        return
    mine = laurent_gcd([p * g, q * g])
    P, Q = (sympy.numer(sympy.together(to_sympy(z))) for z in (p * g, q * g))
    assert same_up_to_units(to_sympy(mine), sympy.gcd(P, Q), (u, x))


# ---- characters

def test_trivial_character_on_cat_map():
    cat = Automorphism.from_images(F2, ["aab", "ab"])
    m = fox_alexander_matrix(torus_presentation(cat))
    p = evaluate_character(m, Character(()))
    assert [round(c.real, 12) for c in p.coeffs] == [1, -3, 1]


@pytest.mark.parametrize("value, expected", [((1, 2), [1, -3, 1]), ((0, 2), [1, 1, 1])])
def test_sigma_character_examples(value, expected):
    m = fox_alexander_matrix(torus_presentation(SIGMA))
    p = evaluate_character(m, Character((value,)))
    assert max(abs(c - e) for c, e in zip(p.coeffs, expected)) < 1e-12


@pytest.mark.parametrize("N", [3, 4, 5, 7])
def test_sigma_character_equals_substitution(N):
    m = fox_alexander_matrix(torus_presentation(SIGMA))
    for k in range(1, N):
        z = cmath.exp(2j * cmath.pi * k / N)
        expected = [1, -(1 - z - 1 / z), 1]
        p = evaluate_character(m, Character(((k, N),)))
        assert max(abs(c - e) for c, e in zip(p.coeffs, expected)) < 1e-12


def test_character_validation():
    m = fox_alexander_matrix(torus_presentation(SIGMA))
    with pytest.raises(DomainError):
        Character(((1, 0),))
    with pytest.raises(DomainError):
        evaluate_character(m, Character(((0, 2), (1, 2))))


def _check_decomposition(a, N):
    m = fox_alexander_matrix(torus_presentation(a))
    lift = lift_automorphism(a, build_cover(coinvariant_cover_spec(a, N)))
    chis = character_group(m, N)
    prod = character_product(evaluate_characters(m, chis))
    if m.h1_betti >= 2:
        from fibertor.alexander import ComplexPoly
        prod = prod * ComplexPoly((-1 + 0j, 1 + 0j), 0.0)
    actual = char_poly(lift.matrix).coeffs
    assert len(actual) == len(prod.coeffs)
    scale = max(1, max(abs(c) for c in actual))
    return max(abs(c - p) for c, p in zip(actual, prod.coeffs)) / (scale if scale > 1e6 else 1)


@pytest.mark.parametrize("images, N", [
    (["ab", "b"], 2), (["ab", "b"], 3), (["a", "b"], 2), (["a", "b"], 3), (["aab", "ab"], 5),
])
def test_character_decomposition_f2(images, N):
    assert _check_decomposition(Automorphism.from_images(F2, images), N) < 1e-8


@pytest.mark.parametrize("braid, N", [([1, -2], 2), ([1, -2], 3), ([1, -2], 9), ([1, 1], 3)])
def test_character_decomposition_f3(braid, N):
    assert _check_decomposition(Automorphism.from_braid(3, braid), N) < 1e-8


def test_evaluate_characters_parallel_matches_serial():
    m = fox_alexander_matrix(torus_presentation(SIGMA))
    chis = character_group(m, 5)
    assert evaluate_characters(m, chis, workers=2) == evaluate_characters(m, chis)
