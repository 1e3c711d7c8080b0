import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fibertor.covers import (CoverSpec, TorusQuotient, build_cover, check_degree,
                             coinvariant_cover_spec, deck_group_exponent, deck_matrix,
                             degree_cap, enumerate_lifts, fiber_component_count,
                             intersection_form, is_galois, lift_automorphism,
                             torus_quotient_mod)
from fibertor.errors import (DisconnectedCoverError, DomainError, InvalidQuotientError,
                             NotInvariantError, UnsupportedScaleError)
from fibertor.group import Automorphism, FreeWord, SurfacePresentation
from fibertor.intpoly import spectral_radius
from fibertor.linalg import IntMatrix, char_poly, determinant, matrix_power

F2 = SurfacePresentation.free(2)
F3 = SurfacePresentation.free(3)
S2 = SurfacePresentation.closed(2)


def oracle_subgroup_index(moduli, gens):
    """Index of the subgroup generated by ``gens`` in prod Z/m, by closure."""
    zero = tuple(0 for _ in moduli)
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = tuple((a + b) % m for a, b, m in zip(v, g, moduli))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return math.prod(moduli) // len(seen)


# ---- cover ranks

@pytest.mark.parametrize("rank, N", [(1, 5), (2, 2), (2, 3), (3, 2), (3, 3), (2, 9)])
def test_free_homology_cover_rank(rank, N):
    c = build_cover(CoverSpec.abelian(SurfacePresentation.free(rank), N))
    d = N ** rank
    assert c.degree == d
    assert c.h1_rank == d * (rank - 1) + 1
    assert len(c.schreier_generators) == c.h1_rank


def test_rank_examples():
    c = build_cover(CoverSpec.abelian(F2, 2))
    assert (c.degree, c.h1_rank) == (4, 5)
    c = build_cover(CoverSpec.abelian(F2, 1))
    assert (c.degree, c.h1_rank) == (1, 2)
    c = build_cover(CoverSpec.abelian(S2, 2))
    assert (c.degree, c.h1_rank) == (16, 34)


def test_genus_one_cover_rank():
    c = build_cover(CoverSpec.abelian(SurfacePresentation.closed(1), 3))
    assert (c.degree, c.h1_rank) == (9, 2)


def test_schreier_generators_lie_in_subgroup():
    c = build_cover(CoverSpec.abelian(F3, 2))
    for s in c.schreier_generators:
        assert c.trace(s) == 0
    for i, w in enumerate(c.transversal):
        assert c.trace(w) == i


def test_homology_cover_coset_table_matches_vector_addition():
    N = 3
    c = build_cover(CoverSpec.abelian(F2, N))
    labels = {}
    for i, w in enumerate(c.transversal):
        labels[i] = tuple(x % N for x in w.exponent_sums(2))
    assert len(set(labels.values())) == c.degree
    for i in range(c.degree):
        for j in range(2):
            target = list(labels[i])
            target[j] = (target[j] + 1) % N
            assert labels[c.coset_table[i][j]] == tuple(target)


def test_permutation_cover():
    # the 3-fold cyclic cover of F2 via a -> (0 1 2), b -> id, as permutations
    spec = CoverSpec.permutation(F2, [[1, 2, 0], [0, 1, 2]])
    c = build_cover(spec)
    assert (c.degree, c.h1_rank) == (3, 4)
    assert is_galois(c)
    with pytest.raises(DisconnectedCoverError):
        CoverSpec.permutation(F2, [[1, 0, 2], [0, 1, 2]])


def test_non_normal_permutation_cover():
    # S3 acting on 3 points: point stabilizer is not normal
    c = build_cover(CoverSpec.permutation(F2, [[1, 0, 2], [0, 2, 1]]))
    assert c.h1_rank == 4
    assert not is_galois(c)


def test_closed_quotient_must_kill_relator():
    with pytest.raises(InvalidQuotientError):
        CoverSpec.permutation(S2, [[1, 0, 2], [0, 2, 1], [0, 1, 2], [0, 1, 2]])


# ---- coinvariant covers

def test_coinvariant_examples():
    assert coinvariant_cover_spec(Automorphism.identity(F2), 3).degree == 9
    cat = Automorphism.from_images(F2, ["aab", "ab"])
    assert cat.abelianization_matrix() == IntMatrix.from_rows([[2, 1], [1, 1]])
    for N in (2, 3, 5):
        assert coinvariant_cover_spec(cat, N).degree == 1
    unip = Automorphism.from_images(F2, ["a", "aab"])
    assert unip.abelianization_matrix() == IntMatrix.from_rows([[1, 2], [0, 1]])
    assert coinvariant_cover_spec(unip, 2).degree == 4


@given(st.integers(2, 6))
def test_coinvariant_cover_always_lifts(N):
    a = Automorphism.from_braid(3, [1, -2])
    c = build_cover(coinvariant_cover_spec(a, N))
    lift = lift_automorphism(a, c)
    assert abs(determinant(lift.matrix)) == 1


# ---- lifts

def test_identity_lifts_to_identity():
    for spec in [CoverSpec.abelian(F2, 3), CoverSpec.abelian(S2, 2),
                 CoverSpec.permutation(F2, [[1, 0, 2], [0, 2, 1]])]:
        c = build_cover(spec)
        L = lift_automorphism(Automorphism.identity(spec.base), c).matrix
        assert L == IntMatrix.identity(c.h1_rank)


def test_lift_example_unimodular_5x5():
    a = Automorphism.from_images(F2, ["ab", "b"])
    L = lift_automorphism(a, build_cover(CoverSpec.abelian(F2, 2))).matrix
    assert (L.rows, L.cols) == (5, 5)
    assert abs(determinant(L)) == 1


def test_not_invariant_subgroup():
    swap = Automorphism.from_images(F2, ["b", "a"])
    spec = CoverSpec.from_quotient(F2, IntMatrix.from_rows([[1, 0]]), (2,))
    with pytest.raises(NotInvariantError):
        lift_automorphism(swap, build_cover(spec))


def test_lift_is_multiplicative():
    a = Automorphism.from_images(F2, ["ab", "b"])
    b = Automorphism.from_images(F2, ["a", "ba"])
    c = build_cover(CoverSpec.abelian(F2, 3))
    La, Lb = lift_automorphism(a, c).matrix, lift_automorphism(b, c).matrix
    assert lift_automorphism(a.compose(b), c).matrix == La @ Lb
    assert lift_automorphism(a.power(3), c).matrix == matrix_power(La, 3)


def test_closed_lift_preserves_intersection_form():
    psi = Automorphism.dehn_twist(2, "a", 0).compose(Automorphism.dehn_twist(2, "b", 1, -1))
    c = build_cover(CoverSpec.abelian(S2, 2))
    omega = intersection_form(c)
    assert omega.transpose() == -omega
    assert abs(determinant(omega)) == 1
    L = lift_automorphism(psi, c).matrix
    assert L @ omega @ L.transpose() == omega


def test_base_intersection_form_is_standard():
    c = build_cover(CoverSpec.trivial(S2))
    omega = intersection_form(c)
    assert abs(determinant(omega)) == 1
    assert omega.transpose() == -omega


def test_lift_domain_mismatch():
    c = build_cover(CoverSpec.abelian(F3, 2))
    with pytest.raises(DomainError):
        lift_automorphism(Automorphism.identity(F2), c)


# ---- deck group and lift enumeration

def test_identity_lifts_are_the_deck_group():
    c = build_cover(CoverSpec.abelian(F2, 2))
    lifted = lift_automorphism(Automorphism.identity(F2), c)
    lifts = enumerate_lifts(lifted)
    decks = {deck_matrix(c, k) for k in range(c.degree)}
    assert len(lifts) == 4
    assert set(lifts) == decks
    assert deck_group_exponent(c) == 2
    for g in lifts:
        assert g @ g == IntMatrix.identity(c.h1_rank)


def test_lift_count_bounded_and_spectral_radius_constant():
    a = Automorphism.from_images(F2, ["ab", "b"])
    for N in (2, 3):
        c = build_cover(CoverSpec.abelian(F2, N))
        lifts = enumerate_lifts(lift_automorphism(a, c))
        assert len(lifts) <= c.degree ** 2
        radii = [spectral_radius(char_poly(L)).value for L in lifts]
        assert max(radii) - min(radii) <= 1e-9


# ---- fiber components

def test_fiber_component_examples():
    for N in (2, 5, 7):
        q = TorusQuotient((N,), ((0,), (0,)), (1,))
        assert fiber_component_count(q) == N
    assert fiber_component_count(TorusQuotient((6,), ((1,), (0,)), (0,))) == 1
    q = TorusQuotient((2, 4), ((0, 1), (0, 2)), (1, 0))
    assert fiber_component_count(q) == 2


@given(st.lists(st.integers(1, 6), min_size=1, max_size=3).flatmap(
    lambda ms: st.tuples(
        st.just(tuple(ms)),
        st.lists(st.tuples(*[st.integers(0, m - 1) for m in ms]), min_size=1, max_size=3))))
def test_fiber_components_match_subgroup_closure(data):
    moduli, fiber = data
    full_index = oracle_subgroup_index(moduli, fiber)
    # choose t to fill the quotient when it is cyclic, otherwise expect rejection
    for t in itertools.product(*[range(m) for m in moduli]):
        if oracle_subgroup_index(moduli, fiber + [t]) == 1:
            q = TorusQuotient(moduli, tuple(fiber), t)
            assert fiber_component_count(q) == full_index
            break
    else:
        with pytest.raises(InvalidQuotientError):
            fiber_component_count(TorusQuotient(moduli, tuple(fiber), tuple(0 for _ in moduli)))


def test_fiber_components_check_monodromy():
    A = IntMatrix.from_rows([[0, 1], [1, 0]])
    with pytest.raises(InvalidQuotientError):
        fiber_component_count(TorusQuotient((2, 2), ((0, 1), (0, 0)), (1, 0), A))


def test_torus_quotient_mod_components():
    a = Automorphism.identity(F2)
    q = torus_quotient_mod(a, 2)
    assert fiber_component_count(q) == 2
    cat = Automorphism.from_images(F2, ["aab", "ab"])
    assert fiber_component_count(torus_quotient_mod(cat, 3)) == 3


# ---- degree cap

def test_degree_cap_env(monkeypatch):
    monkeypatch.setenv("FIBERTOR_MAX_DEGREE", "8")
    assert degree_cap("abelian") == 8
    with pytest.raises(UnsupportedScaleError):
        build_cover(CoverSpec.abelian(F2, 3))
    monkeypatch.delenv("FIBERTOR_MAX_DEGREE")
    check_degree("abelian", 81)
