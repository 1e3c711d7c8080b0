import pytest
from hypothesis import given
from hypothesis import strategies as st

from fibertor.errors import DomainError
from fibertor.group import (Automorphism, FreeWord, SurfacePresentation, abelianization_matrix,
                            apply, compose, dehn_reduce, standard_relator)
from fibertor.linalg import IntMatrix, determinant

F2 = SurfacePresentation.free(2)
F3 = SurfacePresentation.free(3)


def W(s):
    return FreeWord.parse(s)


def oracle_substitute(images, word):
    """Letter-by-letter substitution with free reduction done by a stack on strings."""
    out = []
    for ch in word:
        img = images[ch.lower()]
        if ch.isupper():
            img = img[::-1].swapcase()
        for c in img:
            if out and out[-1] == c.swapcase():
                out.pop()
            else:
                out.append(c)
    return "".join(out)


# ---- words

def test_parse_and_print():
    assert str(W("aBbc")) == "ac"
    assert str(W("x0x1X1")) == "a"
    assert str(W("")) == ""
    assert W("x27").letters == ((27, 1),)
    assert str(W("x27X3")) == "x27X3"
    with pytest.raises(DomainError):
        W("a?b")


@given(st.text(alphabet="abcABC", max_size=20))
def test_word_parse_matches_stack_reduction(s):
    assert str(W(s)) == oracle_substitute({"a": "a", "b": "b", "c": "c"}, s)


@given(st.text(alphabet="abAB", max_size=12), st.text(alphabet="abAB", max_size=12))
def test_word_group_laws(u, v):
    u, v = W(u), W(v)
    assert (u * v).inverse() == v.inverse() * u.inverse()
    assert (u * u.inverse()).is_identity()
    assert (u * v).exponent_sums(2) == tuple(x + y for x, y in zip(u.exponent_sums(2), v.exponent_sums(2)))


# ---- apply / compose

def test_apply_examples():
    ident = Automorphism.identity(F2)
    assert str(ident.apply("ab")) == "ab"
    a = Automorphism.from_images(F2, ["ab", "b"])
    assert str(apply(a, "aB")) == "a"
    s1 = Automorphism.braid_generator(3, 1)
    assert [str(w) for w in s1.images] == ["abA", "a", "c"]
    assert str(s1.apply("b")) == "a"


def test_compose_examples():
    a = Automorphism.from_images(F2, ["ab", "b"])
    assert compose(a, Automorphism.identity(F2)) == a
    assert compose(a, a.inverse()) == Automorphism.identity(F2)
    s1 = Automorphism.braid_generator(3, 1)
    s2i = Automorphism.braid_generator(3, -2)
    psi = Automorphism.from_braid(3, [1, -2])
    assert psi == compose(s2i, s1)
    # oracle: apply sigma_1 then sigma_2^-1 word by word
    img1 = {"a": "abA", "b": "a", "c": "c"}
    img2 = {"a": "a", "b": "c", "c": "Cbc"}
    for g in "abc":
        expected = oracle_substitute(img2, img1[g])
        assert str(psi.apply(g)) == expected
    assert [str(w) for w in psi.images] == ["acA", "a", "Cbc"]


def test_compose_other_order_is_conjugate():
    s1 = Automorphism.braid_generator(3, 1)
    s2i = Automorphism.braid_generator(3, -2)
    one, other = compose(s2i, s1), compose(s1, s2i)
    assert compose(s1, compose(one, s1.inverse())) == other


@pytest.mark.parametrize("images, rows", [
    (["a", "b"], [[1, 0], [0, 1]]),
    (["ab", "b"], [[1, 0], [1, 1]]),
])
def test_abelianization_examples(images, rows):
    assert abelianization_matrix(Automorphism.from_images(F2, images)) == IntMatrix.from_rows(rows)


def test_abelianization_braid_is_permutation_like():
    A = Automorphism.from_braid(3, [1, -2]).abelianization_matrix()
    assert abs(determinant(A)) == 1
    assert sorted(A.entries) == [0, 0, 0, 0, 0, 0, 1, 1, 1]


def test_invalid_automorphisms():
    with pytest.raises(DomainError):
        Automorphism.from_images(F2, ["a", "a"])
    with pytest.raises(DomainError):
        Automorphism.from_images(F2, ["ab"])
    with pytest.raises(DomainError):
        Automorphism.from_images(F2, ["a", "bc"])
    with pytest.raises(DomainError):
        Automorphism(F2, (W("ab"), W("b")), (W("ab"), W("b")))


# ---- random automorphisms

moves = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.sampled_from([1, -1]),
                           st.sampled_from(["left", "right"])), max_size=8)


def build(moves_, rank=3):
    dom = SurfacePresentation.free(rank)
    a = Automorphism.identity(dom)
    for i, j, s, side in moves_:
        if i % rank != j % rank:
            a = Automorphism.transvection(dom, i % rank, j % rank, s, side).compose(a)
    return a


@given(moves, moves)
def test_abelianization_is_a_homomorphism(m1, m2):
    a, b = build(m1), build(m2)
    assert (a.compose(b)).abelianization_matrix() == a.abelianization_matrix() @ b.abelianization_matrix()


@given(moves, st.text(alphabet="abcABC", max_size=10))
def test_inverse_undoes_apply(m, w):
    a = build(m)
    assert a.apply_inverse(a.apply(w)) == W(w)
    assert a.inverse().apply(a.apply(w)) == W(w)


@given(moves)
def test_nielsen_inverse_recovered(m):
    a = build(m)
    b = Automorphism.from_images(a.domain, a.images)
    assert b.inverse_images == a.inverse_images


@given(moves, st.integers(-3, 3))
def test_power_laws(m, k):
    a = build(m)
    assert a.power(k).compose(a.power(-k)) == Automorphism.identity(a.domain)


# ---- closed surfaces

def test_closed_surface_relator():
    S = SurfacePresentation.closed(2)
    assert str(S.relator) == "abABcdCD"
    assert S.chi_abs == 2
    assert S.word_equal(W("abAB"), W("dcDC"))
    assert not S.word_equal(W("ab"), W("ba"))
    assert dehn_reduce(standard_relator(2), S.relator).is_identity()


@pytest.mark.parametrize("genus", [1, 2, 3])
def test_dehn_twists_preserve_relator(genus):
    for curve in "ab":
        for idx in range(genus):
            T = Automorphism.dehn_twist(genus, curve, idx)
            assert T.compose(T.inverse()) == Automorphism.identity(T.domain)


def test_dehn_twist_action_on_homology():
    Ta = Automorphism.dehn_twist(1, "a")
    Tb = Automorphism.dehn_twist(1, "b")
    assert Ta.abelianization_matrix() == IntMatrix.from_rows([[1, 1], [0, 1]])
    assert Tb.abelianization_matrix() == IntMatrix.from_rows([[1, 0], [-1, 1]])
    cat_like = Ta.compose(Tb.inverse())
    assert cat_like.abelianization_matrix() == IntMatrix.from_rows([[2, 1], [1, 1]])


def test_closed_surface_rejects_non_automorphism():
    S = SurfacePresentation.closed(2)
    imgs = [W("b"), W("a"), W("c"), W("d")]
    with pytest.raises(DomainError):
        Automorphism(S, tuple(imgs), tuple(imgs))


@given(st.lists(st.tuples(st.sampled_from("ab"), st.integers(0, 1), st.sampled_from([1, -1])),
                max_size=5), st.text(alphabet="abcdABCD", max_size=8))
def test_mapping_classes_respect_word_problem(twists, w):
    S = SurfacePresentation.closed(2)
    a = Automorphism.identity(S)
    for curve, idx, p in twists:
        a = Automorphism.dehn_twist(2, curve, idx, p).compose(a)
    img = a.apply(S.relator)
    assert S.word_equal(img, FreeWord())
    assert S.word_equal(a.apply_inverse(a.apply(w)), W(w))
