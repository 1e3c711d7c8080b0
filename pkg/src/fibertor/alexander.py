"""Fox calculus for mapping tori and Alexander matrices.

The mapping torus of ``psi`` has the presentation with generators
``t, x_1, ..., x_r`` and relations ``t x_i t^-1 psi(x_i)^-1`` (plus the
surface relator for a closed fiber).  Fox derivatives are pushed to the
group ring of the free part of ``H_1(T_psi)``: the stable letter becomes
``u`` and the fiber generators are written in a fixed basis of the free
part of ``H_1(S) / image(psi_* - I)``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import mpmath

from .errors import DomainError, UnsupportedScaleError
from .group import Automorphism, FreeWord, SurfacePresentation
from .intpoly import IntPoly, cyclotomic_poly, poly_gcd
from .linalg import IntMatrix, berkowitz, cokernel, hermite_rows, smith_normal_form

Exponent = tuple[int, ...]


def _var_names(n: int) -> tuple[str, ...]:
    if n <= 4:
        return ("u", "x", "y", "z")[:n]
    return ("u",) + tuple(f"x{i}" for i in range(1, n))


@dataclass(frozen=True)
class LaurentPoly:
    """Laurent polynomial over Z in ``nvars`` variables.

    ``terms`` holds ``(exponent vector, coefficient)`` pairs with nonzero
    coefficients, sorted by exponent.
    """

    nvars: int
    terms: tuple[tuple[Exponent, int], ...] = ()

    def __post_init__(self):
        acc: dict[Exponent, int] = {}
        for e, c in self.terms:
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars:
                raise DomainError(f"exponent {e} has the wrong length for {self.nvars} variables")
            acc[e] = acc.get(e, 0) + int(c)
        object.__setattr__(self, "terms", tuple(sorted((e, c) for e, c in acc.items() if c)))

    @classmethod
    def from_dict(cls, nvars: int, d: Mapping[Exponent, int]) -> LaurentPoly:
        return cls(nvars, tuple(d.items()))

    @classmethod
    def constant(cls, nvars: int, c: int) -> LaurentPoly:
        return cls(nvars, (((0,) * nvars, c),))

    @classmethod
    def monomial(cls, exps: Sequence[int], c: int = 1) -> LaurentPoly:
        return cls(len(exps), ((tuple(exps), c),))

    def as_dict(self) -> dict[Exponent, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        return LaurentPoly(self.nvars, self.terms + other.terms)

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        return self + (-other)

    def __mul__(self, other) -> LaurentPoly:
        if isinstance(other, int):
            return LaurentPoly(self.nvars, tuple((e, c * other) for e, c in self.terms))
        acc: dict[Exponent, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0) + c1 * c2
        return LaurentPoly.from_dict(self.nvars, acc)

    __rmul__ = __mul__

    def shift(self, exps: Sequence[int]) -> LaurentPoly:
        """Multiply by the monomial with exponent ``exps``."""
        return LaurentPoly(self.nvars, tuple((tuple(a + b for a, b in zip(e, exps)), c)
                                             for e, c in self.terms))

    def evaluate(self, values: Sequence) -> object:
        """Substitute a value for every variable."""
        total = 0
        for e, c in self.terms:
            term = c
            for v, k in zip(values, e):
                term = term * (v ** k)
            total = total + term
        return total

    def normalized(self) -> LaurentPoly:
        """Unit normal form: the lexicographically least exponent becomes the
        zero vector and the lexicographically greatest coefficient is positive."""
        if not self.terms:
            return self
        low = self.terms[0][0]
        sign = 1 if self.terms[-1][1] > 0 else -1
        return LaurentPoly(self.nvars, tuple((tuple(a - b for a, b in zip(e, low)), sign * c)
                                             for e, c in self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = _var_names(self.nvars)
        parts = []
        for e, c in reversed(self.terms):
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            mag = abs(c)
            body = mono if (mono and mag == 1) else (f"{mag}*{mono}" if mono else str(mag))
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, b in parts[1:]:
            out += f" {s} {b}"
        return out

    def __repr__(self) -> str:
        return f"LaurentPoly({self.nvars}, '{self}')"


# ---------------------------------------------------------------------------
# gcd in at most two variables


def _to_univariate(p: LaurentPoly) -> IntPoly:
    low = min(e[0] for e, _ in p.terms)
    coeffs = [0] * (max(e[0] for e, _ in p.terms) - low + 1)
    for e, c in p.terms:
        coeffs[e[0] - low] = c
    return IntPoly(tuple(coeffs))


def _to_bivariate(p: LaurentPoly) -> list[IntPoly]:
    """Polynomial in the second variable with coefficients in Z[first]."""
    lows = [min(e[i] for e, _ in p.terms) for i in range(2)]
    by_x: dict[int, dict[int, int]] = {}
    for e, c in p.terms:
        by_x.setdefault(e[1] - lows[1], {})[e[0] - lows[0]] = c
    top = max(by_x)
    out = []
    for k in range(top + 1):
        row = by_x.get(k, {})
        out.append(IntPoly(tuple(row.get(i, 0) for i in range(max(row, default=-1) + 1))))
    return out


def _trim(P: list[IntPoly]) -> list[IntPoly]:
    P = list(P)
    while P and P[-1].is_zero():
        P.pop()
    return P


def _content(P: list[IntPoly]) -> IntPoly:
    g = IntPoly(())
    for c in P:
        g = poly_gcd(g, c)
    return g


def _prem(A: list[IntPoly], B: list[IntPoly]) -> list[IntPoly]:
    r = list(A)
    db, lb = len(B) - 1, B[-1]
    d = len(r) - 1 - db
    if d < 0:
        return r
    for k in range(d, -1, -1):
        c = r[k + db]
        r = [lb * x for x in r]
        if not c.is_zero():
            for i, b in enumerate(B):
                r[k + i] = r[k + i] - c * b
        r = r[:k + db]
    return _trim(r)


def _pp(P: list[IntPoly]) -> list[IntPoly]:
    g = _content(P)
    Q = [c.exact_div(g) for c in P]
    if Q and Q[-1].lead < 0:
        Q = [-c for c in Q]
    return Q


def _gcd2(A: list[IntPoly], B: list[IntPoly]) -> list[IntPoly]:
    A, B = _trim(A), _trim(B)
    if not A:
        return B
    if not B:
        return A
    g = poly_gcd(_content(A), _content(B))
    a, b = _pp(A), _pp(B)
    if len(a) < len(b):
        a, b = b, a
    while b and len(b) > 1:
        r = _prem(a, b)
        a, b = b, (_pp(r) if r else r)
    res = a if not b else [IntPoly((1,))]
    return [g * c for c in _pp(res)]


def laurent_gcd(polys: Iterable[LaurentPoly]) -> LaurentPoly:
    """gcd up to units of Laurent polynomials in one or two variables."""
    polys = [p for p in polys if not p.is_zero()]
    if not polys:
        raise DomainError("gcd of zero polynomials")
    n = polys[0].nvars
    if n > 2:
        raise UnsupportedScaleError(f"Laurent gcd supports at most 2 variables, got {n}")
    if n == 1:
        g = IntPoly(())
        for p in polys:
            g = poly_gcd(g, _to_univariate(p))
        return LaurentPoly(1, tuple(((i,), c) for i, c in enumerate(g.coeffs))).normalized()
    G: list[IntPoly] = []
    for p in polys:
        G = _gcd2(G, _to_bivariate(p))
    terms = [((i, k), c) for k, poly in enumerate(G) for i, c in enumerate(poly.coeffs)]
    return LaurentPoly(2, tuple(terms)).normalized()


# ---------------------------------------------------------------------------
# presentations and Fox calculus


@dataclass(frozen=True)
class TorusPresentation:
    """Presentation of the mapping torus group.

    Generator ``fiber.rank`` in ``relations`` is the stable letter ``t``.
    ``h1_betti`` and ``h1_torsion`` describe ``Z + coker(psi_* - I)``.
    """

    fiber: SurfacePresentation
    monodromy: Automorphism
    relations: tuple[FreeWord, ...]
    h1_betti: int
    h1_torsion: tuple[int, ...]

    @property
    def t_index(self) -> int:
        return self.fiber.rank


def torus_presentation(a: Automorphism) -> TorusPresentation:
    """Relations ``t x_i t^-1 psi(x_i)^-1`` (then the fiber relator).

    >>> F2 = SurfacePresentation.free(2)
    >>> torus_presentation(Automorphism.identity(F2)).h1_betti
    3
    """
    r = a.rank
    t = FreeWord.generator(r)
    rels = [t * FreeWord.generator(i) * t.inverse() * img.inverse() for i, img in enumerate(a.images)]
    if a.domain.is_closed:
        rels.append(a.domain.relator)
    A = a.abelianization_matrix()
    co = cokernel(A - IntMatrix.identity(r))
    return TorusPresentation(a.domain, a, tuple(rels), 1 + co.betti, co.torsion_factors)


def free_fiber_projection(a: Automorphism) -> IntMatrix:
    """Rows give the coordinates of ``H_1(S)`` in a basis of the free part of
    ``coker(psi_* - I)`` (Hermite normalized)."""
    r = a.rank
    snf = smith_normal_form(a.abelianization_matrix() - IntMatrix.identity(r))
    rows = [snf.U.row(i) for i in range(snf.rank, r)]
    if not rows:
        return IntMatrix(0, r, ())
    return IntMatrix.from_rows(hermite_rows(rows))


def fox_derivative(w: FreeWord, g: int, image: Sequence[Exponent]) -> LaurentPoly:
    """Fox derivative ``d w / d x_g`` pushed through the abelian map that
    sends generator ``j`` to the monomial with exponent ``image[j]``."""
    n = len(image[0])
    acc: dict[Exponent, int] = {}
    pos = [0] * n
    for h, s in w.letters:
        if s < 0:
            pos = [p - q for p, q in zip(pos, image[h])]
        if h == g:
            e = tuple(pos)
            acc[e] = acc.get(e, 0) + s
        if s > 0:
            pos = [p + q for p, q in zip(pos, image[h])]
    return LaurentPoly.from_dict(n, acc)


@dataclass(frozen=True)
class AlexanderMatrix:
    """Fox matrix of a mapping torus presentation over ``Z[H]``, ``H`` the free
    part of ``H_1(T_psi)``.

    Columns are ``t`` then the fiber generators; rows follow the relations.
    Variable 0 is ``u`` (the image of ``t``); the others are the coordinates
    given by ``projection``.  ``jacobian[i][j]`` is the pushed-forward Fox
    derivative of ``psi(x_i)`` with respect to ``x_j``.
    """

    entries: tuple[tuple[LaurentPoly, ...], ...]
    jacobian: tuple[tuple[LaurentPoly, ...], ...]
    projection: IntMatrix
    fiber_rank: int
    closed: bool
    h1_betti: int

    @property
    def nvars(self) -> int:
        return 1 + self.projection.rows

    @property
    def variable_names(self) -> tuple[str, ...]:
        return _var_names(self.nvars)

    def generator_monomial(self, j: int) -> Exponent:
        """Exponent of the image of fiber generator ``j``."""
        return (0,) + self.projection.col(j)


def fox_alexander_matrix(p: TorusPresentation) -> AlexanderMatrix:
    """(relations x generators) matrix of projected Fox derivatives.

    >>> F1 = SurfacePresentation.free(1)
    >>> m = fox_alexander_matrix(torus_presentation(Automorphism.identity(F1)))
    >>> [str(e) for e in m.entries[0]]
    ['-x + 1', 'u - 1']
    """
    a = p.monodromy
    r = p.fiber.rank
    P = free_fiber_projection(a)
    k = P.rows
    image = [(0,) + P.col(j) for j in range(r)] + [(1,) + (0,) * k]
    rows = []
    for rel in p.relations:
        rows.append((fox_derivative(rel, r, image),)
                    + tuple(fox_derivative(rel, j, image) for j in range(r)))
    jac = tuple(tuple(fox_derivative(img, j, image) for j in range(r)) for img in a.images)
    return AlexanderMatrix(tuple(rows), jac, P, r, p.fiber.is_closed, p.h1_betti)


def _laplace_det(M: Sequence[Sequence[LaurentPoly]], nvars: int) -> LaurentPoly:
    n = len(M)
    if n == 0:
        return LaurentPoly.constant(nvars, 1)
    if n == 1:
        return M[0][0]
    total = LaurentPoly(nvars)
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _laplace_det(minor, nvars)
        total = total + term if j % 2 == 0 else total - term
    return total


def maximal_minors(m: AlexanderMatrix) -> list[LaurentPoly]:
    """All minors of size (number of generators - 1)."""
    n = len(m.entries[0])
    size = n - 1
    rows = range(len(m.entries))
    out = []
    for rsel in itertools.combinations(rows, size):
        for cdel in range(n):
            sub = [[m.entries[i][j] for j in range(n) if j != cdel] for i in rsel]
            out.append(_laplace_det(sub, m.nvars))
    return out


def alexander_polynomial(m: AlexanderMatrix) -> LaurentPoly:
    """gcd of the maximal minors, in unit normal form (at most 2 variables)."""
    if m.nvars > 2:
        raise UnsupportedScaleError(
            f"the Alexander polynomial gcd is limited to 2 variables; this torus has {m.nvars} "
            "(character evaluation still applies)")
    minors = [x for x in maximal_minors(m) if not x.is_zero()]
    if not minors:
        return LaurentPoly(m.nvars)
    return laurent_gcd(minors)


# ---------------------------------------------------------------------------
# characters


class CycloInt:
    """Element of ``Z[z] / Phi_M(z)``, i.e. of ``Z[zeta_M]``."""

    __slots__ = ("M", "poly")

    def __init__(self, M: int, poly: IntPoly):
        self.M = M
        self.poly = _rem_monic(poly, cyclotomic_poly(M))

    @classmethod
    def root(cls, M: int, k: int, sign: int = 1) -> CycloInt:
        return cls(M, IntPoly.monomial(k % M, sign))

    def __add__(self, other):
        return CycloInt(self.M, self.poly + other.poly)

    def __sub__(self, other):
        return CycloInt(self.M, self.poly - other.poly)

    def __neg__(self):
        return CycloInt(self.M, -self.poly)

    def __mul__(self, other):
        return CycloInt(self.M, self.poly * other.poly)

    def __eq__(self, other):
        return isinstance(other, CycloInt) and self.M == other.M and self.poly == other.poly

    def __hash__(self):
        return hash((self.M, self.poly))

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def to_complex(self) -> tuple[complex, float]:
        """Value at ``exp(2 pi i / M)`` and a bound on the rounding error."""
        with mpmath.workprec(128):
            z = mpmath.expjpi(mpmath.mpf(2) / self.M)
            v = mpmath.mpc(0)
            for c in reversed(self.poly.coeffs):
                v = v * z + c
            val = complex(v)
        l1 = sum(abs(c) for c in self.poly.coeffs)
        return val, abs(val) * 2.0 ** -52 + l1 * 2.0 ** -100


def _rem_monic(p: IntPoly, m: IntPoly) -> IntPoly:
    r = list(p.coeffs)
    n = m.degree
    for k in range(len(r) - 1, n - 1, -1):
        c = r[k]
        if c:
            for i, b in enumerate(m.coeffs):
                r[k - n + i] -= c * b
    return IntPoly(tuple(r[:n]))


@dataclass(frozen=True)
class Character:
    """Assignment of ``exp(2 pi i num / mod)`` to each free fiber coordinate of
    ``H_1(T_psi)``; the stable letter stays formal."""

    values: tuple[tuple[int, int], ...]

    def __post_init__(self):
        vals = tuple((int(n), int(m)) for n, m in self.values)
        for n, m in vals:
            if m <= 0:
                raise DomainError(f"character modulus must be positive, got {m}")
            if not 0 <= n < m:
                raise DomainError(f"character numerator {n} outside [0, {m})")
        object.__setattr__(self, "values", vals)

    @property
    def order(self) -> int:
        return math.lcm(1, *(m // math.gcd(n, m) for n, m in self.values))

    def is_trivial(self) -> bool:
        return all(n == 0 for n, _ in self.values)


def character_group(m: AlexanderMatrix, N: int) -> list[Character]:
    """All characters of ``(Z/N)^k`` on the free fiber coordinates."""
    k = m.projection.rows
    return [Character(tuple((x, N) for x in v)) for v in itertools.product(range(N), repeat=k)]


@dataclass(frozen=True)
class ComplexPoly:
    """Polynomial with complex coefficients (constant term first) and a bound
    on the absolute error of every coefficient."""

    coeffs: tuple[complex, ...]
    error_bound: float

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __mul__(self, other: ComplexPoly) -> ComplexPoly:
        out = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        n1 = sum(abs(c) for c in self.coeffs)
        n2 = sum(abs(c) for c in other.coeffs)
        err = self.error_bound * (n2 + other.error_bound * len(other.coeffs)) * len(other.coeffs) \
            + other.error_bound * n1 * len(self.coeffs)
        return ComplexPoly(tuple(out), err + (n1 * n2) * 2.0 ** -50)


def _synthetic_div(coeffs_high: list, root) -> list:
    """Divide by ``(u - root)``; coefficients highest first; remainder must vanish."""
    out = [coeffs_high[0]]
    for c in coeffs_high[1:]:
        out.append(c + root * out[-1])
    if not out[-1].is_zero():
        raise ArithmeticError("expected factor (u - root) does not divide")
    return out[:-1]


def _character_exponents(m: AlexanderMatrix, chi: Character) -> tuple[int, list[int]]:
    k = m.projection.rows
    if len(chi.values) != k:
        raise DomainError(f"character needs {k} values, got {len(chi.values)}")
    M = math.lcm(1, *(mod for _, mod in chi.values))
    return M, [n * (M // mod) for n, mod in chi.values]


def _eval_laurent(p: LaurentPoly, M: int, a: Sequence[int]) -> CycloInt:
    coeffs = [0] * M
    for e, c in p.terms:
        if e[0]:
            raise DomainError("entry depends on the stable letter")
        coeffs[sum(x * y for x, y in zip(e[1:], a)) % M] += c
    return CycloInt(M, IntPoly(tuple(coeffs)))


def evaluate_character_exact(m: AlexanderMatrix, chi: Character) -> list[CycloInt]:
    """Exact coefficients (constant first) of the character prediction."""
    M, a = _character_exponents(m, chi)
    r = m.fiber_rank
    J = [[_eval_laurent(m.jacobian[i][j], M, a) for j in range(r)] for i in range(r)]
    zero, one = CycloInt(M, IntPoly(())), CycloInt(M, IntPoly((1,)))
    coeffs = berkowitz(J, zero, one)
    if not chi.is_trivial():
        coeffs = _synthetic_div(coeffs, one)
        if m.closed:
            rel_row = m.entries[-1]
            v = [_eval_laurent(rel_row[1 + j], M, a) for j in range(r)]
            vJ = [sum((v[i] * J[i][j] for i in range(r)), zero) for j in range(r)]
            c2 = None
            for k in range(M):
                for sgn in (1, -1):
                    cand = CycloInt.root(M, k, sgn)
                    if all(x == cand * y for x, y in zip(vJ, v)):
                        c2 = cand
                        break
                if c2 is not None:
                    break
            if c2 is None:
                raise ArithmeticError("relator row is not an eigenvector of the monodromy")
            coeffs = _synthetic_div(coeffs, c2)
    elif m.h1_betti >= 2:
        coeffs = _synthetic_div(coeffs, one)
    return list(reversed(coeffs))


def evaluate_character(m: AlexanderMatrix, chi: Character) -> ComplexPoly:
    """Characteristic polynomial in ``u`` predicted for a lift on the
    ``chi``-eigenspace of ``H_1`` of the corresponding abelian cover.

    The fiber block ``uI - J(chi)`` of the Fox matrix gives ``det(uI - J(chi))``.
    For nontrivial ``chi`` the factor ``u - 1`` (and, for a closed fiber,
    the factor contributed by the relator cell) is removed, which leaves
    the eigenspace characteristic polynomial.  For the trivial character a
    single ``u - 1`` is removed when ``b_1(T_psi) >= 2``, so the result is
    the Alexander polynomial specialized at ``chi`` and

        char_poly(lift) = (u - 1)^[b_1 >= 2] * prod_chi evaluate_character(chi)

    over the characters of the deck group of a coinvariant cover with free
    coinvariants.  Computed exactly in ``Z[zeta_M]``, then embedded in C.
    """
    exact = evaluate_character_exact(m, chi)
    vals, err = [], 0.0
    for c in exact:
        v, e = c.to_complex()
        vals.append(v)
        err = max(err, e)
    return ComplexPoly(tuple(vals), max(err, 2.0 ** -100))


def _eval_job(args):
    m, chi = args
    return evaluate_character(m, chi)


def evaluate_characters(m: AlexanderMatrix, chis: Sequence[Character],
                        workers: int | None = None) -> list[ComplexPoly]:
    """Evaluate many characters, optionally in a process pool; order is kept."""
    if workers is None or workers <= 1 or len(chis) < 2:
        return [evaluate_character(m, c) for c in chis]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_eval_job, [(m, c) for c in chis]))


def character_product(polys: Iterable[ComplexPoly]) -> ComplexPoly:
    out = ComplexPoly((1 + 0j,), 0.0)
    for p in polys:
        out = out * p
    return out


def fox_identity_residual(m: AlexanderMatrix, row: int) -> LaurentPoly:
    """``sum_j (d r / d g_j)(g_j - 1)``, which vanishes for every relation."""
    n = m.nvars
    one = LaurentPoly.constant(n, 1)
    t_mono = LaurentPoly.monomial((1,) + (0,) * (n - 1))
    total = m.entries[row][0] * (t_mono - one)
    for j in range(m.fiber_rank):
        total = total + m.entries[row][1 + j] * (LaurentPoly.monomial(m.generator_monomial(j)) - one)
    return total
