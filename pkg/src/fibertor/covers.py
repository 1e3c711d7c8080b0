"""Finite covers of free and surface groups.

A cover is described by a transitive action of the group on cosets
``0..d-1`` (coset 0 is the basepoint).  The subgroup of the cover is
presented by Reidemeister-Schreier: a breadth-first spanning tree of the
coset graph (generators visited in index order, ``x_j`` before
``x_j^{-1}``) gives a transversal, and every non-tree edge ``(c, j)`` gives
the Schreier generator ``u_c x_j u_{c.x_j}^{-1}``.  Their classes form a
basis of ``H_1`` of the cover when the base is free; for a closed base the
``d`` lifts of the relator are quotiented out.
"""
from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DisconnectedCoverError, DomainError, InvalidQuotientError, NotInvariantError,
    UnsupportedScaleError,
)
from .group import Automorphism, FreeWord, SurfacePresentation
from .linalg import IntMatrix, cokernel, determinant, smith_normal_form

ABELIAN = "abelian"
PERMUTATION = "permutation"

PERMUTATION_DEGREE_CAP = 4096
ABELIAN_DEGREE_CAP = 10 ** 6
MAX_DEGREE_ENV = "FIBERTOR_MAX_DEGREE"


def degree_cap(kind: str) -> int:
    """Largest cover degree that will be built; the environment variable
    ``FIBERTOR_MAX_DEGREE`` overrides both defaults."""
    env = os.environ.get(MAX_DEGREE_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"{MAX_DEGREE_ENV} must be an integer, got {env!r}") from None
    return PERMUTATION_DEGREE_CAP if kind == PERMUTATION else ABELIAN_DEGREE_CAP


def check_degree(kind: str, degree: int) -> None:
    cap = degree_cap(kind)
    if degree > cap:
        raise UnsupportedScaleError(
            f"{kind} cover of degree {degree} exceeds the cap {cap} "
            f"(set {MAX_DEGREE_ENV} to raise it)")


@dataclass(frozen=True)
class AbelianQuotient:
    """Homomorphism onto a subgroup of ``Z/m_1 x ... x Z/m_k``: generator ``j``
    maps to column ``j`` of ``projection`` reduced modulo ``moduli``."""

    projection: IntMatrix
    moduli: tuple[int, ...]

    def __post_init__(self):
        moduli = tuple(int(m) for m in self.moduli)
        object.__setattr__(self, "moduli", moduli)
        if self.projection.rows != len(moduli):
            raise DomainError("projection needs one row per modulus")
        if any(m < 1 for m in moduli):
            raise DomainError("moduli must be positive")

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(x % m for x, m in zip(v, self.moduli))

    def image(self, w: FreeWord) -> tuple[int, ...]:
        e = w.exponent_sums(self.projection.cols)
        return self.reduce(self.projection.apply(e))

    def image_order(self) -> int:
        """Order of the image subgroup."""
        gens = IntMatrix.from_rows(
            [list(self.projection.row(i)) + [self.moduli[i] if k == i else 0
                                             for k in range(len(self.moduli))]
             for i in range(len(self.moduli))])
        return math.prod(self.moduli) // cokernel(gens).torsion_order


@dataclass(frozen=True)
class CoverSpec:
    """Finite cover of ``base``: either an abelian quotient or a permutation
    action (``permutations[j][c]`` is the coset ``c . x_j``)."""

    base: SurfacePresentation
    kind: str
    degree: int
    quotient: AbelianQuotient | None = None
    permutations: tuple[tuple[int, ...], ...] | None = None
    modulus: int | None = None
    coinvariant: bool = False

    def __post_init__(self):
        if self.kind == ABELIAN:
            q = self.quotient
            if q is None or self.permutations is not None:
                raise DomainError("abelian covers need a quotient and no permutations")
            if q.projection.cols != self.base.rank:
                raise DomainError("quotient projection must have one column per generator")
            if self.base.is_closed and any(q.image(self.base.relator)):
                raise InvalidQuotientError("the relator does not map to zero in the quotient")
            if self.degree != q.image_order():
                raise DomainError("degree does not match the order of the abelian image")
        elif self.kind == PERMUTATION:
            perms = self.permutations
            if perms is None or self.quotient is not None:
                raise DomainError("permutation covers need permutations and no quotient")
            perms = tuple(tuple(int(x) for x in p) for p in perms)
            object.__setattr__(self, "permutations", perms)
            d = self.degree
            if len(perms) != self.base.rank:
                raise DomainError("one permutation per generator is required")
            for p in perms:
                if sorted(p) != list(range(d)):
                    raise DomainError(f"{p} is not a permutation of 0..{d - 1}")
            if len(_orbit(perms, 0)) != d:
                raise DisconnectedCoverError("permutation images are not transitive")
            if self.base.is_closed:
                for c in range(d):
                    if _trace_perm(perms, self.base.relator, c) != c:
                        raise InvalidQuotientError("the relator does not act trivially")
        else:
            raise DomainError(f"unknown cover kind {self.kind!r}")

    @classmethod
    def from_quotient(cls, base: SurfacePresentation, projection: IntMatrix,
                      moduli: Sequence[int], modulus: int | None = None,
                      coinvariant: bool = False) -> CoverSpec:
        q = AbelianQuotient(projection, tuple(moduli))
        return cls(base, ABELIAN, q.image_order(), quotient=q, modulus=modulus,
                   coinvariant=coinvariant)

    @classmethod
    def abelian(cls, base: SurfacePresentation, N: int) -> CoverSpec:
        """Mod-``N`` homology cover (``N = 1`` gives the trivial cover)."""
        if N < 1:
            raise DomainError("modulus must be positive")
        return cls.from_quotient(base, IntMatrix.identity(base.rank), (N,) * base.rank, modulus=N)

    @classmethod
    def trivial(cls, base: SurfacePresentation) -> CoverSpec:
        return cls.from_quotient(base, IntMatrix.zeros(1, base.rank), (1,))

    @classmethod
    def permutation(cls, base: SurfacePresentation, permutations: Sequence[Sequence[int]]) -> CoverSpec:
        perms = tuple(tuple(p) for p in permutations)
        if not perms:
            raise DomainError("no permutations given")
        return cls(base, PERMUTATION, len(perms[0]), permutations=perms)


def _orbit(perms, start):
    seen = {start}
    queue = deque([start])
    inv = [_invert(p) for p in perms]
    while queue:
        c = queue.popleft()
        for p in list(perms) + inv:
            if p[c] not in seen:
                seen.add(p[c])
                queue.append(p[c])
    return seen


def _invert(p):
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def _trace_perm(perms, w: FreeWord, c: int) -> int:
    for g, s in w.letters:
        c = perms[g][c] if s > 0 else perms[g].index(c)
    return c


def coinvariant_cover_spec(a: Automorphism, N: int) -> CoverSpec:
    """Cover from ``H_1(S) -> (H_1(S) / image(psi_* - I)) (x) Z/N``.

    Its kernel contains the commutator subgroup and is preserved by ``a``,
    so ``a`` lifts.
    """
    if N < 2:
        raise DomainError(f"coinvariant covers need N >= 2, got {N}")
    A = a.abelianization_matrix()
    r = A.rows
    M = IntMatrix.from_rows([list((A - IntMatrix.identity(r)).row(i)) + [N if k == i else 0 for k in range(r)]
                             for i in range(r)])
    snf = smith_normal_form(M)
    rows, moduli = [], []
    for i, d in enumerate(snf.invariant_factors):
        if d > 1:
            rows.append(snf.U.row(i))
            moduli.append(d)
    if not rows:
        spec = CoverSpec.trivial(a.domain)
        return CoverSpec(spec.base, ABELIAN, 1, quotient=spec.quotient, modulus=N, coinvariant=True)
    return CoverSpec.from_quotient(a.domain, IntMatrix.from_rows(rows), moduli,
                                   modulus=N, coinvariant=True)


@dataclass(frozen=True)
class CoverData:
    """Coset table and Reidemeister-Schreier data of a built cover.

    ``coset_table[c][j]`` is ``c . x_j``.  ``edge_generator[c][j]`` is the
    index of the Schreier generator of edge ``(c, j)``, or -1 for tree
    edges.  For a closed base, ``h1_projection`` (rows) and ``h1_section``
    (columns) convert between Schreier coordinates and a basis of
    ``H_1`` of the cover.
    """

    spec: CoverSpec
    coset_table: tuple[tuple[int, ...], ...]
    transversal: tuple[FreeWord, ...]
    schreier_edges: tuple[tuple[int, int], ...]
    schreier_generators: tuple[FreeWord, ...]
    edge_generator: tuple[tuple[int, ...], ...]
    h1_rank: int
    relation_matrix: IntMatrix | None = None
    h1_projection: IntMatrix | None = None
    h1_section: IntMatrix | None = None

    @property
    def degree(self) -> int:
        return len(self.coset_table)

    @property
    def base(self) -> SurfacePresentation:
        return self.spec.base

    def act(self, c: int, g: int, s: int) -> int:
        """Coset ``c . x_g^s``."""
        if s > 0:
            return self.coset_table[c][g]
        return self._inverse_table()[c][g]

    def _inverse_table(self):
        inv = self.__dict__.get("_inv")
        if inv is None:
            d, r = self.degree, self.base.rank
            rows = [[0] * r for _ in range(d)]
            for c in range(d):
                for g in range(r):
                    rows[self.coset_table[c][g]][g] = c
            inv = tuple(tuple(x) for x in rows)
            object.__setattr__(self, "_inv", inv)
        return inv

    def trace(self, w: FreeWord, start: int = 0) -> int:
        c = start
        for g, s in w.letters:
            c = self.act(c, g, s)
        return c

    def rewrite(self, w: FreeWord, start: int = 0) -> tuple[list[int], int]:
        """Abelianized Reidemeister-Schreier rewrite of ``w`` read from coset
        ``start``: exponent vector over Schreier generators and the end coset."""
        vec = [0] * len(self.schreier_generators)
        table, inv, eg = self.coset_table, self._inverse_table(), self.edge_generator
        c = start
        for g, s in w.letters:
            if s > 0:
                k = eg[c][g]
                if k >= 0:
                    vec[k] += 1
                c = table[c][g]
            else:
                c = inv[c][g]
                k = eg[c][g]
                if k >= 0:
                    vec[k] -= 1
        return vec, c

    def rewrite_word(self, w: FreeWord, start: int = 0) -> list[tuple[int, int]]:
        """Rewrite as a word in Schreier generators ``(index, sign)``."""
        out: list[tuple[int, int]] = []
        inv, eg = self._inverse_table(), self.edge_generator
        c = start
        for g, s in w.letters:
            if s > 0:
                k = eg[c][g]
                c = self.coset_table[c][g]
            else:
                c = inv[c][g]
                k = eg[c][g]
            if k >= 0:
                if out and out[-1] == (k, -s):
                    out.pop()
                else:
                    out.append((k, s))
        return out

    def to_h1(self, raw: Sequence[int]) -> tuple[int, ...]:
        """Schreier coordinates to ``H_1`` coordinates."""
        if self.h1_projection is None:
            return tuple(raw)
        return self.h1_projection.apply(raw)

    def h1_class(self, w: FreeWord, start: int = 0) -> tuple[int, ...]:
        vec, end = self.rewrite(w, start)
        if end != start:
            raise DomainError(f"{w} does not lift to a loop at coset {start}")
        return self.to_h1(vec)

    def restrict(self, raw_matrix: IntMatrix) -> IntMatrix:
        """Induced map on ``H_1`` of a matrix in Schreier coordinates."""
        if self.h1_projection is None:
            return raw_matrix
        return self.h1_projection @ raw_matrix @ self.h1_section


def _abelian_cosets(spec: CoverSpec):
    q = spec.quotient
    r = spec.base.rank
    cols = [tuple(q.projection[i, j] for i in range(q.projection.rows)) for j in range(r)]
    zero = q.reduce([0] * q.projection.rows)
    index = {zero: 0}
    order = [zero]
    parent: list[tuple[int, int, int] | None] = [None]
    table: list[list[int]] = []
    i = 0
    while i < len(order):
        v = order[i]
        for j in range(r):
            for s in (1, -1):
                w = q.reduce([x + s * y for x, y in zip(v, cols[j])])
                if w not in index:
                    index[w] = len(order)
                    order.append(w)
                    parent.append((i, j, s))
        i += 1
    for v in order:
        table.append([index[q.reduce([x + y for x, y in zip(v, cols[j])])] for j in range(r)])
    return table, parent


def _permutation_cosets(spec: CoverSpec):
    perms = spec.permutations
    r, d = spec.base.rank, spec.degree
    inv = [_invert(p) for p in perms]
    table = [[perms[j][c] for j in range(r)] for c in range(d)]
    parent: list[tuple[int, int, int] | None] = [None] * d
    seen = [False] * d
    seen[0] = True
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for j in range(r):
            for s, p in ((1, perms[j]), (-1, inv[j])):
                n = p[c]
                if not seen[n]:
                    seen[n] = True
                    parent[n] = (c, j, s)
                    queue.append(n)
    return table, parent


def build_cover(spec: CoverSpec) -> CoverData:
    """Coset table, Schreier transversal and generators, and ``H_1`` rank.

    >>> build_cover(CoverSpec.abelian(SurfacePresentation.free(2), 2)).h1_rank
    5
    """
    check_degree(spec.kind, spec.degree)
    if spec.kind == ABELIAN:
        table, parent = _abelian_cosets(spec)
    else:
        table, parent = _permutation_cosets(spec)
    d, r = len(table), spec.base.rank
    transversal: list[FreeWord | None] = [None] * d
    transversal[0] = FreeWord()
    tree = set()
    # parents precede children in BFS order for abelian numbering; permutation
    # numbering is arbitrary, so resolve transversal words by following parents
    for c in range(d):
        chain = []
        x = c
        while transversal[x] is None:
            chain.append(x)
            x = parent[x][0]
        for y in reversed(chain):
            p, j, s = parent[y]
            transversal[y] = transversal[p] * FreeWord.generator(j, s)
    for c in range(1, d):
        p, j, s = parent[c]
        tree.add((p, j) if s > 0 else (c, j))
    edges, gens = [], []
    eg = [[-1] * r for _ in range(d)]
    for c in range(d):
        for j in range(r):
            if (c, j) not in tree:
                eg[c][j] = len(edges)
                edges.append((c, j))
                gens.append(transversal[c] * FreeWord.generator(j) * transversal[table[c][j]].inverse())
    data = CoverData(spec, tuple(tuple(row) for row in table), tuple(transversal), tuple(edges),
                     tuple(gens), tuple(tuple(row) for row in eg), len(gens))
    if not spec.base.is_closed:
        return data
    rel = spec.base.relator
    cols = []
    for c in range(d):
        vec, end = data.rewrite(rel, c)
        if end != c:
            raise InvalidQuotientError("the relator does not lift to closed loops")
        cols.append(vec)
    R = IntMatrix.from_columns(cols)
    snf = smith_normal_form(R)
    k = snf.rank
    if any(f != 1 for f in snf.invariant_factors):
        raise DomainError("relator lifts do not span a direct summand; not a surface cover")
    m = len(gens)
    P = IntMatrix.from_rows([snf.U.row(i) for i in range(k, m)])
    S = IntMatrix.from_columns([snf.U_inv.col(i) for i in range(k, m)])
    return CoverData(spec, data.coset_table, data.transversal, data.schreier_edges,
                     data.schreier_generators, data.edge_generator, m - k, R, P, S)


def intersection_form(cover: CoverData) -> IntMatrix:
    """Cup product pairing on ``H^1`` of a closed cover, in the basis dual to
    the ``H_1`` coordinates of ``cover``.

    For a 2-cell with boundary ``y_1 ... y_L`` the cup product of 1-cocycles
    is ``sum_{p<q} a(y_p) b(y_q) + sum_{y_p inverse} a(e_p) b(e_p)``.
    """
    if not cover.base.is_closed:
        raise DomainError("intersection form is defined for closed surfaces")
    n = cover.h1_rank
    P = cover.h1_projection
    eg = cover.edge_generator
    omega = [[0] * n for _ in range(n)]
    rel = cover.base.relator
    for c in range(cover.degree):
        prefix = [0] * n
        cur = c
        for g, s in rel.letters:
            if s > 0:
                e = (cur, g)
                cur = cover.coset_table[cur][g]
            else:
                cur = cover.act(cur, g, -1)
                e = (cur, g)
            k = eg[e[0]][e[1]]
            if k < 0:
                continue
            a = [P[i, k] for i in range(n)]
            val = [s * x for x in a]
            for i in range(n):
                if prefix[i]:
                    row = omega[i]
                    pi = prefix[i]
                    for j in range(n):
                        if val[j]:
                            row[j] += pi * val[j]
            if s < 0:
                for i in range(n):
                    if a[i]:
                        for j in range(n):
                            omega[i][j] += a[i] * a[j]
            for i in range(n):
                prefix[i] += val[i]
    return IntMatrix.from_rows(omega)


@dataclass(frozen=True)
class LiftedAction:
    """Matrix of a lift of an automorphism on ``H_1`` of a cover; the lift
    fixes the basepoint of coset ``basepoint_choice``."""

    cover: CoverData
    matrix: IntMatrix
    basepoint_choice: int = 0

    def __post_init__(self):
        if abs(determinant(self.matrix)) != 1:
            raise DomainError("lifted action is not unimodular")


def _raw_lift_matrix(a: Automorphism, cover: CoverData) -> IntMatrix:
    cols = []
    for i, s in enumerate(cover.schreier_generators):
        img = a.apply(s)
        vec, end = cover.rewrite(img, 0)
        if end != 0:
            raise NotInvariantError(
                f"the image of Schreier generator {s} leaves the subgroup; "
                "the automorphism does not lift to this cover")
        cols.append(vec)
    return IntMatrix.from_columns(cols)


def lift_automorphism(a: Automorphism, cover: CoverData) -> LiftedAction:
    """Lift fixing the basepoint coset, as a matrix in the ``H_1`` basis.

    >>> F2 = SurfacePresentation.free(2)
    >>> c = build_cover(CoverSpec.abelian(F2, 2))
    >>> lift_automorphism(Automorphism.identity(F2), c).matrix == IntMatrix.identity(5)
    True
    """
    if a.domain != cover.base:
        raise DomainError("automorphism and cover have different base groups")
    L = cover.restrict(_raw_lift_matrix(a, cover))
    if cover.base.is_closed:
        omega = intersection_form(cover)
        image = L @ omega @ L.transpose()
        if image != omega and image != -omega:
            raise DomainError("lifted action does not preserve the intersection form")
    return LiftedAction(cover, L, 0)


def is_galois(cover: CoverData) -> bool:
    """True when the subgroup is normal (every coset lifts Schreier loops to loops)."""
    if cover.spec.kind == ABELIAN:
        return True
    return all(cover.trace(s, c) == c for c in range(cover.degree) for s in cover.schreier_generators)


def deck_matrix(cover: CoverData, c: int) -> IntMatrix:
    """Deck transformation taking the basepoint lift to coset ``c``."""
    cols = []
    for s in cover.schreier_generators:
        vec, end = cover.rewrite(s, c)
        if end != c:
            raise DomainError("cover is not Galois")
        cols.append(vec)
    return cover.restrict(IntMatrix.from_columns(cols))


def deck_group_exponent(cover: CoverData) -> int:
    """Exponent of the deck group of a Galois cover."""
    if not is_galois(cover):
        raise DomainError("deck group exponent needs a Galois cover")
    if cover.spec.kind == ABELIAN:
        q = cover.spec.quotient
        e = 1
        for j in range(cover.base.rank):
            v = tuple(q.projection[i, j] for i in range(q.projection.rows))
            k, w = 1, q.reduce(v)
            while any(w):
                k += 1
                w = q.reduce([x + y for x, y in zip(w, v)])
            e = math.lcm(e, k)
        return e
    e = 1
    for u in cover.transversal:
        k, x = 1, cover.trace(u, 0)
        w = u
        while x != 0:
            w = w * u
            k += 1
            x = cover.trace(w, 0)
        e = math.lcm(e, k)
    return e


def enumerate_lifts(lifted: LiftedAction) -> tuple[IntMatrix, ...]:
    """All lifts ``g psi~ h`` over deck transformations ``g, h``, deduplicated
    and sorted by entries."""
    cover = lifted.cover
    if not is_galois(cover):
        raise DomainError("lift enumeration needs a Galois cover")
    decks = [deck_matrix(cover, c) for c in range(cover.degree)]
    left = {(g @ lifted.matrix) for g in decks}
    out = {x @ h for x in left for h in decks}
    return tuple(sorted(out, key=lambda m: m.entries))


@dataclass(frozen=True)
class TorusQuotient:
    """Homomorphism from the mapping torus group to ``Z/m_1 x ... x Z/m_k``
    given by images of the fiber generators and of the stable letter ``t``.

    When ``monodromy`` (the action on ``H_1`` of the fiber) is supplied the
    relations ``t x t^-1 = psi(x)`` are checked."""

    moduli: tuple[int, ...]
    fiber_images: tuple[tuple[int, ...], ...]
    t_image: tuple[int, ...]
    monodromy: IntMatrix | None = None

    def __post_init__(self):
        k = len(self.moduli)
        if any(int(m) < 1 for m in self.moduli):
            raise InvalidQuotientError("moduli must be positive")
        if len(self.t_image) != k or any(len(v) != k for v in self.fiber_images):
            raise InvalidQuotientError("every image needs one entry per modulus")
        object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))
        object.__setattr__(self, "fiber_images", tuple(tuple(int(x) for x in v) for v in self.fiber_images))
        object.__setattr__(self, "t_image", tuple(int(x) for x in self.t_image))


def fiber_component_count(q: TorusQuotient) -> int:
    """Number of components of the preimage of the fiber in the cover
    defined by ``q``: the index of the subgroup generated by fiber images.

    >>> fiber_component_count(TorusQuotient((2, 4), ((0, 1), (0, 2)), (1, 0)))
    2
    """
    k, r = len(q.moduli), len(q.fiber_images)
    diag = [[q.moduli[i] if j == i else 0 for j in range(k)] for i in range(k)]
    F = [[q.fiber_images[j][i] for j in range(r)] for i in range(k)]
    if q.monodromy is not None:
        A = q.monodromy
        if A.rows != r or A.cols != r:
            raise InvalidQuotientError("monodromy size does not match the fiber rank")
        FA = IntMatrix.from_rows(F) @ A if r else None
        for i in range(k):
            for j in range(r):
                if (FA[i, j] - F[i][j]) % q.moduli[i]:
                    raise InvalidQuotientError(
                        "fiber images are not compatible with the monodromy (phi o psi_* != phi)")
    full = IntMatrix.from_rows([F[i] + [q.t_image[i]] + diag[i] for i in range(k)])
    if cokernel(full).torsion_order != 1:
        raise InvalidQuotientError("the images do not generate the target group")
    return cokernel(IntMatrix.from_rows([F[i] + diag[i] for i in range(k)])).torsion_order


def torus_quotient_mod(a: Automorphism, N: int) -> TorusQuotient:
    """``H_1(T_psi) (x) Z/N`` with ``t -> (1, 0)`` and fiber generators mapped
    to their coinvariant classes."""
    spec = coinvariant_cover_spec(a, N)
    q = spec.quotient
    k = q.projection.rows
    fiber = tuple((0,) + q.reduce(q.projection.col(j)) for j in range(a.rank))
    return TorusQuotient((N,) + q.moduli, fiber, (1,) + (0,) * k, a.abelianization_matrix())
