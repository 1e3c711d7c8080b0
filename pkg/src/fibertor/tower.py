"""Homology of mapping tori and torsion growth along towers of covers.

For a monodromy ``A`` on ``H_1(S)`` the mapping torus has
``H_1 = Z + coker(A - I)``.  The cyclic cover of degree ``k`` is the mapping
torus of ``A^k``; the abelian tower at level ``N`` lifts the monodromy to
the coinvariant cover ``S_N`` and takes the mapping torus of the
``c``-th power of the lift, ``c`` the number of fiber components.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath

from .covers import (
    ABELIAN, LiftedAction, CoverSpec, build_cover, check_degree, coinvariant_cover_spec,
    fiber_component_count, lift_automorphism, torus_quotient_mod,
)
from .errors import DomainError, NotUniversalTowerError, UnsupportedScaleError
from .group import Automorphism, SurfacePresentation
from .intpoly import (
    DEFAULT_TOL, IntPoly, SpectralRadius, is_cyclotomic_product, mahler_measure, poly_gcd,
    root_enclosures, spectral_radius,
)
from .linalg import IntMatrix, char_poly, cokernel, determinant, matrix_power, restricted_det

LIMIT_METHOD = "mean of normalized_log_torsion over the last quartile of levels"
LOG2 = math.log(2)


def _require_unimodular(A: IntMatrix) -> None:
    if not A.is_square:
        raise DomainError(f"monodromy must be square, got {A.rows}x{A.cols}")
    if abs(determinant(A)) != 1:
        raise DomainError("monodromy is not unimodular, so it is not induced by a homeomorphism")


@dataclass(frozen=True)
class MappingTorus:
    """``H_1`` of the mapping torus: ``Z^h1_betti`` plus ``h1_torsion``."""

    monodromy_matrix: IntMatrix
    fiber: SurfacePresentation
    h1_betti: int
    h1_torsion: tuple[int, ...]

    @property
    def torsion_order(self) -> int:
        return math.prod(self.h1_torsion)


def mapping_torus_homology(A: IntMatrix, fiber: SurfacePresentation | None = None) -> MappingTorus:
    """``Z + coker(A - I)``.

    >>> mapping_torus_homology(IntMatrix.from_rows([[-1, 0], [0, -1]])).h1_torsion
    (2, 2)
    """
    _require_unimodular(A)
    fiber = fiber or SurfacePresentation.free(A.rows)
    if fiber.rank != A.rows:
        raise DomainError("fiber rank does not match the monodromy size")
    co = cokernel(A - IntMatrix.identity(A.rows))
    return MappingTorus(A, fiber, 1 + co.betti, co.torsion_factors)


@dataclass(frozen=True)
class TowerLevel:
    """One cover in a tower.  ``det_prime`` is ``|det'(B - I)|`` for the
    monodromy ``B`` of the level, kept as a cross-check on ``torsion_order``."""

    index: int
    degree: int
    betti: int
    torsion_order: int
    normalized_log_torsion: float
    fiber_components: int
    det_prime: int
    bound: float | None = None

    @property
    def det_prime_agrees(self) -> bool:
        return self.det_prime == self.torsion_order


@dataclass(frozen=True)
class TowerReport:
    kind: str
    levels: tuple[TowerLevel, ...]
    limit_estimate: float
    mahler_reference: float | None
    limit_method: str = LIMIT_METHOD
    notes: tuple[str, ...] = ()


def _limit(levels: Sequence[TowerLevel]) -> float:
    tail = levels[len(levels) - max(1, len(levels) // 4):]
    return sum(lv.normalized_log_torsion for lv in tail) / len(tail)


def _torus_level(B: IntMatrix, index: int, degree: int, components: int) -> TowerLevel:
    M = B - IntMatrix.identity(B.rows)
    co = cokernel(M)
    tor = co.torsion_order
    return TowerLevel(index, degree, 1 + co.betti, tor, math.log(tor) / degree, components,
                      abs(restricted_det(M)))


def _cyclic_job(args):
    A, k = args
    return _torus_level(matrix_power(A, k), k, k, k)


def _notes(levels: Sequence[TowerLevel]) -> tuple[str, ...]:
    bad = [lv.index for lv in levels if not lv.det_prime_agrees]
    if not bad:
        return ()
    shown = ", ".join(str(i) for i in bad[:10]) + (", ..." if len(bad) > 10 else "")
    return (f"torsion order differs from |det'(B - I)| at levels {shown}",)


def _ordered_map(fn: Callable, jobs: list, workers: int | None) -> list:
    if workers is None or workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def cyclic_tower(A: IntMatrix, k_max: int, fiber: SurfacePresentation | None = None,
                 workers: int | None = None, tol: float = DEFAULT_TOL) -> TowerReport:
    """Torsion of ``H_1`` of the mapping tori of ``A^k`` for ``k = 1..k_max``.

    >>> A = IntMatrix.from_rows([[2, 1], [1, 1]])
    >>> [lv.torsion_order for lv in cyclic_tower(A, 4).levels]
    [1, 5, 16, 45]
    """
    _require_unimodular(A)
    if k_max < 1:
        raise DomainError(f"k_max must be at least 1, got {k_max}")
    fiber = fiber or SurfacePresentation.free(A.rows)
    if workers and workers > 1:
        levels = _ordered_map(_cyclic_job, [(A, k) for k in range(1, k_max + 1)], workers)
    else:
        levels, B = [], IntMatrix.identity(A.rows)
        for k in range(1, k_max + 1):
            B = B @ A
            levels.append(_torus_level(B, k, k, k))
    if classify_monodromy(A).is_cyclotomic:
        levels = [_with_bound(lv, fiber) for lv in levels]
    mref = math.log(mahler_measure(char_poly(A), tol).value)
    return TowerReport("cyclic", tuple(levels), _limit(levels), mref, notes=_notes(levels))


def _with_bound(lv: TowerLevel, fiber: SurfacePresentation) -> TowerLevel:
    return TowerLevel(lv.index, lv.degree, lv.betti, lv.torsion_order, lv.normalized_log_torsion,
                      lv.fiber_components, lv.det_prime, cyclotomic_upper_bound(lv, fiber))


def check_universal_moduli(N_list: Sequence[int]) -> tuple[int, ...]:
    Ns = tuple(int(n) for n in N_list)
    if not Ns:
        raise NotUniversalTowerError("empty list of moduli")
    if Ns[0] < 2:
        raise NotUniversalTowerError("moduli must be at least 2")
    for a, b in zip(Ns, Ns[1:]):
        if b <= a or b % a:
            raise NotUniversalTowerError(f"moduli must increase with each dividing the next; {a} then {b}")
    return Ns


def _abelian_job(args):
    a, N = args
    spec = coinvariant_cover_spec(a, N)
    cover = build_cover(spec)
    L = lift_automorphism(a, cover).matrix
    c = fiber_component_count(torus_quotient_mod(a, N))
    lv = _torus_level(matrix_power(L, c), N, c * spec.degree, c)
    if classify_monodromy(L).is_cyclotomic:
        lv = _with_bound(lv, a.domain)
    return lv


def homology_cover_tower(a: Automorphism, N_list: Sequence[int],
                         workers: int | None = None) -> TowerReport:
    """Tower of ``psi``-coinvariant homology covers, one level per modulus."""
    Ns = check_universal_moduli(N_list)
    for N in Ns:
        check_degree(ABELIAN, coinvariant_cover_spec(a, N).degree)
    levels = _ordered_map(_abelian_job, [(a, N) for N in Ns], workers)
    return TowerReport("abelian", tuple(levels), _limit(levels), None, notes=_notes(levels))


@dataclass(frozen=True)
class Cyclotomic:
    is_cyclotomic = True
    label = "cyclotomic"


@dataclass(frozen=True)
class NonCyclotomic:
    """Carries the certified spectral radius of the monodromy as witness."""

    witness: SpectralRadius
    is_cyclotomic = False
    label = "noncyclotomic"


def classify_monodromy(A: IntMatrix, tol: float = DEFAULT_TOL) -> Cyclotomic | NonCyclotomic:
    """Exact Kronecker test on the characteristic polynomial.

    >>> classify_monodromy(IntMatrix.from_rows([[1, 2], [0, 1]])).label
    'cyclotomic'
    """
    _require_unimodular(A)
    p = char_poly(A)
    if is_cyclotomic_product(p):
        return Cyclotomic()
    return NonCyclotomic(spectral_radius(p, tol))


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a lift search; ``attempts`` lists ``(modulus, outcome)``
    with modulus 1 standing for the trivial cover."""

    found: bool
    lift: LiftedAction | None
    witness: SpectralRadius | None
    modulus: int | None
    attempts: tuple[tuple[int, str], ...]


def search_noncyclotomic_lift(a: Automorphism, moduli: Sequence[int], budget: int) -> SearchResult:
    """Look for a lift with spectral radius > 1 on the trivial cover and then
    the coinvariant covers for each modulus, trying at most ``budget`` covers."""
    if budget < 1:
        raise DomainError("budget must be at least 1")
    for N in moduli:
        if int(N) < 2:
            raise DomainError(f"moduli must be at least 2, got {N}")
    attempts: list[tuple[int, str]] = []
    candidates = [1] + [int(N) for N in moduli]
    for N in candidates[:budget]:
        spec = CoverSpec.trivial(a.domain) if N == 1 else coinvariant_cover_spec(a, N)
        try:
            cover = build_cover(spec)
        except UnsupportedScaleError:
            attempts.append((N, "refused: degree over cap"))
            continue
        lift = lift_automorphism(a, cover)
        cls = classify_monodromy(lift.matrix)
        attempts.append((N, cls.label))
        if not cls.is_cyclotomic:
            return SearchResult(True, lift, cls.witness, N, tuple(attempts))
    return SearchResult(False, None, None, None, tuple(attempts))


@dataclass(frozen=True)
class GrowthBound:
    """Lower bound data for torsion growth driven by large eigenvalues.

    ``q`` is the fraction of eigenvalues of ``B`` of modulus at least
    ``lambda0``.  ``C_N_log`` sums ``log|mu - 1|`` over the remaining
    eigenvalues ``mu`` of ``B^n`` other than 1, so that
    ``log|det'(B^n - I)| >= q * size * log(lambda0^n - 1) + C_N_log``
    (stored as ``log_det_lower``).  ``lower_bound`` is the limiting growth
    rate ``chi_abs * q * log(lambda0)``.
    """

    lambda0: float
    q: float
    chi_abs: int
    C_N_log: float
    lower_bound: float
    n: int = 1
    log_det_lower: float = 0.0
    ambiguous: int = 0


def _strip_roots_of_unity(p: IntPoly, n: int) -> IntPoly:
    unity = IntPoly.from_roots_of_unity_power(n)
    while True:
        g = poly_gcd(p, unity)
        if g.degree < 1:
            return p
        p = p.exact_div(g)


def growth_lower_bound(B: IntMatrix, lambda0: float, fiber_chi_abs: int, n: int = 1) -> GrowthBound:
    """Eigenvalue-count lower bound for the growth of ``log|det'(B^n - I)|``.

    >>> gb = growth_lower_bound(IntMatrix.from_rows([[2, 1], [1, 1]]), 2.0, 1)
    >>> gb.q, round(gb.lower_bound, 4)
    (0.5, 0.3466)
    """
    if not lambda0 > 1:
        raise DomainError(f"lambda0 must exceed 1, got {lambda0}")
    if n < 1:
        raise DomainError("n must be positive")
    if not B.is_square:
        raise DomainError("B must be square")
    p = char_poly(B)
    size = B.rows
    count, ambiguous = 0, 0
    for e in root_enclosures(p):
        cmp = e.compare_modulus(lambda0)
        if cmp >= 0:
            count += e.multiplicity
        if cmp == 0:
            ambiguous += e.multiplicity
    q = count / size
    C = mpmath.mpf(0)
    rest = _strip_roots_of_unity(p, n)
    if rest.degree > 0:
        with mpmath.workprec(128):
            for e in root_enclosures(rest, 128):
                if e.compare_modulus(lambda0) >= 0:
                    continue
                z = mpmath.mpc(mpmath.mpf(e.re) / 2 ** e.scale, mpmath.mpf(e.im) / 2 ** e.scale)
                C += e.multiplicity * mpmath.log(abs(z ** n - 1))
    C = float(C)
    big = count * math.log(lambda0 ** n - 1) if count else 0.0
    return GrowthBound(float(lambda0), q, int(fiber_chi_abs), C,
                       fiber_chi_abs * q * math.log(lambda0), n, big + C, ambiguous)


def fiber_constant(fiber: SurfacePresentation) -> float:
    """``log 2 * 2(g - 1)`` for a closed genus-``g`` fiber, ``log 2 * (r - 1)``
    for a free fiber of rank ``r``."""
    if fiber.is_closed:
        return LOG2 * 2 * (fiber.genus - 1)
    return LOG2 * (fiber.rank - 1)


def cyclotomic_upper_bound(level: TowerLevel, fiber: SurfacePresentation,
                           C: float | None = None) -> float:
    """``C / c + 2 log 2 / d`` for a level with ``c`` fiber components and degree ``d``.

    >>> lv = TowerLevel(1, 8, 1, 1, 0.0, 4, 1)
    >>> round(cyclotomic_upper_bound(lv, SurfacePresentation.closed(2)), 4)
    0.5199
    """
    if C is None:
        C = fiber_constant(fiber)
    return C / level.fiber_components + 2 * LOG2 / level.degree
