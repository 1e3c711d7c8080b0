"""Integer polynomials, resultants, the Kronecker test and Mahler measure.

An :class:`IntPoly` is a dense tuple of Python integers, constant term
first.  Root-dependent quantities (Mahler measure, spectral radius, root
moduli) come from certified enclosures: approximate roots are refined in
floating point and then verified with exact dyadic arithmetic, so a
returned bound is never wrong, only possibly loose.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError

DEFAULT_TOL = 1e-9
MAX_PRECISION_BITS = 8192


@dataclass(frozen=True)
class IntPoly:
    """Polynomial with integer coefficients in one variable ``t``.

    >>> IntPoly((1, -3, 1))
    IntPoly('t^2 - 3*t + 1')
    """

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1) -> IntPoly:
        return cls((0,) * degree + (coeff,))

    @classmethod
    def from_roots_of_unity_power(cls, n: int) -> IntPoly:
        """``t^n - 1``."""
        return cls((-1,) + (0,) * (n - 1) + (1,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.lead == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: IntPoly) -> IntPoly:
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return IntPoly(tuple(x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)))

    def __neg__(self) -> IntPoly:
        return IntPoly(tuple(-x for x in self.coeffs))

    def __sub__(self, other: IntPoly) -> IntPoly:
        return self + (-other)

    def __mul__(self, other) -> IntPoly:
        if isinstance(other, int):
            return IntPoly(tuple(other * x for x in self.coeffs))
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly(())
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return IntPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> IntPoly:
        result = IntPoly((1,))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift(self, k: int) -> IntPoly:
        """Multiply by ``t^k``."""
        return IntPoly((0,) * k + self.coeffs) if self.coeffs else self

    def derivative(self) -> IntPoly:
        return IntPoly(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def content(self) -> int:
        return math.gcd(*self.coeffs) if self.coeffs else 0

    def primitive_part(self) -> IntPoly:
        """``self / content`` with a positive leading coefficient."""
        if not self.coeffs:
            return self
        g = self.content()
        if self.lead < 0:
            g = -g
        return IntPoly(tuple(c // g for c in self.coeffs))

    def trailing_zeros(self) -> int:
        """Multiplicity of the root ``t = 0``."""
        return next((i for i, c in enumerate(self.coeffs) if c), 0)

    def exact_div(self, other: IntPoly) -> IntPoly:
        """Quotient over Z; raises ``ArithmeticError`` if not exact."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        db, lb = other.degree, other.lead
        q = [0] * max(0, len(rem) - db)
        for k in range(len(rem) - 1 - db, -1, -1):
            c = rem[k + db]
            if c % lb:
                raise ArithmeticError("polynomial division is not exact over Z")
            c //= lb
            q[k] = c
            if c:
                for i, b in enumerate(other.coeffs):
                    rem[k + i] -= c * b
        if any(rem):
            raise ArithmeticError("polynomial division leaves a remainder")
        return IntPoly(tuple(q))

    def pseudo_rem(self, other: IntPoly) -> IntPoly:
        """Remainder of ``lead(other)^(deg self - deg other + 1) * self`` by ``other``."""
        r = list(self.coeffs)
        db, lb = other.degree, other.lead
        d = len(r) - 1 - db
        if d < 0:
            return self
        for k in range(d, -1, -1):
            c = r[k + db] if k + db < len(r) else 0
            r = [lb * x for x in r]
            if c:
                for i, b in enumerate(other.coeffs):
                    r[k + i] -= c * b
            r = r[:k + db] if k + db <= len(r) else r
        return IntPoly(tuple(r))

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mag = abs(c)
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if not mono:
                body = str(mag)
            else:
                body = mono if mag == 1 else f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"IntPoly('{self}')"


def poly_gcd(p: IntPoly, q: IntPoly) -> IntPoly:
    """Greatest common divisor over Z (primitive PRS), positive leading coefficient."""
    if p.is_zero():
        return q.primitive_part() * q.content() if q.coeffs else q
    if q.is_zero():
        return p.primitive_part() * p.content()
    c = math.gcd(p.content(), q.content())
    a, b = p.primitive_part(), q.primitive_part()
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero() and b.degree > 0:
        r = a.pseudo_rem(b)
        a, b = b, (r.primitive_part() if not r.is_zero() else r)
    g = a if b.is_zero() else IntPoly((1,))
    return g.primitive_part() * c


def squarefree_decomposition(p: IntPoly) -> list[tuple[IntPoly, int]]:
    """Primitive squarefree ``f_i`` with ``p = c * prod f_i^i``.

    Uses the repeated-gcd scheme: with ``a_0 = p`` and
    ``a_k = gcd(a_{k-1}, a_{k-1}')`` the quotients ``b_k = a_{k-1}/a_k``
    collect the factors of multiplicity at least ``k``.  Every polynomial
    involved is primitive, so all divisions are exact over Z.
    """
    if p.degree < 1:
        return []
    a = p.primitive_part()
    bs = []
    while a.degree > 0:
        nxt = poly_gcd(a, a.derivative()).primitive_part()
        bs.append(a.exact_div(nxt).primitive_part())
        a = nxt
    bs.append(IntPoly((1,)))
    out = []
    for i in range(len(bs) - 1):
        f = bs[i].exact_div(bs[i + 1]).primitive_part()
        if f.degree > 0:
            out.append((f, i + 1))
    return out


def resultant(p: IntPoly, q: IntPoly) -> int:
    """Resultant by the subresultant pseudo-remainder sequence.

    >>> resultant(IntPoly((1, -3, 1)), IntPoly((-1, 0, 0, 1)))
    -16
    """
    if p.is_zero() or q.is_zero():
        raise DomainError("resultant of the zero polynomial is undefined")
    A, B = p, q
    ca, cb = A.content(), B.content()
    t = ca ** B.degree * cb ** A.degree
    A = IntPoly(tuple(x // ca for x in A.coeffs))
    B = IntPoly(tuple(x // cb for x in B.coeffs))
    s = 1
    if A.degree < B.degree:
        A, B = B, A
        if A.degree % 2 and B.degree % 2:
            s = -1
    if B.degree == 0:
        return s * t * B.lead ** A.degree
    g, h = 1, 1
    while True:
        delta = A.degree - B.degree
        if A.degree % 2 and B.degree % 2:
            s = -s
        R = A.pseudo_rem(B)
        A = B
        if R.is_zero():
            return 0
        div = g * h ** delta
        B = IntPoly(tuple(x // div for x in R.coeffs))
        g = A.lead
        h = h ** (1 - delta) * g ** delta if delta <= 1 else g ** delta // h ** (delta - 1)
        if B.degree <= 0:
            break
    da = A.degree
    if da <= 1:
        h = h ** (1 - da) * B.lead ** da
    else:
        h = B.lead ** da // h ** (da - 1)
    return s * t * h


@functools.lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> IntPoly:
    """The ``n``-th cyclotomic polynomial.

    >>> cyclotomic_poly(12)
    IntPoly('t^4 - t^2 + 1')
    """
    if n < 1:
        raise DomainError("cyclotomic_poly needs n >= 1")
    p = IntPoly.from_roots_of_unity_power(n)
    for d in range(1, n):
        if n % d == 0:
            p = p.exact_div(cyclotomic_poly(d))
    return p


def graeffe(p: IntPoly) -> IntPoly:
    """Polynomial whose roots are the squares of the roots of ``p``."""
    c = p.coeffs
    even = IntPoly(c[0::2])
    odd = IntPoly(c[1::2])
    g = even * even - (odd * odd).shift(1)
    return -g if p.degree % 2 else g


def is_cyclotomic_product(p: IntPoly) -> bool:
    """Decide exactly whether every root of monic ``p`` is a root of unity.

    Graeffe root-squaring is iterated.  While all roots lie on the unit
    circle the coefficient of ``t^i`` is bounded by ``binomial(n, i)``, so
    the iterates range over a finite set and must repeat; a root off the
    circle makes the coefficients eventually exceed that bound.  Factors of
    ``t`` are removed first.
    """
    if p.is_zero():
        raise DomainError("the zero polynomial has no roots to test")
    if not p.is_monic():
        raise DomainError(f"is_cyclotomic_product needs a monic polynomial, got lead {p.lead}")
    q = IntPoly(p.coeffs[p.trailing_zeros():])
    n = q.degree
    if n == 0:
        return True
    if abs(q.coeffs[0]) != 1:
        return False
    bounds = [math.comb(n, i) for i in range(n + 1)]
    seen = set()
    while True:
        if any(abs(c) > b for c, b in zip(q.coeffs, bounds)):
            return False
        if q in seen:
            return True
        seen.add(q)
        q = graeffe(q)


# ---------------------------------------------------------------------------
# certified root enclosures


@dataclass(frozen=True)
class RootEnclosure:
    """Closed disc ``|z - (re + i*im)/2^scale| <= radius/2^scale`` holding
    exactly one distinct root, counted with ``multiplicity``."""

    re: int
    im: int
    radius: int
    scale: int
    multiplicity: int

    @property
    def center(self) -> complex:
        return complex(Fraction(self.re, 1 << self.scale), Fraction(self.im, 1 << self.scale))

    @property
    def radius_float(self) -> float:
        return math.ldexp(self.radius, -self.scale)

    def modulus_bounds(self) -> tuple[Fraction, Fraction]:
        """Rigorous lower and upper bounds on the modulus of the root."""
        m = math.isqrt(self.re * self.re + self.im * self.im)
        den = 1 << self.scale
        return Fraction(max(0, m - self.radius), den), Fraction(m + 1 + self.radius, den)

    @property
    def modulus(self) -> float:
        return math.hypot(math.ldexp(self.re, -self.scale), math.ldexp(self.im, -self.scale))

    def compare_modulus(self, c: float | Fraction) -> int:
        """+1 if the modulus certainly exceeds ``c``, -1 if certainly below, else 0."""
        lo, hi = self.modulus_bounds()
        c = Fraction(c)
        if lo > c:
            return 1
        if hi < c:
            return -1
        return 0


def _initial_roots(f: IntPoly) -> np.ndarray:
    n = f.degree
    coeffs = np.array([float(c) for c in reversed(f.coeffs)])
    with np.errstate(all="ignore"):
        if np.all(np.isfinite(coeffs)):
            z = np.roots(coeffs)
            if len(z) == n and np.all(np.isfinite(z)):
                return _aberth_float(coeffs, z.astype(complex))
    bound = _cauchy_bound(f)
    k = np.arange(n)
    return bound * np.exp(2j * np.pi * (k + 0.25) / n)


def _aberth_float(coeffs: np.ndarray, z: np.ndarray, iters: int = 60) -> np.ndarray:
    dcoeffs = np.polyder(coeffs)
    n = len(z)
    if n == 1:
        return np.array([-coeffs[1] / coeffs[0]], dtype=complex)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            pz = np.polyval(coeffs, z)
            dz = np.polyval(dcoeffs, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            ratio = pz / dz
            w = ratio / (1 - ratio * s)
            if not np.all(np.isfinite(w)):
                break
            z = z - w
            if np.max(np.abs(w) / np.maximum(1.0, np.abs(z))) < 1e-15:
                break
    return z


def _cauchy_bound(f: IntPoly) -> float:
    lead = abs(f.lead)
    return 1.0 + max(abs(c) for c in f.coeffs[:-1]) / lead if f.degree > 0 else 1.0


def _aberth_mp(f: IntPoly, z: list, prec: int, max_sweeps: int = 200) -> list:
    """Gauss-Seidel Aberth sweeps at ``prec`` bits until corrections vanish."""
    coeffs = list(reversed(f.coeffs))
    n = f.degree
    target = mpmath.mpf(2) ** (-(prec - 8))
    with mpmath.workprec(prec + 16):
        z = [mpmath.mpc(x) for x in z]
        if n == 1:
            return [mpmath.mpc(-mpmath.mpf(f.coeffs[0]) / f.coeffs[1])]
        for _ in range(max_sweeps):
            biggest = mpmath.mpf(0)
            for i in range(n):
                zi = z[i]
                p = mpmath.mpc(coeffs[0])
                dp = mpmath.mpc(0)
                for c in coeffs[1:]:
                    dp = dp * zi + p
                    p = p * zi + c
                if p == 0:
                    continue
                ratio = p / dp if dp != 0 else mpmath.mpc(0)
                s = mpmath.mpc(0)
                for j in range(n):
                    if j != i:
                        d = zi - z[j]
                        if d != 0:
                            s += 1 / d
                denom = 1 - ratio * s
                w = ratio / denom if denom != 0 else ratio
                z[i] = zi - w
                rel = abs(w) / max(1, abs(z[i]))
                if rel > biggest:
                    biggest = rel
            if biggest < target:
                break
        return z


def _certify(f: IntPoly, z: list, bits: int) -> list[tuple[int, int, int]] | None:
    """Exact Weierstrass discs ``(X, Y, R)`` at scale ``2^bits``, or ``None``
    when they are not pairwise disjoint."""
    n = f.degree
    pts = []
    with mpmath.workprec(bits + 64):
        for x in z:
            pts.append((int(mpmath.nint(x.real * mpmath.mpf(2) ** bits)),
                        int(mpmath.nint(x.imag * mpmath.mpf(2) ** bits))))
    if len(set(pts)) < n:
        return None
    lead = f.lead
    out = []
    for i, (X, Y) in enumerate(pts):
        # N = p(z) * 2^(n*bits) as a Gaussian integer
        nr, ni = lead, 0
        for k in range(n - 1, -1, -1):
            nr, ni = nr * X - ni * Y, nr * Y + ni * X
            nr += f.coeffs[k] << ((n - k) * bits)
        dsq = 1
        for j, (U, V) in enumerate(pts):
            if j != i:
                du, dv = X - U, Y - V
                dsq *= du * du + dv * dv
        num = n * n * (nr * nr + ni * ni)
        den = lead * lead * dsq
        R = math.isqrt(-(-num // den)) + 1
        out.append((X, Y, R))
    for i in range(n):
        Xi, Yi, Ri = out[i]
        for j in range(i + 1, n):
            Xj, Yj, Rj = out[j]
            dx, dy = Xi - Xj, Yi - Yj
            if dx * dx + dy * dy <= (Ri + Rj) ** 2:
                return None
    return out


@functools.lru_cache(maxsize=512)
def _squarefree_enclosures(f: IntPoly, bits: int) -> tuple[tuple[int, int, int, int], ...]:
    """Disjoint certified discs for the roots of squarefree ``f``.

    Precision is doubled from ``bits`` until the discs separate.
    """
    n = f.degree
    extra = max(0, int(math.log2(_cauchy_bound(f))) + 1)
    z = list(_initial_roots(f))
    prec = bits
    while prec <= MAX_PRECISION_BITS:
        z = _aberth_mp(f, z, prec + extra)
        discs = _certify(f, z, prec + extra)
        if discs is not None:
            return tuple((X, Y, R, prec + extra) for X, Y, R in discs)
        prec *= 2
    raise ConvergenceError(f"could not isolate the {n} roots of {f} within {MAX_PRECISION_BITS} bits")


def root_enclosures(p: IntPoly, bits: int = 64) -> list[RootEnclosure]:
    """Certified enclosures of all roots of ``p``, one disc per distinct root."""
    if p.is_zero():
        raise DomainError("the zero polynomial has no well-defined roots")
    out = []
    z0 = p.trailing_zeros()
    if z0:
        out.append(RootEnclosure(0, 0, 0, 0, z0))
    q = IntPoly(p.coeffs[z0:])
    for f, mult in squarefree_decomposition(q):
        for X, Y, R, scale in _squarefree_enclosures(f, bits):
            out.append(RootEnclosure(X, Y, R, scale, mult))
    return out


@dataclass(frozen=True)
class MahlerResult:
    """Mahler measure with a rigorous error bound."""

    value: float
    error_bound: float
    roots_outside_unit: int

    @property
    def log_value(self) -> float:
        return math.log(self.value)


def _product_bounds(encl: Sequence[RootEnclosure]) -> tuple[Fraction, Fraction, float]:
    lo = Fraction(1)
    hi = Fraction(1)
    est = mpmath.mpf(1)
    for e in encl:
        a, b = e.modulus_bounds()
        lo *= max(Fraction(1), a) ** e.multiplicity
        hi *= max(Fraction(1), b) ** e.multiplicity
        est *= max(mpmath.mpf(1), mpmath.mpf(e.modulus)) ** e.multiplicity
    return lo, hi, float(est)


def mahler_measure(p: IntPoly, tol: float = DEFAULT_TOL) -> MahlerResult:
    """``prod max(1, |root|)`` over the roots of ``p``, certified to ``tol``.

    The leading coefficient is not included (for monic input this is the
    usual Mahler measure).

    >>> round(mahler_measure(IntPoly((1, -3, 1))).value, 7)
    2.618034
    """
    if p.is_zero():
        raise DomainError("Mahler measure of the zero polynomial is undefined")
    if tol <= 0:
        raise DomainError("tol must be positive")
    bits = 64
    while bits <= MAX_PRECISION_BITS:
        encl = root_enclosures(p, bits)
        lo, hi, _ = _product_bounds(encl)
        mid = (lo + hi) / 2
        value = float(mid)
        fv = Fraction(value)
        err = max(hi - fv, fv - lo)
        err_f = math.nextafter(float(err), math.inf) if err > 0 else 0.0
        if err_f <= tol:
            outside = sum(e.multiplicity for e in encl if e.compare_modulus(1) > 0)
            return MahlerResult(value, max(err_f, 5e-324), outside)
        bits *= 2
    raise ConvergenceError(f"Mahler measure of {p} not certified to {tol}")


@dataclass(frozen=True)
class SpectralRadius:
    """Largest root modulus: estimate plus rigorous bounds."""

    value: float
    lower: float
    upper: float


def spectral_radius(p: IntPoly, tol: float = DEFAULT_TOL) -> SpectralRadius:
    """Largest modulus among the roots of ``p``, certified to ``tol``."""
    bits = 64
    while bits <= MAX_PRECISION_BITS:
        encl = root_enclosures(p, bits)
        lo = max(e.modulus_bounds()[0] for e in encl)
        hi = max(e.modulus_bounds()[1] for e in encl)
        if hi - lo <= tol:
            return SpectralRadius(float((lo + hi) / 2), float(lo), math.nextafter(float(hi), math.inf))
        bits *= 2
    raise ConvergenceError(f"spectral radius of {p} not certified to {tol}")


def count_moduli_at_least(p: IntPoly, threshold: float, bits: int = 64) -> tuple[int, int]:
    """Count roots with modulus ``>= threshold`` (with multiplicity).

    Returns ``(count, ambiguous)``; ambiguous roots could not be separated
    from the threshold even at the maximum precision and are included in
    ``count`` (a tie counts as "at least").
    """
    while True:
        encl = root_enclosures(p, bits)
        undecided = [e for e in encl if e.compare_modulus(threshold) == 0]
        if not undecided or bits >= MAX_PRECISION_BITS // 8:
            count = sum(e.multiplicity for e in encl if e.compare_modulus(threshold) >= 0)
            return count, sum(e.multiplicity for e in undecided)
        bits *= 2


def int_roots_of_unity_check(p: IntPoly, orders: Iterable[int]) -> bool:
    """True iff ``p`` divides a product of ``t^k - 1`` for the given ``k``."""
    q = IntPoly((1,))
    for k in orders:
        q = q * IntPoly.from_roots_of_unity_power(k)
    try:
        q.exact_div(p)
    except ArithmeticError:
        return False
    return True
