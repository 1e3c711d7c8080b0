"""Exact integer linear algebra.

Everything here works on Python integers, so there is no overflow at any
size.  The Smith normal form is the ground truth for every torsion
computation in the package; :func:`restricted_det` is kept only as a
cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TypeVar

import numpy as np

from .errors import DimensionError
from .intpoly import IntPoly

T = TypeVar("T")

# char_poly switches from Berkowitz to multimodular Hessenberg above this size
BERKOWITZ_MAX = 24


@dataclass(frozen=True)
class IntMatrix:
    """Dense row-major matrix of arbitrary-precision integers."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionError("negative matrix dimension")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> IntMatrix:
        rows = [[int(x) for x in r] for r in rows]
        if not rows:
            return cls(0, 0, ())
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged row lengths")
        return cls(len(rows), width, tuple(x for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> IntMatrix:
        n = len(values)
        return cls(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> IntMatrix:
        return cls.from_rows(zip(*columns)) if columns else cls(0, 0, ())

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(index)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[int, ...]:
        return self.entries[j::self.cols] if self.cols else ()

    def tolist(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> IntMatrix:
        return IntMatrix(self.cols, self.rows,
                         tuple(self.entries[i * self.cols + j]
                               for j in range(self.cols) for i in range(self.rows)))

    def trace(self) -> int:
        _require_square(self)
        return sum(self[i, i] for i in range(self.rows))

    def __add__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise DimensionError(f"cannot subtract {other.shape} from {self.shape}")
        return IntMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def __mul__(self, scalar: int) -> IntMatrix:
        if isinstance(scalar, IntMatrix):
            return NotImplemented
        return IntMatrix(self.rows, self.cols, tuple(scalar * a for a in self.entries))

    __rmul__ = __mul__

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.col(j) for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            r = self.row(i)
            out.extend(sum(map(int.__mul__, r, c)) for c in cols)
        return IntMatrix(self.rows, other.cols, tuple(out))

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        """Matrix times column vector."""
        if len(vector) != self.cols:
            raise DimensionError("vector length does not match column count")
        return tuple(sum(a * b for a, b in zip(self.row(i), vector)) for i in range(self.rows))

    def max_abs(self) -> int:
        return max((abs(a) for a in self.entries), default=0)

    def det(self) -> int:
        return determinant(self)

    def rank(self) -> int:
        return rank(self)

    def __repr__(self) -> str:
        return f"IntMatrix({self.tolist()})"


@dataclass(frozen=True)
class SNFResult:
    """``U @ M @ V == D`` with ``U``, ``V`` unimodular and ``D`` diagonal.

    ``U_inv`` and ``V_inv`` are the exact inverses, kept because change of
    basis on quotient lattices needs them.
    """

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    invariant_factors: tuple[int, ...]
    U_inv: IntMatrix
    V_inv: IntMatrix

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)


@dataclass(frozen=True)
class CokerSummary:
    """Isomorphism type of ``Z^rows / image(M)``."""

    betti: int
    torsion_factors: tuple[int, ...]
    torsion_order: int

    def __post_init__(self):
        if any(f <= 1 for f in self.torsion_factors):
            raise ValueError("torsion factors must exceed 1")
        if self.torsion_order != math.prod(self.torsion_factors):
            raise ValueError("torsion order is not the product of the factors")


def _require_square(M: IntMatrix) -> None:
    if not M.is_square:
        raise DimensionError(f"expected a square matrix, got {M.rows}x{M.cols}")


def _nearest_quotient(a: int, p: int) -> int:
    q, r = divmod(a, p)
    if 2 * abs(r) > abs(p):
        q += 1
    return q


class _Elimination:
    """Row/column reduction of a mutable copy, optionally tracking transforms."""

    def __init__(self, M: IntMatrix, track: bool):
        self.m, self.n = M.rows, M.cols
        self.a = M.tolist()
        self.track = track
        if track:
            self.U = IntMatrix.identity(self.m).tolist()
            self.Uinv = IntMatrix.identity(self.m).tolist()
            self.V = IntMatrix.identity(self.n).tolist()
            self.Vinv = IntMatrix.identity(self.n).tolist()

    # row_i += q * row_j
    def row_add(self, i: int, j: int, q: int) -> None:
        a = self.a
        a[i] = [x + q * y for x, y in zip(a[i], a[j])]
        if self.track:
            self.U[i] = [x + q * y for x, y in zip(self.U[i], self.U[j])]
            for r in self.Uinv:
                r[j] -= q * r[i]

    def row_swap(self, i: int, j: int) -> None:
        a = self.a
        a[i], a[j] = a[j], a[i]
        if self.track:
            self.U[i], self.U[j] = self.U[j], self.U[i]
            for r in self.Uinv:
                r[i], r[j] = r[j], r[i]

    def row_neg(self, i: int) -> None:
        self.a[i] = [-x for x in self.a[i]]
        if self.track:
            self.U[i] = [-x for x in self.U[i]]
            for r in self.Uinv:
                r[i] = -r[i]

    # col_i += q * col_j
    def col_add(self, i: int, j: int, q: int) -> None:
        for r in self.a:
            if r[j]:
                r[i] += q * r[j]
        if self.track:
            for r in self.V:
                r[i] += q * r[j]
            self.Vinv[j] = [x - q * y for x, y in zip(self.Vinv[j], self.Vinv[i])]

    def col_swap(self, i: int, j: int) -> None:
        for r in self.a:
            r[i], r[j] = r[j], r[i]
        if self.track:
            for r in self.V:
                r[i], r[j] = r[j], r[i]
            self.Vinv[i], self.Vinv[j] = self.Vinv[j], self.Vinv[i]

    def _find_pivot(self, t: int) -> tuple[int, int] | None:
        best = None
        best_abs = 0
        for i in range(t, self.m):
            row = self.a[i]
            for j in range(t, self.n):
                v = row[j]
                if v and (best is None or abs(v) < best_abs):
                    best, best_abs = (i, j), abs(v)
                    if best_abs == 1:
                        return best
        return best

    def diagonalize(self) -> list[int]:
        """Reduce to diagonal form; returns the nonzero diagonal entries."""
        a = self.a
        m, n = self.m, self.n
        t = 0
        while t < min(m, n):
            pivot = self._find_pivot(t)
            if pivot is None:
                break
            i, j = pivot
            if i != t:
                self.row_swap(i, t)
            if j != t:
                self.col_swap(j, t)
            while True:
                p = a[t][t]
                for i in range(t + 1, m):
                    if a[i][t]:
                        self.row_add(i, t, -_nearest_quotient(a[i][t], p))
                for j in range(t + 1, n):
                    if a[t][j]:
                        self.col_add(j, t, -_nearest_quotient(a[t][j], p))
                best = None
                best_abs = 0
                for i in range(t + 1, m):
                    v = a[i][t]
                    if v and (best is None or abs(v) < best_abs):
                        best, best_abs = ("r", i), abs(v)
                for j in range(t + 1, n):
                    v = a[t][j]
                    if v and (best is None or abs(v) < best_abs):
                        best, best_abs = ("c", j), abs(v)
                if best is None:
                    break
                if best[0] == "r":
                    self.row_swap(best[1], t)
                else:
                    self.col_swap(best[1], t)
            t += 1
        return [a[i][i] for i in range(t)]

    def normalize(self, diag: list[int]) -> list[int]:
        """Make the diagonal positive with each entry dividing the next."""
        d = list(diag)
        for i, v in enumerate(d):
            if v < 0:
                d[i] = -v
                if self.track:
                    self.row_neg(i)
        for i in range(len(d)):
            for j in range(i + 1, len(d)):
                a, b = d[i], d[j]
                if b % a == 0:
                    continue
                g, s, t = _xgcd(a, b)
                d[i], d[j] = g, a // g * b
                if self.track:
                    self._gcd_transform(i, j, a, b, g, s, t)
        return d

    def _gcd_transform(self, i, j, a, b, g, s, t):
        ag, bg = a // g, b // g
        U, Uinv, V, Vinv = self.U, self.Uinv, self.V, self.Vinv
        ri, rj = U[i], U[j]
        U[i] = [s * x + t * y for x, y in zip(ri, rj)]
        U[j] = [-bg * x + ag * y for x, y in zip(ri, rj)]
        for r in Uinv:
            x, y = r[i], r[j]
            r[i], r[j] = ag * x + bg * y, -t * x + s * y
        for r in V:
            x, y = r[i], r[j]
            r[i], r[j] = x + y, -t * bg * x + s * ag * y
        vi, vj = Vinv[i], Vinv[j]
        Vinv[i] = [s * ag * x + t * bg * y for x, y in zip(vi, vj)]
        Vinv[j] = [y - x for x, y in zip(vi, vj)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) > 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def _normalize_factors(diag: Iterable[int]) -> list[int]:
    d = [abs(x) for x in diag]
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            if d[j] % d[i]:
                g = math.gcd(d[i], d[j])
                d[i], d[j] = g, d[i] // g * d[j]
    return d


def smith_normal_form(M: IntMatrix) -> SNFResult:
    """Smith normal form with unimodular transforms.

    Pivots are chosen as the smallest nonzero entry in absolute value
    (ties broken by row, then column), which keeps the output deterministic
    and limits coefficient growth.

    >>> smith_normal_form(IntMatrix.from_rows([[0, 2], [0, 0]])).invariant_factors
    (2,)
    """
    if M.rows == 0 or M.cols == 0:
        raise DimensionError("smith_normal_form needs a nonempty matrix")
    el = _Elimination(M, track=True)
    d = el.normalize(el.diagonalize())
    D = IntMatrix(M.rows, M.cols, tuple(
        d[i] if i == j and i < len(d) else 0 for i in range(M.rows) for j in range(M.cols)))
    return SNFResult(
        U=IntMatrix.from_rows(el.U), D=D, V=IntMatrix.from_rows(el.V),
        invariant_factors=tuple(d),
        U_inv=IntMatrix.from_rows(el.Uinv), V_inv=IntMatrix.from_rows(el.Vinv),
    )


def invariant_factors(M: IntMatrix) -> tuple[int, ...]:
    """Nonzero Smith invariants of ``M`` without building the transforms."""
    if M.rows == 0 or M.cols == 0:
        return ()
    el = _Elimination(M, track=False)
    return tuple(_normalize_factors(el.diagonalize()))


def cokernel(M: IntMatrix) -> CokerSummary:
    """Betti number and torsion of ``Z^rows / (column span of M)``."""
    if M.rows == 0 or M.cols == 0:
        raise DimensionError("cokernel needs a nonempty matrix")
    factors = invariant_factors(M)
    torsion = tuple(f for f in factors if f > 1)
    return CokerSummary(M.rows - len(factors), torsion, math.prod(torsion))


def determinant(M: IntMatrix) -> int:
    """Bareiss fraction-free determinant."""
    _require_square(M)
    n = M.rows
    if n == 0:
        return 1
    a = M.tolist()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def rank(M: IntMatrix) -> int:
    """Rank over the rationals (fraction-free elimination)."""
    a = M.tolist()
    m, n = M.rows, M.cols
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, m):
            if a[i][c]:
                f = a[i][c]
                a[i] = [p * x - f * y for x, y in zip(a[i], a[r])]
                g = math.gcd(*a[i]) if any(a[i]) else 1
                if g > 1:
                    a[i] = [x // g for x in a[i]]
        r += 1
        if r == m:
            break
    return r


def is_unimodular(M: IntMatrix) -> bool:
    return M.is_square and abs(determinant(M)) == 1


def matrix_power(M: IntMatrix, k: int) -> IntMatrix:
    """Exact ``M**k`` by binary exponentiation."""
    _require_square(M)
    if k < 0:
        raise ValueError("negative exponent")
    result = IntMatrix.identity(M.rows)
    base = M
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def berkowitz(matrix: Sequence[Sequence[T]], zero: T, one: T) -> list[T]:
    """Division-free characteristic polynomial over any commutative ring.

    Returns the coefficients of ``det(t I - A)`` from the leading ``t^n``
    down to the constant term.  Only ``+``, ``-`` and ``*`` are used.
    """
    n = len(matrix)
    if n == 0:
        return [one]
    vect = [one, -matrix[0][0]]
    for r in range(1, n):
        C = [matrix[i][r] for i in range(r)]
        R = [matrix[r][j] for j in range(r)]
        col = [one, -matrix[r][r]]
        v = C
        for _ in range(r):
            acc = zero
            for x, y in zip(R, v):
                acc = acc + x * y
            col.append(-acc)
            nv = []
            for i in range(r):
                acc = zero
                row = matrix[i]
                for j in range(r):
                    acc = acc + row[j] * v[j]
                nv.append(acc)
            v = nv
        new = []
        for i in range(r + 2):
            acc = zero
            for j in range(max(0, i - len(col) + 1), min(i, r) + 1):
                acc = acc + col[i - j] * vect[j]
            new.append(acc)
        vect = new
    return vect


def _primes_below(start: int) -> Iterable[int]:
    def is_prime(x: int) -> bool:
        if x % 2 == 0:
            return False
        for d in range(3, math.isqrt(x) + 1, 2):
            if x % d == 0:
                return False
        return True

    x = start - 1 if start % 2 == 0 else start - 2
    while x > 2:
        if is_prime(x):
            yield x
        x -= 2


# 26-bit primes keep every numpy dot product below 2**63 for n < 2048
_MOD_PRIMES: list[int] = []


def _modular_primes(count: int) -> list[int]:
    if len(_MOD_PRIMES) < count:
        gen = _primes_below(_MOD_PRIMES[-1] if _MOD_PRIMES else 1 << 26)
        while len(_MOD_PRIMES) < count:
            _MOD_PRIMES.append(next(gen))
    return _MOD_PRIMES[:count]


def _charpoly_mod(A: np.ndarray, p: int) -> list[int]:
    """Char poly coefficients mod p (constant first) via Hessenberg form."""
    n = A.shape[0]
    H = A % p
    for k in range(n - 2):
        nz = np.nonzero(H[k + 1:, k])[0]
        if len(nz) == 0:
            continue
        i = k + 1 + int(nz[0])
        if i != k + 1:
            H[[i, k + 1], :] = H[[k + 1, i], :]
            H[:, [i, k + 1]] = H[:, [k + 1, i]]
        inv = pow(int(H[k + 1, k]), p - 2, p)
        mult = (H[k + 2:, k] * inv) % p
        if not mult.any():
            continue
        H[k + 2:, :] = (H[k + 2:, :] - np.outer(mult, H[k + 1, :]) % p) % p
        H[:, k + 1] = (H[:, k + 1] + (H[:, k + 2:] @ mult) % p) % p
    polys = [np.zeros(n + 1, dtype=np.int64)]
    polys[0][0] = 1
    for m in range(1, n + 1):
        prev = polys[m - 1]
        cur = np.zeros(n + 1, dtype=np.int64)
        cur[1:] = prev[:-1]
        cur = (cur - (int(H[m - 1, m - 1]) * prev) % p) % p
        prod = 1
        for i in range(m - 1, 0, -1):
            prod = prod * int(H[i, i - 1]) % p
            if prod == 0:
                break
            coef = int(H[i - 1, m - 1]) * prod % p
            if coef:
                cur = (cur - (coef * polys[i - 1]) % p) % p
        polys.append(cur)
    return [int(c) for c in polys[n]]


def _charpoly_multimodular(M: IntMatrix) -> list[int]:
    n = M.rows
    frob = math.isqrt(sum(a * a for a in M.entries)) + 1
    # |e_k(eigenvalues)| <= C(n, k) * frob**k <= (1 + frob)**n
    bound_bits = n * (frob + 1).bit_length() + 2
    primes = _modular_primes(bound_bits // 25 + 2)
    rows = M.tolist()
    residues = []
    modulus = 1
    for p in primes:
        A = np.array([[x % p for x in r] for r in rows], dtype=np.int64)
        residues.append((p, _charpoly_mod(A, p)))
        modulus *= p
        if modulus.bit_length() > bound_bits + 1:
            break
    coeffs = []
    for k in range(n + 1):
        x, mod = 0, 1
        for p, res in residues:
            # incremental CRT
            t = ((res[k] - x) * pow(mod, -1, p)) % p
            x += mod * t
            mod *= p
        if x > mod // 2:
            x -= mod
        coeffs.append(x)
    return coeffs


def char_poly(M: IntMatrix) -> IntPoly:
    """Monic ``det(t I - M)``, computed exactly.

    >>> char_poly(IntMatrix.from_rows([[2, 1], [1, 1]]))
    IntPoly('t^2 - 3*t + 1')
    """
    _require_square(M)
    if M.rows <= BERKOWITZ_MAX:
        high_to_low = berkowitz(M.tolist(), 0, 1)
        return IntPoly(tuple(reversed(high_to_low)))
    return IntPoly(tuple(_charpoly_multimodular(M)))


def restricted_det(M: IntMatrix) -> int:
    """Product of the nonzero eigenvalues of ``M`` (1 for nilpotent ``M``)."""
    _require_square(M)
    cp = char_poly(M).coeffs
    m = next(i for i, c in enumerate(cp) if c)
    return (-1) ** (M.rows - m) * cp[m]


def generic_det(matrix: Sequence[Sequence[T]], zero: T, one: T) -> T:
    """Determinant over a commutative ring, via :func:`berkowitz`."""
    coeffs = berkowitz(matrix, zero, one)
    c = coeffs[-1]
    return c if len(matrix) % 2 == 0 else -c


def hermite_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Zero rows are dropped; pivots are positive and entries above each
    pivot are reduced into ``[0, pivot)``.
    """
    a = [list(r) for r in rows if any(r)]
    if not a:
        return []
    n = len(a[0])
    out: list[list[int]] = []
    for c in range(n):
        live = [r for r in a if r[c]]
        rest = [r for r in a if not r[c]]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[c]))
            p = live[0]
            nxt = [p]
            for r in live[1:]:
                q = r[c] // p[c]
                r = [x - q * y for x, y in zip(r, p)]
                if r[c]:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            live = nxt
        if live:
            p = live[0]
            if p[c] < 0:
                p = [-x for x in p]
            for k, r in enumerate(out):
                q = r[c] // p[c]
                if q:
                    out[k] = [x - q * y for x, y in zip(r, p)]
            out.append(p)
        a = [r for r in rest if any(r)]
    return out
