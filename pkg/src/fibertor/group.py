"""Words, surface group presentations and automorphisms.

Word syntax: a lowercase letter is a generator, the uppercase letter its
inverse (``"abAB"`` is the commutator of the first two generators).
Generator ``i`` may also be written ``x<i>`` and its inverse ``X<i>``;
that form is required for indices 26 and above.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError
from .linalg import IntMatrix

Letter = tuple[int, int]

_TOKEN = re.compile(r"([xX])(\d+)|([a-zA-Z])|(\s+)|(1)")


def _free_reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    out: list[Letter] = []
    for g, s in letters:
        if out and out[-1][0] == g and out[-1][1] == -s:
            out.pop()
        else:
            out.append((g, s))
    return tuple(out)


@dataclass(frozen=True)
class FreeWord:
    """Freely reduced word: a tuple of ``(generator, sign)`` letters."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple((int(g), int(s)) for g, s in self.letters)
        for g, s in letters:
            if g < 0 or s not in (1, -1):
                raise DomainError(f"invalid letter ({g}, {s})")
        object.__setattr__(self, "letters", _free_reduce(letters))

    @classmethod
    def parse(cls, text: str) -> FreeWord:
        """Parse the word syntax described in the module docstring.

        >>> FreeWord.parse("aBx3X3b")
        FreeWord('a')
        """
        letters = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise DomainError(f"cannot parse word {text!r} at position {pos}")
            if m.group(1):
                letters.append((int(m.group(2)), 1 if m.group(1) == "x" else -1))
            elif m.group(3):
                ch = m.group(3)
                letters.append((ord(ch.lower()) - ord("a"), 1 if ch.islower() else -1))
            pos = m.end()
        return cls(tuple(letters))

    @classmethod
    def generator(cls, i: int, sign: int = 1) -> FreeWord:
        return cls(((i, sign),))

    def __str__(self) -> str:
        if not self.letters:
            return ""
        use_index = any(g >= 26 for g, _ in self.letters)
        parts = []
        for g, s in self.letters:
            if use_index:
                parts.append(("x" if s > 0 else "X") + str(g))
            else:
                ch = chr(ord("a") + g)
                parts.append(ch if s > 0 else ch.upper())
        return "".join(parts)

    def __repr__(self) -> str:
        return f"FreeWord('{self}')"

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: FreeWord) -> FreeWord:
        return FreeWord(self.letters + other.letters)

    def __pow__(self, k: int) -> FreeWord:
        base = self if k >= 0 else self.inverse()
        return FreeWord(base.letters * abs(k))

    def inverse(self) -> FreeWord:
        return FreeWord(tuple((g, -s) for g, s in reversed(self.letters)))

    def is_identity(self) -> bool:
        return not self.letters

    def max_generator(self) -> int:
        return max((g for g, _ in self.letters), default=-1)

    def exponent_sums(self, rank: int) -> tuple[int, ...]:
        v = [0] * rank
        for g, s in self.letters:
            v[g] += s
        return tuple(v)

    def cyclic_reduction(self) -> FreeWord:
        w = list(self.letters)
        while len(w) >= 2 and w[0][0] == w[-1][0] and w[0][1] == -w[-1][1]:
            w = w[1:-1]
        return FreeWord(tuple(w))

    def rotations(self) -> list[tuple[Letter, ...]]:
        w = self.letters
        return [w[i:] + w[:i] for i in range(len(w))]


FREE = "free"
CLOSED = "closed"


@dataclass(frozen=True)
class SurfacePresentation:
    """Free group of rank ``rank``, or the closed genus ``rank/2`` surface group
    with relator ``a1 b1 A1 B1 ... ag bg Ag Bg`` (generators interleaved)."""

    rank: int
    kind: str = FREE
    relator: FreeWord | None = None

    def __post_init__(self):
        if self.rank < 1:
            raise DomainError("rank must be positive")
        if self.kind == FREE:
            if self.relator is not None:
                raise DomainError("a free presentation has no relator")
        elif self.kind == CLOSED:
            if self.rank % 2:
                raise DomainError("a closed surface needs an even number of generators")
            std = standard_relator(self.rank // 2)
            if self.relator is None:
                object.__setattr__(self, "relator", std)
            elif self.relator != std:
                raise DomainError("closed presentations use the standard product of commutators")
        else:
            raise DomainError(f"unknown presentation kind {self.kind!r}")

    @classmethod
    def free(cls, rank: int) -> SurfacePresentation:
        return cls(rank, FREE)

    @classmethod
    def closed(cls, genus: int) -> SurfacePresentation:
        if genus < 1:
            raise DomainError("genus must be at least 1")
        return cls(2 * genus, CLOSED)

    @property
    def is_closed(self) -> bool:
        return self.kind == CLOSED

    @property
    def genus(self) -> int:
        if not self.is_closed:
            raise DomainError("genus is defined for closed presentations only")
        return self.rank // 2

    @property
    def chi_abs(self) -> int:
        """``|Euler characteristic|`` of the surface (or graph)."""
        return self.rank - 2 if self.is_closed else self.rank - 1

    def word_equal(self, u: FreeWord, v: FreeWord) -> bool:
        """Decide ``u == v`` in the group."""
        w = u * v.inverse()
        if not self.is_closed:
            return w.is_identity()
        if self.genus == 1:
            return all(x == 0 for x in w.exponent_sums(2))
        return dehn_reduce(w, self.relator).is_identity()


def standard_relator(genus: int) -> FreeWord:
    letters = []
    for i in range(genus):
        a, b = 2 * i, 2 * i + 1
        letters += [(a, 1), (b, 1), (a, -1), (b, -1)]
    return FreeWord(tuple(letters))


@dataclass(frozen=True)
class _DehnTable:
    length: int
    table: dict


_DEHN_CACHE: dict[FreeWord, _DehnTable] = {}


def _dehn_table(relator: FreeWord) -> _DehnTable:
    cached = _DEHN_CACHE.get(relator)
    if cached is not None:
        return cached
    L = len(relator)
    table = {}
    for r in relator.rotations() + relator.inverse().rotations():
        for k in range(L // 2 + 1, L + 1):
            table.setdefault(r[:k], FreeWord(r[k:]).inverse().letters)
    out = _DehnTable(L, table)
    _DEHN_CACHE[relator] = out
    return out


def dehn_reduce(w: FreeWord, relator: FreeWord) -> FreeWord:
    """Dehn's algorithm: replace any subword that is more than half of a
    cyclic permutation of ``relator^{+-1}`` by the inverse of the rest.

    For a small-cancellation relator (surface genus >= 2) the result is
    empty exactly when ``w`` is trivial in the group.
    """
    dt = _dehn_table(relator)
    letters = list(w.letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(letters)):
            for k in range(min(dt.length, len(letters) - i), dt.length // 2, -1):
                repl = dt.table.get(tuple(letters[i:i + k]))
                if repl is not None:
                    letters = list(_free_reduce(letters[:i] + list(repl) + letters[i + k:]))
                    changed = True
                    break
            if changed:
                break
    return FreeWord(tuple(letters))


def _as_word(w) -> FreeWord:
    return w if isinstance(w, FreeWord) else FreeWord.parse(str(w))


def _substitute(images: Sequence[FreeWord], w: FreeWord) -> FreeWord:
    letters: list[Letter] = []
    for g, s in w.letters:
        if g >= len(images):
            raise DomainError(f"generator index {g} out of range for rank {len(images)}")
        letters.extend(images[g].letters if s > 0 else images[g].inverse().letters)
    return FreeWord(tuple(letters))


_MAX_EQUAL_LENGTH_STATES = 20000


def _nielsen_moves(cur: Sequence[FreeWord]):
    n = len(cur)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for e in (1, -1):
                yield i, j, e, "right", cur[i] * cur[j] ** e
                yield i, j, e, "left", cur[j] ** e * cur[i]


def _apply_move(cur, expr, i, j, e, side):
    cur, expr = list(cur), list(expr)
    if side == "right":
        cur[i], expr[i] = cur[i] * cur[j] ** e, expr[i] * expr[j] ** e
    else:
        cur[i], expr[i] = cur[j] ** e * cur[i], expr[j] ** e * expr[i]
    return tuple(cur), tuple(expr)


def _length_reducing_move(cur):
    best = None
    for i, j, e, side, new in _nielsen_moves(cur):
        delta = len(new) - len(cur[i])
        if delta < 0 and (best is None or delta < best[0]):
            best = (delta, i, j, e, side)
    return best


def free_inverse(images: Sequence[FreeWord]) -> tuple[FreeWord, ...]:
    """Inverse images of a free group automorphism by Nielsen reduction.

    Elementary moves ``w_i -> w_i w_j^{+-1}`` or ``w_j^{+-1} w_i`` are
    applied greedily while they shorten the tuple; plateaus are crossed by
    a bounded breadth-first search over tuples of the same total length.
    Each tuple entry carries the word in the original images it equals, so
    when the tuple reaches single letters the inverse can be read off.
    """
    n = len(images)
    cur = tuple(images)
    expr = tuple(FreeWord.generator(i) for i in range(n))
    if any(w.is_identity() for w in cur):
        raise DomainError("an image is trivial; not an automorphism")
    while any(len(w) > 1 for w in cur):
        mv = _length_reducing_move(cur)
        if mv is not None:
            _, i, j, e, side = mv
            cur, expr = _apply_move(cur, expr, i, j, e, side)
            continue
        total = sum(len(w) for w in cur)
        seen = {cur}
        queue = deque([(cur, expr)])
        found = None
        while queue and found is None:
            c, x = queue.popleft()
            for i, j, e, side, new in _nielsen_moves(c):
                if len(new) - len(c[i]) != 0:
                    continue
                c2, x2 = _apply_move(c, x, i, j, e, side)
                if c2 in seen:
                    continue
                seen.add(c2)
                if _length_reducing_move(c2) is not None:
                    found = (c2, x2)
                    break
                if len(seen) > _MAX_EQUAL_LENGTH_STATES:
                    raise DomainError("images could not be inverted by Nielsen reduction; "
                                      "supply inverse_images or check they form a basis")
                queue.append((c2, x2))
        if found is None:
            raise DomainError(f"images are Nielsen reduced of total length {total} "
                              "but not a basis; not an automorphism")
        cur, expr = found
    inv: list[FreeWord | None] = [None] * n
    for w, x in zip(cur, expr):
        (g, s), = w.letters
        if inv[g] is not None:
            raise DomainError("images do not generate the free group; not an automorphism")
        inv[g] = x ** s
    return tuple(inv)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Automorphism:
    """Automorphism of a free or closed surface group given by generator images.

    Construction verifies that ``inverse_images`` is a two-sided inverse
    (exactly in the free group, by Dehn's algorithm for closed surfaces)
    and, for closed surfaces, that the relator maps to a conjugate of the
    relator or its inverse.  Use :meth:`from_images` to have the inverse
    computed.
    """

    domain: SurfacePresentation
    images: tuple[FreeWord, ...]
    inverse_images: tuple[FreeWord, ...]

    def __post_init__(self):
        rank = self.domain.rank
        images = tuple(_as_word(w) for w in self.images)
        inverse = tuple(_as_word(w) for w in self.inverse_images)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "inverse_images", inverse)
        if len(images) != rank or len(inverse) != rank:
            raise DomainError(f"expected {rank} images and {rank} inverse images")
        for w in images + inverse:
            if w.max_generator() >= rank:
                raise DomainError(f"word {w} uses a generator outside rank {rank}")
        for i in range(rank):
            x = FreeWord.generator(i)
            if not (self.domain.word_equal(_substitute(inverse, images[i]), x)
                    and self.domain.word_equal(_substitute(images, inverse[i]), x)):
                raise DomainError(f"inverse_images do not invert images on generator {x}")
        if self.domain.is_closed:
            rel = self.domain.relator
            img = _substitute(images, rel).cyclic_reduction()
            targets = set(rel.rotations()) | set(rel.inverse().rotations())
            if img.letters not in targets:
                raise DomainError("the image of the relator is not a conjugate of the relator "
                                  "or its inverse")

    @classmethod
    def from_images(cls, domain: SurfacePresentation, images: Sequence,
                    inverse_images: Sequence | None = None) -> Automorphism:
        """Build from image words (strings or :class:`FreeWord`).

        >>> psi = Automorphism.from_images(SurfacePresentation.free(2), ["ab", "b"])
        >>> [str(w) for w in psi.inverse_images]
        ['aB', 'b']
        """
        images = tuple(_as_word(w) for w in images)
        if inverse_images is None:
            if len(images) != domain.rank:
                raise DomainError(f"expected {domain.rank} images, got {len(images)}")
            inverse_images = free_inverse(images)
        return cls(domain, images, tuple(_as_word(w) for w in inverse_images))

    @classmethod
    def identity(cls, domain: SurfacePresentation) -> Automorphism:
        gens = tuple(FreeWord.generator(i) for i in range(domain.rank))
        return cls(domain, gens, gens)

    @classmethod
    def braid_generator(cls, strands: int, i: int) -> Automorphism:
        """Artin generator ``sigma_|i|`` (inverse when ``i < 0``) acting on F_strands.

        ``sigma_i`` sends ``x_i -> x_i x_{i+1} x_i^{-1}`` and ``x_{i+1} -> x_i``
        (generators numbered from 1 here, as for braids).
        """
        k = abs(i)
        if i == 0 or k >= strands:
            raise DomainError(f"braid generator {i} invalid on {strands} strands")
        a, b = k - 1, k
        gens = [FreeWord.generator(j) for j in range(strands)]
        fwd = list(gens)
        back = list(gens)
        xa, xb = gens[a], gens[b]
        fwd[a], fwd[b] = xa * xb * xa.inverse(), xa
        back[a], back[b] = xb, xb.inverse() * xa * xb
        if i < 0:
            fwd, back = back, fwd
        return cls(SurfacePresentation.free(strands), tuple(fwd), tuple(back))

    @classmethod
    def from_braid(cls, strands: int, word: Sequence[int]) -> Automorphism:
        """Braid word as signed generator indices, leftmost letter applied first.

        >>> psi = Automorphism.from_braid(3, [1, -2])
        >>> [str(w) for w in psi.images]
        ['acA', 'a', 'Cbc']
        """
        result = cls.identity(SurfacePresentation.free(strands))
        for i in word:
            result = cls.braid_generator(strands, i).compose(result)
        return result

    @classmethod
    def dehn_twist(cls, genus: int, curve: str, index: int = 0, power: int = 1) -> Automorphism:
        """Twist about the standard curve ``a_index`` or ``b_index`` of a closed
        genus-``genus`` surface: ``T_a: b -> b a`` and ``T_b: a -> a b^{-1}``."""
        domain = SurfacePresentation.closed(genus)
        if not 0 <= index < genus:
            raise DomainError(f"curve index {index} outside genus {genus}")
        gens = [FreeWord.generator(j) for j in range(domain.rank)]
        a, b = gens[2 * index], gens[2 * index + 1]
        fwd, back = list(gens), list(gens)
        if curve == "a":
            fwd[2 * index + 1], back[2 * index + 1] = b * a, b * a.inverse()
        elif curve == "b":
            fwd[2 * index], back[2 * index] = a * b.inverse(), a * b
        else:
            raise DomainError(f"curve must be 'a' or 'b', got {curve!r}")
        twist = cls(domain, tuple(fwd), tuple(back))
        return twist.power(power)

    @classmethod
    def transvection(cls, domain: SurfacePresentation, i: int, j: int,
                     sign: int = 1, side: str = "right") -> Automorphism:
        """Elementary Nielsen move ``x_i -> x_i x_j^sign`` (or ``x_j^sign x_i``)."""
        if domain.is_closed:
            raise DomainError("transvections are free group automorphisms")
        if i == j:
            raise DomainError("transvection needs distinct generators")
        gens = [FreeWord.generator(k) for k in range(domain.rank)]
        fwd, back = list(gens), list(gens)
        xj = gens[j] ** sign
        if side == "right":
            fwd[i], back[i] = gens[i] * xj, gens[i] * xj.inverse()
        else:
            fwd[i], back[i] = xj * gens[i], xj.inverse() * gens[i]
        return cls(domain, tuple(fwd), tuple(back))

    @property
    def rank(self) -> int:
        return self.domain.rank

    def apply(self, w) -> FreeWord:
        """Image of a word.

        >>> Automorphism.from_images(SurfacePresentation.free(2), ["ab", "b"]).apply("aB")
        FreeWord('a')
        """
        return _substitute(self.images, _as_word(w))

    __call__ = apply

    def apply_inverse(self, w) -> FreeWord:
        return _substitute(self.inverse_images, _as_word(w))

    def compose(self, other: Automorphism) -> Automorphism:
        """``self o other``: ``other`` is applied first."""
        if self.domain != other.domain:
            raise DomainError("cannot compose automorphisms of different groups")
        images = tuple(self.apply(w) for w in other.images)
        inverse = tuple(other.apply_inverse(w) for w in self.inverse_images)
        return Automorphism(self.domain, images, inverse)

    def inverse(self) -> Automorphism:
        return Automorphism(self.domain, self.inverse_images, self.images)

    def power(self, k: int) -> Automorphism:
        base = self if k >= 0 else self.inverse()
        result = Automorphism.identity(self.domain)
        for _ in range(abs(k)):
            result = base.compose(result)
        return result

    def abelianization_matrix(self) -> IntMatrix:
        """Induced map on ``H_1 = Z^rank``; column ``j`` is the exponent-sum
        vector of the image of generator ``j``."""
        return IntMatrix.from_columns([w.exponent_sums(self.rank) for w in self.images])


def abelianization_matrix(a: Automorphism) -> IntMatrix:
    return a.abelianization_matrix()


def apply(a: Automorphism, w) -> FreeWord:
    return a.apply(w)


def compose(a: Automorphism, b: Automorphism) -> Automorphism:
    """``a o b``; ``b`` acts first."""
    return a.compose(b)
