"""
Sparse complex Grassmann algebra.

An algebra with ``n`` generator pairs has the 2n anticommuting generators
``y_0, y*_0, y_1, y*_1, ...``.  Generator ``y_i`` has rank ``2i`` and
``y*_i`` has rank ``2i + 1``.  A monomial is a bitmask over ranks and is
always understood with its generators written in increasing rank order, so
the monomial for mask ``0b0011`` is ``y_0 y*_0``.

Text form uses one-based indices (``y1 y1*``) to match the usual notation.
"""

from __future__ import annotations

import cmath
import enum
import math
import sys
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence, Union

from fermicoh.errors import ConfigurationError, SubstitutionError, UsageError

ZERO_THRESHOLD = 1e-12

Number = Union[int, float, complex]


# ---------------------------------------------------------------------------
# Generators and sign bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class GeneratorId:
    """One generator: ``y_i`` (``conjugated=False``) or ``y*_i``."""

    mode_index: int
    conjugated: bool = False

    @property
    def rank(self) -> int:
        return 2 * self.mode_index + int(self.conjugated)

    @classmethod
    def from_rank(cls, rank: int) -> GeneratorId:
        return cls(rank >> 1, bool(rank & 1))

    def dual(self) -> GeneratorId:
        return GeneratorId(self.mode_index, not self.conjugated)

    def __str__(self) -> str:
        return f"y{self.mode_index + 1}{'*' if self.conjugated else ''}"


def mask_ranks(mask: int) -> list[int]:
    """Ranks of the set bits of ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _merge_count(seq: list[int]) -> tuple[list[int], int]:
    if len(seq) <= 1:
        return seq, 0
    mid = len(seq) // 2
    left, nl = _merge_count(seq[:mid])
    right, nr = _merge_count(seq[mid:])
    merged = []
    count = nl + nr
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            # right[j] jumps over every remaining element of left
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def sort_sign(ranks: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """
    Sort a product of generators into canonical order.

    Returns ``(sign, sorted_ranks)`` where ``sign`` is the parity of the
    number of transpositions performed.  A repeated generator makes the
    product vanish and ``(0, ())`` is returned.
    """
    merged, count = _merge_count(list(ranks))
    for a, b in zip(merged, merged[1:]):
        if a == b:
            return 0, ()
    return (-1 if count & 1 else 1), tuple(merged)


@lru_cache(maxsize=1 << 20)
def merge_sign(left: int, right: int) -> int:
    """Sign of ``m_left * m_right`` brought to canonical order; 0 on collision.

    Both factors are already sorted, so only the final merge step of a merge
    sort is needed: each generator of the right factor passes every generator
    of the left factor with a higher rank.
    """
    if left & right:
        return 0
    count = 0
    while right:
        low = right & -right
        count += (left & ~((low << 1) - 1)).bit_count()
        right ^= low
    return -1 if count & 1 else 1


def ranks_to_mask(ranks: Iterable[int]) -> int:
    mask = 0
    for r in ranks:
        mask |= 1 << r
    return mask


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


def _clean(c: complex) -> complex:
    # +0.0 normalises negative zeros so that rendering is deterministic
    return complex(c.real + 0.0, c.imag + 0.0)


def _prune(terms: Mapping[int, complex]) -> dict[int, complex]:
    return {m: _clean(c) for m, c in terms.items() if abs(c) >= ZERO_THRESHOLD}


def _mul_terms(a: Mapping[int, complex], b: Mapping[int, complex],
               acc: dict[int, complex] | None = None) -> dict[int, complex]:
    out = {} if acc is None else acc
    for ma, ca in a.items():
        for mb, cb in b.items():
            s = merge_sign(ma, mb)
            if s:
                key = ma | mb
                out[key] = out.get(key, 0) + s * ca * cb
    return out


class GrassmannElement:
    """
    Immutable sparse linear combination of monomials.

    Supports ``+``, ``-``, ``*`` (with elements and plain numbers) and ``/``
    by plain numbers.  Equality is coefficientwise within
    :data:`ZERO_THRESHOLD`.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[int, Number] | None = None):
        if n < 0:
            raise ConfigurationError(f"number of generator pairs must be >= 0, got {n}")
        self.n = n
        self._terms = _prune({int(m): complex(c) for m, c in (terms or {}).items()})
        limit = 1 << (2 * n)
        for m in self._terms:
            if m < 0 or m >= limit:
                raise ConfigurationError(f"monomial mask {m:#x} outside algebra with {n} pairs")

    @classmethod
    def _raw(cls, n: int, terms: dict[int, complex]) -> GrassmannElement:
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = _prune(terms)
        return obj

    # -- inspection -----------------------------------------------------------

    @property
    def terms(self) -> dict[int, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[int, complex]]:
        return iter(sorted(self._terms.items()))

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, mask: int) -> complex:
        return self._terms.get(mask, 0j)

    @property
    def scalar_part(self) -> complex:
        return self._terms.get(0, 0j)

    def is_zero(self) -> bool:
        return not self._terms

    def is_scalar(self) -> bool:
        return all(m == 0 for m in self._terms)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def parity(self) -> Parity:
        return parity(self)

    def even_part(self) -> GrassmannElement:
        return GrassmannElement._raw(self.n, {m: c for m, c in self._terms.items() if not m.bit_count() & 1})

    def odd_part(self) -> GrassmannElement:
        return GrassmannElement._raw(self.n, {m: c for m, c in self._terms.items() if m.bit_count() & 1})

    def twist(self) -> GrassmannElement:
        """Grade involution: even part minus odd part."""
        return GrassmannElement._raw(
            self.n, {m: (-c if m.bit_count() & 1 else c) for m, c in self._terms.items()})

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> GrassmannElement | None:
        if isinstance(other, GrassmannElement):
            if other.n != self.n:
                raise UsageError(
                    f"elements belong to different algebras ({self.n} vs {other.n} pairs)")
            return other
        if isinstance(other, (int, float, complex)):
            return GrassmannElement._raw(self.n, {0: complex(other)})
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self._terms)
        for m, c in o._terms.items():
            out[m] = out.get(m, 0) + c
        return GrassmannElement._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement._raw(self.n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return GrassmannElement._raw(self.n, {m: c * other for m, c in self._terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return multiply(self, o)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * (1 / other)
        return NotImplemented

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except UsageError:
            return False
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def conjugate(self) -> GrassmannElement:
        return conjugate(self)

    def exp(self) -> GrassmannElement:
        return exp(self)

    # -- text -----------------------------------------------------------------

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"GrassmannElement(n={self.n}, '{render(self)}')"

    @classmethod
    def parse(cls, text: str, n: int) -> GrassmannElement:
        return parse(text, n)


# ---------------------------------------------------------------------------
# Algebra factory
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrassmannAlgebra:
    """Factory for elements over ``n`` generator pairs."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ConfigurationError(f"number of generator pairs must be >= 0, got {self.n}")

    def zero(self) -> GrassmannElement:
        return GrassmannElement(self.n)

    def one(self) -> GrassmannElement:
        return GrassmannElement(self.n, {0: 1})

    def scalar(self, c: Number) -> GrassmannElement:
        return GrassmannElement(self.n, {0: c})

    def generator(self, gid: GeneratorId) -> GrassmannElement:
        return generator(gid, self.n)

    def y(self, i: int) -> GrassmannElement:
        return generator(GeneratorId(i, False), self.n)

    def ystar(self, i: int) -> GrassmannElement:
        return generator(GeneratorId(i, True), self.n)

    def monomial(self, gens: Sequence[GeneratorId], coefficient: Number = 1) -> GrassmannElement:
        """Product of ``gens`` written in the given order."""
        sign, ranks = sort_sign([g.rank for g in gens])
        for g in gens:
            if g.mode_index >= self.n:
                raise ConfigurationError(f"generator {g} outside algebra with {self.n} pairs")
        if sign == 0:
            return self.zero()
        return GrassmannElement(self.n, {ranks_to_mask(ranks): sign * coefficient})

    def bilinear(self, i: int) -> GrassmannElement:
        """The even element ``y*_i y_i``."""
        return self.monomial([GeneratorId(i, True), GeneratorId(i, False)])

    def generators(self) -> list[GeneratorId]:
        return [GeneratorId.from_rank(r) for r in range(2 * self.n)]


def generator(gid: GeneratorId, n: int) -> GrassmannElement:
    if not 0 <= gid.mode_index < n:
        raise ConfigurationError(f"mode index {gid.mode_index} out of range for {n} pairs")
    return GrassmannElement._raw(n, {1 << gid.rank: 1 + 0j})


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    if a.n != b.n:
        raise UsageError(f"elements belong to different algebras ({a.n} vs {b.n} pairs)")
    return GrassmannElement._raw(a.n, _mul_terms(a._terms, b._terms))


def _conjugate_mask(mask: int) -> tuple[int, int]:
    # y <-> y* flips the low rank bit; hermitian conjugation reverses the order
    flipped = [r ^ 1 for r in reversed(mask_ranks(mask))]
    sign, ranks = sort_sign(flipped)
    return sign, ranks_to_mask(ranks)


def conjugate(a: GrassmannElement) -> GrassmannElement:
    """Hermitian conjugate: reverse order, swap ``y <-> y*``, conjugate coefficients."""
    out: dict[int, complex] = {}
    for m, c in a._terms.items():
        sign, cm = _conjugate_mask(m)
        out[cm] = out.get(cm, 0) + sign * c.conjugate()
    return GrassmannElement._raw(a.n, out)


def exp(a: GrassmannElement) -> GrassmannElement:
    """Exponential of a nilpotent element; the series stops at the first vanishing power."""
    if abs(a.scalar_part) >= ZERO_THRESHOLD:
        raise UsageError(
            "exp() needs a nilpotent argument; factor out the scalar part "
            f"{a.scalar_part} as an ordinary exponential")
    result = {0: 1 + 0j}
    power = {0: 1 + 0j}
    k = 0
    while True:
        k += 1
        power = _prune(_mul_terms(power, a._terms))
        if not power:
            break
        fact = math.factorial(k)
        for m, c in power.items():
            result[m] = result.get(m, 0) + c / fact
    return GrassmannElement._raw(a.n, result)


def parity(a: GrassmannElement) -> Parity:
    odd = {m.bit_count() & 1 for m in a._terms}
    if odd == {1}:
        return Parity.ODD
    if len(odd) == 2:
        return Parity.MIXED
    return Parity.EVEN


_PLAIN_BITS = int("01" * 256, 2)


def _paired(mask: int) -> bool:
    return mask & _PLAIN_BITS == (mask >> 1) & _PLAIN_BITS


def substitute_bilinears(a: GrassmannElement, occupancy: Mapping[int, float]) -> complex:
    """
    Replace every pair ``y*_k y_k`` by the number ``occupancy[k]``.

    Monomials are stored as ``y_k y*_k = -y*_k y_k``, so a monomial made of
    ``p`` complete pairs carries the extra sign ``(-1)**p``.  Any monomial
    with an unpaired generator raises :class:`SubstitutionError`.
    """
    total = 0j
    for m, c in a._terms.items():
        if not _paired(m):
            gens = " ".join(str(GeneratorId.from_rank(r)) for r in mask_ranks(m))
            raise SubstitutionError(f"monomial '{gens}' is not a product of y*_k y_k pairs")
        value = c
        modes = [r >> 1 for r in mask_ranks(m) if not r & 1]
        for k in modes:
            if k not in occupancy:
                raise SubstitutionError(f"no occupancy given for mode {k}")
            value *= -occupancy[k]
        total += value
    return total


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------


def _fmt_coeff(c: complex) -> str:
    c = _clean(c)
    return f"({c.real!r}{c.imag:+}j)"


def render(a: GrassmannElement) -> str:
    """Canonical text, e.g. ``(1.0+0.0j) + (-0.5+0.0j) · y1 y1*``; terms sorted by mask."""
    if a.is_zero():
        return "0"
    parts = []
    for m, c in a.items():
        if m == 0:
            parts.append(_fmt_coeff(c))
        else:
            gens = " ".join(str(GeneratorId.from_rank(r)) for r in mask_ranks(m))
            parts.append(f"{_fmt_coeff(c)} · {gens}")
    return " + ".join(parts)


def _parse_generator(tok: str) -> GeneratorId:
    if not tok.startswith("y"):
        raise ValueError(f"bad generator token {tok!r}")
    conj = tok.endswith("*")
    idx = int(tok[1:-1] if conj else tok[1:])
    if idx < 1:
        raise ValueError(f"generator indices start at 1, got {tok!r}")
    return GeneratorId(idx - 1, conj)


def parse(text: str, n: int) -> GrassmannElement:
    """Inverse of :func:`render`.  Generators may appear in any order."""
    text = text.strip()
    alg = GrassmannAlgebra(n)
    if text == "0":
        return alg.zero()
    out = alg.zero()
    for part in text.split(" + "):
        coeff_txt, _, gens_txt = part.partition(" · ")
        coeff = complex(coeff_txt.strip())
        gens = [_parse_generator(t) for t in gens_txt.split()]
        out = out + alg.monomial(gens, coeff)
    return out


def phase_factor(theta: float) -> complex:
    """``e^{i theta}`` with exact values on multiples of pi/2."""
    q = theta / (math.pi / 2)
    r = round(q)
    # snap only floating-point multiples of pi/2, not genuinely small offsets
    if abs(q - r) <= 4 * sys.float_info.epsilon * max(1, abs(r)):
        return (1 + 0j, 1j, -1 + 0j, -1j)[r % 4]
    return cmath.exp(1j * theta)
