"""
Berezin differentiation and integration.

Derivatives act from the left: the target generator is anticommuted to the
front of each monomial and removed.  Integration is the same linear map, so
``∫dy 1 = 0`` and ``∫dy y = 1``.  A pair measure ``d²y_i`` is written
``dy*_i dy_i``; the innermost differential ``dy_i`` acts first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from fermicoh.grassmann import GeneratorId, GrassmannElement

__all__ = [
    "IntegrationMeasure",
    "left_derivative",
    "integrate",
    "integrate_pair",
    "integrate_all",
]


def left_derivative(a: GrassmannElement, g: GeneratorId) -> GrassmannElement:
    r = g.rank
    bit = 1 << r
    below = bit - 1
    out: dict[int, complex] = {}
    for m, c in a._terms.items():
        if m & bit:
            # generators in front of g, each passed once
            sign = -1 if (m & below).bit_count() & 1 else 1
            key = m ^ bit
            out[key] = out.get(key, 0) + sign * c
    return GrassmannElement._raw(a.n, out)


def integrate(a: GrassmannElement, g: GeneratorId) -> GrassmannElement:
    """Berezin integral ``∫dg a``; coincides with :func:`left_derivative`."""
    return left_derivative(a, g)


def integrate_pair(a: GrassmannElement, mode: int) -> GrassmannElement:
    """``∫d²y_mode a = ∫dy*_mode dy_mode a``."""
    inner = integrate(a, GeneratorId(mode, False))
    return integrate(inner, GeneratorId(mode, True))


def integrate_all(a: GrassmannElement) -> complex:
    """Integrate over every pair of the algebra, ascending mode order; returns a number."""
    out = a
    for mode in range(a.n):
        out = integrate_pair(out, mode)
    # every generator has been integrated out, so only a scalar can remain
    assert out.is_scalar(), f"non-scalar residue after full integration: {out}"
    return out.scalar_part


@dataclass(frozen=True)
class IntegrationMeasure:
    """
    Written product ``dy*_{p0} dy_{p0} dy*_{p1} dy_{p1} ...`` over ``pairs``.

    ``differentials()`` lists the generators left to right as written;
    :meth:`apply` lets the rightmost differential act first.
    """

    pairs: tuple[int, ...]

    def __init__(self, pairs: Sequence[int]):
        object.__setattr__(self, "pairs", tuple(pairs))

    def differentials(self) -> list[GeneratorId]:
        out = []
        for p in self.pairs:
            out.append(GeneratorId(p, True))
            out.append(GeneratorId(p, False))
        return out

    def apply(self, a: GrassmannElement) -> GrassmannElement:
        out = a
        for g in reversed(self.differentials()):
            out = integrate(out, g)
        return out
