"""
Finite fermionic Fock space with Grassmann-valued amplitudes.

Basis states ``|s>`` are indexed by an occupation bitmask with mode 0 as
the least significant bit.  Mode operators use the Jordan-Wigner sign
``a_k |s> = (-1)**popcount(s & (2**k - 1)) |s - e_k>``.

Amplitudes are Grassmann elements kept to the *left* of kets and of each
``|i><j|``.  A ket ``|i>`` has grade ``popcount(i) % 2`` and ``|i><j|``
has grade ``(popcount(i) + popcount(j)) % 2``.  Moving a Grassmann element
across an odd-graded object flips the sign of its odd part (see
:meth:`GrassmannElement.twist`), which makes Grassmann numbers anticommute
with ``a_k`` and ``a_k^dagger`` without any extra bookkeeping.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterator, Mapping, Sequence, Union

import numpy as np

from fermicoh.berezin import integrate_pair
from fermicoh.errors import ConfigurationError, DomainError, NotApplicableError, UsageError, VerificationError
from fermicoh.grassmann import (
    GrassmannAlgebra,
    GrassmannElement,
    _mul_terms,
    _prune,
    exp,
    phase_factor,
    substitute_bilinears,
)

DEFAULT_MODE_CAP = 6

Scalar = Union[int, float, complex]


def _grade(i: int, j: int = 0) -> int:
    return (i.bit_count() + j.bit_count()) & 1


def _twisted_terms(x: GrassmannElement, grade: int) -> dict[int, complex]:
    if not grade:
        return x._terms
    return {m: (-c if m.bit_count() & 1 else c) for m, c in x._terms.items()}


# ---------------------------------------------------------------------------
# Modes and labels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeSystem:
    """``n_modes`` fermionic modes with optional momentum labels."""

    n_modes: int
    labels: tuple[Hashable, ...] = ()
    cap: int = DEFAULT_MODE_CAP

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigurationError(f"need at least one mode, got {self.n_modes}")
        if self.n_modes > self.cap:
            raise ConfigurationError(f"{self.n_modes} modes exceeds the cap of {self.cap}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.n_modes)))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != self.n_modes:
            raise ConfigurationError("one label per mode required")
        if len(set(self.labels)) != self.n_modes:
            raise ConfigurationError(f"duplicate mode labels {self.labels}")

    @property
    def dim(self) -> int:
        return 1 << self.n_modes

    def index(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ConfigurationError(f"no mode labelled {label!r}") from None


@dataclass(frozen=True)
class CoherentLabel:
    """
    Grassmann label of a coherent state.

    ``pairs[k]`` is the generator pair of the ambient algebra carried by mode
    ``k`` (``None`` for a zero amplitude).  The global phase multiplies every
    ``y`` by ``e^{i phase}`` and every ``y*`` by ``e^{-i phase}``.
    """

    pairs: tuple[int | None, ...]
    phase: float = 0.0

    def __init__(self, pairs: Sequence[int | None], phase: float = 0.0):
        object.__setattr__(self, "pairs", tuple(pairs))
        object.__setattr__(self, "phase", float(phase))

    @classmethod
    def standard(cls, n_modes: int, offset: int = 0, phase: float = 0.0) -> CoherentLabel:
        return cls(range(offset, offset + n_modes), phase)

    @classmethod
    def zero(cls, n_modes: int) -> CoherentLabel:
        return cls([None] * n_modes)

    def rotated(self, theta: float) -> CoherentLabel:
        return CoherentLabel(self.pairs, self.phase + theta)

    def used_pairs(self) -> set[int]:
        return {p for p in self.pairs if p is not None}


# ---------------------------------------------------------------------------
# Vectors and operators
# ---------------------------------------------------------------------------


class FockVector:
    """Ket ``sum_i psi_i |i>`` with Grassmann amplitudes stored sparsely."""

    __slots__ = ("dim", "n", "_entries")

    def __init__(self, dim: int, n: int, entries: Mapping[int, GrassmannElement] | None = None):
        self.dim = dim
        self.n = n
        self._entries = {}
        for i, x in (entries or {}).items():
            if not 0 <= i < dim:
                raise ConfigurationError(f"basis index {i} out of range for dimension {dim}")
            if x.n != n:
                raise UsageError("amplitude belongs to a different algebra")
            if not x.is_zero():
                self._entries[i] = x

    @classmethod
    def _from_terms(cls, dim: int, n: int, raw: Mapping[int, dict[int, complex]]) -> FockVector:
        obj = cls.__new__(cls)
        obj.dim, obj.n = dim, n
        obj._entries = {}
        for i, t in raw.items():
            x = GrassmannElement._raw(n, t)
            if not x.is_zero():
                obj._entries[i] = x
        return obj

    @classmethod
    def basis(cls, dim: int, n: int, index: int, amplitude: Scalar = 1) -> FockVector:
        return cls(dim, n, {index: GrassmannElement(n, {0: amplitude})})

    @classmethod
    def from_array(cls, amplitudes: Sequence[Scalar], n: int = 0) -> FockVector:
        return cls(len(amplitudes), n,
                   {i: GrassmannElement(n, {0: c}) for i, c in enumerate(amplitudes)})

    def __getitem__(self, i: int) -> GrassmannElement:
        return self._entries.get(i, GrassmannElement(self.n))

    def items(self) -> Iterator[tuple[int, GrassmannElement]]:
        return iter(sorted(self._entries.items()))

    def _check(self, other: FockVector):
        if self.dim != other.dim or self.n != other.n:
            raise UsageError("vectors live in different spaces")

    def __add__(self, other: FockVector) -> FockVector:
        self._check(other)
        out = dict(self._entries)
        for i, x in other._entries.items():
            out[i] = out[i] + x if i in out else x
        return FockVector(self.dim, self.n, out)

    def __neg__(self) -> FockVector:
        return FockVector(self.dim, self.n, {i: -x for i, x in self._entries.items()})

    def __sub__(self, other: FockVector) -> FockVector:
        return self + (-other)

    def __rmul__(self, g):
        """``g * psi``: amplitude multiplied from the left."""
        if isinstance(g, (int, float, complex)):
            return FockVector(self.dim, self.n, {i: x * g for i, x in self._entries.items()})
        if isinstance(g, GrassmannElement):
            return FockVector(self.dim, self.n, {i: g * x for i, x in self._entries.items()})
        return NotImplemented

    def __mul__(self, g):
        """``psi * g``: g passes each ket, picking up the grade sign."""
        if isinstance(g, (int, float, complex)):
            return g * self
        if isinstance(g, GrassmannElement):
            return FockVector(self.dim, self.n,
                              {i: x * (g.twist() if _grade(i) else g) for i, x in self._entries.items()})
        return NotImplemented

    def max_residual(self, other: FockVector) -> float:
        diff = self - other
        return max((x.max_abs() for x in diff._entries.values()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, FockVector):
            return NotImplemented
        return self.dim == other.dim and self.n == other.n and not (self - other)._entries

    __hash__ = None  # type: ignore[assignment]

    def is_scalar(self) -> bool:
        return all(x.is_scalar() for x in self._entries.values())

    def to_array(self) -> np.ndarray:
        if not self.is_scalar():
            raise NotApplicableError("vector has Grassmann-valued amplitudes")
        out = np.zeros(self.dim, dtype=complex)
        for i, x in self._entries.items():
            out[i] = x.scalar_part
        return out

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {x}" for i, x in self.items())
        return f"FockVector(dim={self.dim}, {{{body}}})"


class FockOperator:
    """Operator ``sum_ij C_ij |i><j|`` with Grassmann entries written on the left."""

    __slots__ = ("dim", "n", "_entries")

    def __init__(self, dim: int, n: int, entries: Mapping[tuple[int, int], GrassmannElement] | None = None):
        self.dim = dim
        self.n = n
        self._entries = {}
        for (i, j), x in (entries or {}).items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise ConfigurationError(f"entry ({i}, {j}) out of range for dimension {dim}")
            if x.n != n:
                raise UsageError("entry belongs to a different algebra")
            if not x.is_zero():
                self._entries[(i, j)] = x

    @classmethod
    def _from_terms(cls, dim: int, n: int, raw: Mapping[tuple[int, int], dict[int, complex]]) -> FockOperator:
        obj = cls.__new__(cls)
        obj.dim, obj.n = dim, n
        obj._entries = {}
        for ij, t in raw.items():
            x = GrassmannElement._raw(n, t)
            if not x.is_zero():
                obj._entries[ij] = x
        return obj

    @classmethod
    def identity(cls, dim: int, n: int) -> FockOperator:
        one = GrassmannElement(n, {0: 1})
        return cls(dim, n, {(i, i): one for i in range(dim)})

    @classmethod
    def zero(cls, dim: int, n: int) -> FockOperator:
        return cls(dim, n)

    @classmethod
    def from_array(cls, matrix, n: int = 0) -> FockOperator:
        m = np.asarray(matrix)
        dim = m.shape[0]
        return cls(dim, n, {(i, j): GrassmannElement(n, {0: complex(m[i, j])})
                            for i in range(dim) for j in range(dim) if m[i, j] != 0})

    def __getitem__(self, ij: tuple[int, int]) -> GrassmannElement:
        return self._entries.get(ij, GrassmannElement(self.n))

    def items(self) -> Iterator[tuple[tuple[int, int], GrassmannElement]]:
        return iter(sorted(self._entries.items()))

    def _check(self, other):
        if self.dim != other.dim or self.n != other.n:
            raise UsageError("operands live in different spaces")

    # -- linear structure -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex, GrassmannElement)):
            other = other * FockOperator.identity(self.dim, self.n)
        if not isinstance(other, FockOperator):
            return NotImplemented
        self._check(other)
        out = dict(self._entries)
        for ij, x in other._entries.items():
            out[ij] = out[ij] + x if ij in out else x
        return FockOperator(self.dim, self.n, out)

    __radd__ = __add__

    def __neg__(self) -> FockOperator:
        return FockOperator(self.dim, self.n, {ij: -x for ij, x in self._entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __rmul__(self, g):
        """``g * C``: coefficient from the left, no sign."""
        if isinstance(g, (int, float, complex)):
            return FockOperator(self.dim, self.n, {ij: x * g for ij, x in self._entries.items()})
        if isinstance(g, GrassmannElement):
            return FockOperator(self.dim, self.n, {ij: g * x for ij, x in self._entries.items()})
        return NotImplemented

    def __mul__(self, g):
        """``C * g``: g moves left across each ``|i><j|``."""
        if isinstance(g, (int, float, complex)):
            return g * self
        if isinstance(g, GrassmannElement):
            tw = g.twist()
            return FockOperator(self.dim, self.n,
                                {(i, j): x * (tw if _grade(i, j) else g) for (i, j), x in self._entries.items()})
        return NotImplemented

    # -- composition ------------------------------------------------------------

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            self._check(other)
            rows: dict[int, list[tuple[int, GrassmannElement]]] = {}
            for (j, l), x in other._entries.items():
                rows.setdefault(j, []).append((l, x))
            acc: dict[tuple[int, int], dict[int, complex]] = {}
            for (i, j), c in self._entries.items():
                for l, d in rows.get(j, ()):
                    target = acc.setdefault((i, l), {})
                    _mul_terms(c._terms, _twisted_terms(d, _grade(i, j)), target)
            return FockOperator._from_terms(self.dim, self.n, acc)
        if isinstance(other, FockVector):
            if self.dim != other.dim or self.n != other.n:
                raise UsageError("operator and vector live in different spaces")
            acc_v: dict[int, dict[int, complex]] = {}
            for (i, j), c in self._entries.items():
                psi = other._entries.get(j)
                if psi is not None:
                    _mul_terms(c._terms, _twisted_terms(psi, _grade(i, j)), acc_v.setdefault(i, {}))
            return FockVector._from_terms(self.dim, self.n, acc_v)
        return NotImplemented

    def adjoint(self) -> FockOperator:
        """``(c |i><j|)^dagger = |j><i| c^dagger``, then c^dagger moved back to the left."""
        out = {}
        for (i, j), x in self._entries.items():
            xc = x.conjugate()
            out[(j, i)] = xc.twist() if _grade(i, j) else xc
        return FockOperator(self.dim, self.n, out)

    @property
    def dag(self) -> FockOperator:
        return self.adjoint()

    # -- comparison -------------------------------------------------------------

    def max_residual(self, other) -> float:
        diff = self - other
        return max((x.max_abs() for x in diff._entries.values()), default=0.0)

    def __eq__(self, other):
        if isinstance(other, (int, float, complex, GrassmannElement)):
            return not (self - other)._entries
        if not isinstance(other, FockOperator):
            return NotImplemented
        return self.dim == other.dim and self.n == other.n and not (self - other)._entries

    __hash__ = None  # type: ignore[assignment]

    def is_scalar(self) -> bool:
        return all(x.is_scalar() for x in self._entries.values())

    def to_array(self) -> np.ndarray:
        if not self.is_scalar():
            raise NotApplicableError("operator has Grassmann-valued entries")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for (i, j), x in self._entries.items():
            out[i, j] = x.scalar_part
        return out

    def map_entries(self, f: Callable[[GrassmannElement], GrassmannElement]) -> FockOperator:
        return FockOperator(self.dim, self.n, {ij: f(x) for ij, x in self._entries.items()})

    def __repr__(self) -> str:
        return f"FockOperator(dim={self.dim}, nnz={len(self._entries)})"


def anticommutator(a: FockOperator, b: FockOperator) -> FockOperator:
    return a @ b + b @ a


def commutator(a: FockOperator, b: FockOperator) -> FockOperator:
    return a @ b - b @ a


def operator_exp(x: FockOperator, max_terms: int = 64) -> FockOperator:
    """Power series of an operator whose powers eventually vanish."""
    out = FockOperator.identity(x.dim, x.n)
    power = out
    for k in range(1, max_terms + 1):
        power = (power @ x) * (1.0 / k)
        if not power._entries:
            return out
        out = out + power
    raise DomainError("operator exponential series did not terminate")


def inner(bra: FockVector, ket: FockVector) -> GrassmannElement:
    """``<bra|ket> = sum_i <i| conj(bra_i) ket_i |i>``."""
    if bra.dim != ket.dim or bra.n != ket.n:
        raise UsageError("vectors live in different spaces")
    acc: dict[int, complex] = {}
    for i, b in bra._entries.items():
        k = ket._entries.get(i)
        if k is None:
            continue
        prod = _mul_terms(b.conjugate()._terms, k._terms)
        if _grade(i):
            # <i| is odd: the amplitude product crosses it on the way out
            prod = {m: (-c if m.bit_count() & 1 else c) for m, c in prod.items()}
        for m, c in prod.items():
            acc[m] = acc.get(m, 0) + c
    return GrassmannElement._raw(ket.n, acc)


def outer(ket: FockVector, bra: FockVector) -> FockOperator:
    """``|ket><bra|`` brought to left-coefficient form."""
    if bra.dim != ket.dim or bra.n != ket.n:
        raise UsageError("vectors live in different spaces")
    acc = {}
    for i, k in ket._entries.items():
        for j, b in bra._entries.items():
            acc[(i, j)] = _mul_terms(k._terms, _twisted_terms(b.conjugate(), _grade(i, j)))
    return FockOperator._from_terms(ket.dim, ket.n, acc)


# ---------------------------------------------------------------------------
# Space
# ---------------------------------------------------------------------------


class FockSpace:
    """
    Fock space of ``modes`` paired with a Grassmann algebra of ``n_pairs``
    generator pairs (defaults to one pair per mode).
    """

    def __init__(self, modes: ModeSystem | int, n_pairs: int | None = None):
        if isinstance(modes, int):
            modes = ModeSystem(modes)
        self.modes = modes
        self.algebra = GrassmannAlgebra(modes.n_modes if n_pairs is None else n_pairs)
        self.n = self.algebra.n
        self.dim = modes.dim
        self._cache: dict[tuple, FockOperator] = {}

    @property
    def n_modes(self) -> int:
        return self.modes.n_modes

    def _mode(self, k: int) -> int:
        if not 0 <= k < self.n_modes:
            raise ConfigurationError(f"mode {k} out of range for {self.n_modes} modes")
        return k

    # -- basic operators ----------------------------------------------------------

    def identity(self) -> FockOperator:
        return FockOperator.identity(self.dim, self.n)

    def vacuum(self) -> FockVector:
        return FockVector.basis(self.dim, self.n, 0)

    def basis(self, index: int) -> FockVector:
        return FockVector.basis(self.dim, self.n, index)

    def annihilation(self, k: int) -> FockOperator:
        k = self._mode(k)
        key = ("a", k)
        if key not in self._cache:
            bit = 1 << k
            entries = {}
            for s in range(self.dim):
                if s & bit:
                    sign = -1 if (s & (bit - 1)).bit_count() & 1 else 1
                    entries[(s ^ bit, s)] = GrassmannElement(self.n, {0: sign})
            self._cache[key] = FockOperator(self.dim, self.n, entries)
        return self._cache[key]

    def creation(self, k: int) -> FockOperator:
        key = ("adag", k)
        if key not in self._cache:
            self._cache[key] = self.annihilation(k).adjoint()
        return self._cache[key]

    def number(self, k: int | None = None) -> FockOperator:
        """Number operator of mode ``k``, or the total number operator."""
        modes = range(self.n_modes) if k is None else [self._mode(k)]
        entries = {}
        for s in range(self.dim):
            count = sum((s >> m) & 1 for m in modes)
            if count:
                entries[(s, s)] = GrassmannElement(self.n, {0: count})
        return FockOperator(self.dim, self.n, entries)

    def u1_operator(self, theta: float) -> FockOperator:
        """``exp(i theta N)`` as a diagonal operator."""
        return FockOperator(self.dim, self.n, {
            (s, s): GrassmannElement(self.n, {0: phase_factor(theta * s.bit_count())})
            for s in range(self.dim)})

    # -- coherent states ----------------------------------------------------------

    def _check_label(self, label: CoherentLabel):
        if len(label.pairs) != self.n_modes:
            raise UsageError(f"label has {len(label.pairs)} entries for {self.n_modes} modes")
        for p in label.used_pairs():
            if not 0 <= p < self.n:
                raise ConfigurationError(f"generator pair {p} outside algebra with {self.n} pairs")

    def eigenvalue(self, label: CoherentLabel, k: int) -> GrassmannElement:
        """``e^{i phase} y_{pair(k)}``, the eigenvalue of ``a_k``."""
        p = label.pairs[self._mode(k)]
        if p is None:
            return self.algebra.zero()
        return self.algebra.y(p) * phase_factor(label.phase)

    def conj_eigenvalue(self, label: CoherentLabel, k: int) -> GrassmannElement:
        p = label.pairs[self._mode(k)]
        if p is None:
            return self.algebra.zero()
        return self.algebra.ystar(p) * phase_factor(-label.phase)

    def displacement_factor(self, label: CoherentLabel, k: int) -> FockOperator:
        """``1 + a_k^dagger y_k - y*_k a_k + (a_k^dagger a_k - 1/2) y*_k y_k``."""
        y = self.eigenvalue(label, k)
        ys = self.conj_eigenvalue(label, k)
        a, ad = self.annihilation(k), self.creation(k)
        half = 0.5 * self.identity()
        return (self.identity() + ad * y - ys * a + (self.number(k) - half) * (ys * y))

    def displacement(self, label: CoherentLabel) -> FockOperator:
        """Product over modes of the single-mode factors (they commute)."""
        self._check_label(label)
        out = self.identity()
        for k in range(self.n_modes):
            out = out @ self.displacement_factor(label, k)
        return out

    def displacement_generator(self, label: CoherentLabel) -> FockOperator:
        """``sum_k a_k^dagger y_k - y*_k a_k``."""
        self._check_label(label)
        out = FockOperator.zero(self.dim, self.n)
        for k in range(self.n_modes):
            out = out + self.creation(k) * self.eigenvalue(label, k) \
                - self.conj_eigenvalue(label, k) * self.annihilation(k)
        return out

    def coherent_state(self, label: CoherentLabel) -> FockVector:
        return self.displacement(label) @ self.vacuum()

    def overlap_formula(self, bra: CoherentLabel, ket: CoherentLabel) -> GrassmannElement:
        """``exp(sum_i y'*_i y_i - (y'*_i y'_i + y*_i y_i) / 2)``."""
        self._check_disjoint(bra, ket)
        arg = self.algebra.zero()
        for k in range(self.n_modes):
            yb, ybs = self.eigenvalue(bra, k), self.conj_eigenvalue(bra, k)
            yk, yks = self.eigenvalue(ket, k), self.conj_eigenvalue(ket, k)
            arg = arg + ybs * yk - 0.5 * (ybs * yb + yks * yk)
        return exp(arg)

    def overlap_matrix(self, bra: CoherentLabel, ket: CoherentLabel) -> GrassmannElement:
        return inner(self.coherent_state(bra), self.coherent_state(ket))

    def overlap(self, bra: CoherentLabel, ket: CoherentLabel) -> GrassmannElement:
        """Closed-form overlap, cross-checked against the state vectors."""
        closed = self.overlap_formula(bra, ket)
        direct = self.overlap_matrix(bra, ket)
        if closed != direct:
            raise VerificationError(
                f"overlap mismatch, residual {(closed - direct).max_abs():.3e}")
        return closed

    def _check_disjoint(self, a: CoherentLabel, b: CoherentLabel):
        self._check_label(a)
        self._check_label(b)
        if a.pairs == b.pairs:
            return  # same label twice is allowed: <y|y>
        if a.used_pairs() & b.used_pairs():
            raise UsageError("labels share generator pairs; use disjoint pairs or identical labels")

    def number_moments(self, label: CoherentLabel) -> tuple[GrassmannElement, GrassmannElement]:
        """``(<N>, <N^2> - <N>^2)`` in the coherent state, both symbolic."""
        psi = self.coherent_state(label)
        n_psi = self.number() @ psi
        mean = inner(psi, n_psi)
        second = inner(psi, self.number() @ n_psi)
        return mean, second - mean * mean

    def bilinear_sum(self, label: CoherentLabel) -> GrassmannElement:
        """``sum_k y*_k y_k`` for the label's generators."""
        out = self.algebra.zero()
        for k in range(self.n_modes):
            out = out + self.conj_eigenvalue(label, k) * self.eigenvalue(label, k)
        return out


def resolution_of_identity(n: int, cap: int = DEFAULT_MODE_CAP) -> FockOperator:
    """``∫ d²y |y><y|`` over ``n`` modes; should come out as the identity."""
    space = FockSpace(ModeSystem(n, cap=cap))
    label = CoherentLabel.standard(n)
    psi = space.coherent_state(label)
    proj = outer(psi, psi)

    def integrate_entry(x: GrassmannElement) -> GrassmannElement:
        for mode in range(n):
            x = integrate_pair(x, mode)
        return x

    return proj.map_entries(integrate_entry)


def u1_rotate(state: FockVector, theta: float) -> FockVector:
    """Apply ``exp(i theta N)``."""
    return FockVector(state.dim, state.n, {
        i: x * phase_factor(theta * i.bit_count()) for i, x in state._entries.items()})


def is_physical(state: FockVector) -> bool:
    """True when the support has a single fermion-number parity."""
    if not state.is_scalar():
        raise NotApplicableError("parity superselection is defined for ordinary amplitudes only")
    parities = {_grade(i) for i in state._entries}
    return len(parities) <= 1


def phase_variance(occupancy: Mapping[int, float]) -> float:
    """
    ``1 / (4 <N>)`` where ``<N> = sum_k y*_k y_k`` is evaluated with the
    given occupancies before dividing (a nilpotent element has no inverse).
    """
    alg = GrassmannAlgebra(max(occupancy, default=-1) + 1)
    mean = alg.zero()
    for k in occupancy:
        mean = mean + alg.bilinear(k)
    total = substitute_bilinears(mean, occupancy).real
    if not total > 0:
        raise DomainError(f"total occupancy must be positive, got {total}")
    return 1.0 / (4.0 * total)


def number_conserving_hamiltonian(space: FockSpace, kinetic: Callable[[Hashable], float],
                                  v0_over_volume: float) -> FockOperator:
    """
    ``sum_k E_k a_k^dagger a_k + (V0 / 2V) sum a^dagger_{k1+q} a^dagger_{k2-q} a_{k2} a_{k1}``.

    Mode labels are momenta; only terms whose four momenta are all present
    in the mode system are kept.
    """
    labels = space.modes.labels
    h = FockOperator.zero(space.dim, space.n)
    for k, lab in enumerate(labels):
        h = h + kinetic(lab) * space.number(k)
    if v0_over_volume:
        idx = {lab: i for i, lab in enumerate(labels)}
        for k1 in labels:
            for k2 in labels:
                for k3 in labels:
                    q = k3 - k1
                    k4 = k2 - q
                    if k4 not in idx:
                        continue
                    term = (space.creation(idx[k3]) @ space.creation(idx[k4])
                            @ space.annihilation(idx[k2]) @ space.annihilation(idx[k1]))
                    h = h + (0.5 * v0_over_volume) * term
    return h
