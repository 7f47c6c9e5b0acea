"""
Quadratic Hamiltonian around the macroscopic mode and its Bogoliubov form.

Each excitation pair ``(k, -k)`` carries ``alpha_k = (E_k + 2 rho g) / 2``
and contributes ``2 alpha_k (n_k + n_{-k})`` to the Hamiltonian (the primed
sum runs over both members of the pair with a prefactor 1/2).

The transformation is taken in the form

    a_k        = u A_k + conj(v) A^dagger_{-k}
    a^dagger_k = conj(u) A^dagger_k + v A_{-k}

with the same ``(u, v)`` for both members of a pair and ``u = cos(theta)``,
``v = sin(theta)``.  Note that ``{a_k, a_{-k}} = 2 u conj(v)`` in this form,
so the full set of anticommutators holds only when ``u v = 0``; the
norm condition ``|u|^2 + |v|^2 = 1`` alone fixes ``{a_k, a_k^dagger}``.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from fermicoh.errors import ConfigurationError, UsageError
from fermicoh.fock import FockOperator, FockSpace, FockVector, ModeSystem, anticommutator
from fermicoh.grassmann import ZERO_THRESHOLD, GrassmannAlgebra
from fermicoh.physics import PhysicalParams, coupling, free_energy, lowest_order_energy

# {0, ±π/2, ±π, ±3π/2}
THETA_REPRESENTATIVES = (
    0.0, math.pi / 2, -math.pi / 2, math.pi, -math.pi, 3 * math.pi / 2, -3 * math.pi / 2,
)
ANGLE_TOLERANCE = 1e-12


def cos_sin(theta: float) -> tuple[float, float]:
    """``(cos theta, sin theta)`` with exact values on multiples of pi/2."""
    q = theta / (math.pi / 2)
    r = round(q)
    if abs(q - r) <= 4 * sys.float_info.epsilon * max(1, abs(r)):
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[r % 4]
    return math.cos(theta), math.sin(theta)


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``E_F + sum_pairs 2 alpha_k (n_k + n_{-k})``; momenta ``pairs`` are the positive members."""

    ground_energy: float
    pairs: tuple[float, ...]
    alpha: tuple[float, ...]
    g: float
    mu: float
    n_fermi: float
    units: str = "dimensionless"
    anomalous_vanish: bool = True

    def alpha_of(self, k: float) -> float:
        return self.alpha[self.pairs.index(k)]


def anomalous_terms(space: FockSpace, k_index: int, minus_k_index: int,
                    fermi_pair: int) -> tuple[FockOperator, FockOperator]:
    """
    Pair-creation and pair-annihilation terms with the macroscopic-mode
    operators replaced by Grassmann numbers:
    ``a^dagger_k a^dagger_{-k} y_F y_F`` and ``y*_F y*_F a_k a_{-k}``.
    """
    alg = space.algebra
    yF, ysF = alg.y(fermi_pair), alg.ystar(fermi_pair)
    create = (space.creation(k_index) @ space.creation(minus_k_index)) * (yF * yF)
    annihilate = (ysF * ysF) * (space.annihilation(k_index) @ space.annihilation(minus_k_index))
    return create, annihilate


def build_quadratic(params: PhysicalParams, pairs: Sequence[float], *, g: float | None = None,
                    k_fermi: float | None = None, n_fermi: float = 0.0) -> QuadraticHamiltonian:
    """
    Quadratic Hamiltonian for excitation pairs ``(k, -k)``.

    ``k_fermi`` labels the macroscopic mode; a pair with that momentum
    magnitude is rejected.  ``g`` defaults to the scattering-length value.
    """
    pairs = tuple(float(k) for k in pairs)
    if len(set(abs(k) for k in pairs)) != len(pairs):
        raise UsageError(f"pairs must be distinct, got {pairs}")
    if k_fermi is not None and any(math.isclose(abs(k), abs(k_fermi)) for k in pairs):
        raise UsageError(f"macroscopic mode k_F={k_fermi} cannot appear among the pairs")
    if g is None:
        g = coupling(params)
    alpha = tuple(0.5 * (float(free_energy(params, k)) + 2.0 * params.rho * g) for k in pairs)
    if k_fermi is None:
        e_f, mu = 0.0, 0.0
    else:
        e_f, mu = lowest_order_energy(params, k_fermi, n_fermi)

    # pair creation/annihilation carries y_F y_F = 0
    space = FockSpace(ModeSystem(2, labels=(1, -1)), n_pairs=1)
    vanish = all(t.max_residual(FockOperator.zero(space.dim, space.n)) == 0.0
                 for t in anomalous_terms(space, 0, 1, 0))
    return QuadraticHamiltonian(ground_energy=e_f, pairs=pairs, alpha=alpha, g=g, mu=mu,
                                n_fermi=n_fermi, units=params.units, anomalous_vanish=vanish)


def pair_modes(pairs: Sequence[float]) -> ModeSystem:
    """Mode system ``(k1, -k1, k2, -k2, ...)``."""
    labels = []
    for k in pairs:
        labels.extend([k, -k])
    return ModeSystem(len(labels), labels=tuple(labels))


def quadratic_operator(h: QuadraticHamiltonian, space: FockSpace | None = None) -> FockOperator:
    space = space or FockSpace(pair_modes(h.pairs))
    out = h.ground_energy * space.identity()
    for i, k in enumerate(h.pairs):
        out = out + (2.0 * h.alpha[i]) * (space.number(space.modes.index(k))
                                         + space.number(space.modes.index(-k)))
    return out


# ---------------------------------------------------------------------------
# Transformation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BogoliubovTransform:
    """Per-pair coefficients ``(u_k, v_{-k})``."""

    u: tuple[complex, ...]
    v: tuple[complex, ...]
    theta: tuple[float, ...] | None = None

    @classmethod
    def from_angles(cls, thetas: Sequence[float]) -> BogoliubovTransform:
        cs = [cos_sin(t) for t in thetas]
        return cls(u=tuple(complex(c) for c, _ in cs), v=tuple(complex(s) for _, s in cs),
                   theta=tuple(float(t) for t in thetas))

    def __len__(self) -> int:
        return len(self.u)

    def norm_residuals(self) -> list[float]:
        """``| |u|^2 + |v|^2 - 1 |`` per pair."""
        return [abs(abs(u) ** 2 + abs(v) ** 2 - 1.0) for u, v in zip(self.u, self.v)]

    def off_diagonal(self, h: QuadraticHamiltonian) -> list[complex]:
        """Coefficient ``2 alpha_k u_k v_{-k}`` of the pair-creation term, per pair."""
        return [2.0 * a * u * v for a, u, v in zip(h.alpha, self.u, self.v)]

    def compose(self, other: BogoliubovTransform) -> BogoliubovTransform:
        """
        Apply ``other`` after ``self``, treating each pair as the unitary
        ``[[u, v], [-conj(v), conj(u)]]``; for real angles this adds them.
        """
        if len(self) != len(other):
            raise UsageError("transforms act on different numbers of pairs")
        u_out, v_out = [], []
        for u1, v1, u2, v2 in zip(self.u, self.v, other.u, other.v):
            m = np.array([[u2, v2], [-np.conj(v2), np.conj(u2)]]) @ np.array([[u1, v1], [-np.conj(v1), np.conj(u1)]])
            u_out.append(complex(m[0, 0]))
            v_out.append(complex(m[0, 1]))
        theta = None
        if self.theta is not None and other.theta is not None:
            theta = tuple(a + b for a, b in zip(self.theta, other.theta))
        return BogoliubovTransform(tuple(u_out), tuple(v_out), theta)


def quasiparticle_operators(space: FockSpace, pairs: Sequence[float],
                            t: BogoliubovTransform) -> dict[float, FockOperator]:
    """
    ``A_k`` for every mode label by inverting the transformation within each pair:
    ``A_k = (conj(u) a_k - conj(v) a^dagger_{-k}) / (|u|^2 - |v|^2)``.
    """
    if len(pairs) != len(t):
        raise UsageError("one (u, v) per pair required")
    out = {}
    for k, u, v in zip(pairs, t.u, t.v):
        det = abs(u) ** 2 - abs(v) ** 2
        if abs(det) < ZERO_THRESHOLD:
            raise UsageError(f"transformation for pair k={k} is not invertible (|u| = |v|)")
        for lab, partner in ((k, -k), (-k, k)):
            i, j = space.modes.index(lab), space.modes.index(partner)
            out[lab] = (u.conjugate() * space.annihilation(i) - v.conjugate() * space.creation(j)) * (1.0 / det)
    return out


@dataclass(frozen=True)
class CanonicityReport:
    passed: bool
    norm_residuals: tuple[float, ...]
    car_residual: float | None = None
    failures: tuple[str, ...] = ()


def check_canonicity(t: BogoliubovTransform, pairs: Sequence[float] | None = None) -> CanonicityReport:
    """
    Norm condition per pair; with ``pairs`` given, also build the ``A``
    operators and check every anticommutator on the Fock space.
    """
    res = t.norm_residuals()
    failures = [f"pair {i}: norm residual {r:.3g}" for i, r in enumerate(res) if r > ANGLE_TOLERANCE]
    car = None
    if pairs is not None:
        space = FockSpace(pair_modes(pairs))
        try:
            ops = quasiparticle_operators(space, pairs, t)
        except UsageError as exc:
            failures.append(str(exc))
            car = math.inf
        else:
            car = 0.0
            labels = space.modes.labels
            ident = space.identity()
            zero = FockOperator.zero(space.dim, space.n)
            for p, q in itertools.product(labels, repeat=2):
                r1 = anticommutator(ops[p], ops[q].adjoint()).max_residual(ident if p == q else zero)
                r2 = anticommutator(ops[p], ops[q]).max_residual(zero)
                worst = max(r1, r2)
                if worst > ANGLE_TOLERANCE:
                    failures.append(f"anticommutators of A_{p}, A_{q}: residual {worst:.3g}")
                car = max(car, worst)
    return CanonicityReport(passed=not failures, norm_residuals=tuple(res), car_residual=car,
                            failures=tuple(failures))


# ---------------------------------------------------------------------------
# Diagonalisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaSolution:
    k: float
    alpha: float
    degenerate: bool
    admissible: tuple[float, ...]


def is_admissible(alpha: float, theta: float) -> bool:
    """``alpha sin(2 theta) = 0``."""
    if abs(alpha) < ZERO_THRESHOLD:
        return True
    c, s = cos_sin(theta)
    return abs(2.0 * c * s) < ANGLE_TOLERANCE


def solve_theta(h: QuadraticHamiltonian) -> list[ThetaSolution]:
    out = []
    for k, a in zip(h.pairs, h.alpha):
        if abs(a) < ZERO_THRESHOLD:
            out.append(ThetaSolution(k, a, True, ()))
        else:
            out.append(ThetaSolution(k, a, False, THETA_REPRESENTATIVES))
    return out


@dataclass(frozen=True)
class DiagonalForm:
    """
    ``ground_energy + sum_pairs eps_k (N_k + N_{-k})`` in quasi-particle numbers.

    ``ground_energy`` is ``E_F + sum' alpha_k 2 sin^2(2 theta_k)`` and so
    equals ``E_F`` for every admissible angle.  ``constant_term`` is the
    c-number produced by normal ordering, ``E_F + sum' 2 alpha_k |v|^2``;
    it differs from ``E_F`` whenever ``|v| = 1``.  ``branch`` holds
    ``cos(2 theta_k)``: -1 marks pairs whose energy changed sign.
    """

    ground_energy: float
    fermi_energy: float
    constant_term: float
    pairs: tuple[float, ...]
    thetas: tuple[float, ...]
    quasi_energies: tuple[float, ...]
    branch: tuple[float, ...]
    degenerate: tuple[bool, ...] = field(default=())

    def quasi_energy(self, k: float) -> float:
        """Energy of pair ``(k, -k)``; either member may be passed."""
        key = k if k in self.pairs else -k
        return self.quasi_energies[self.pairs.index(key)]

    def to_dict(self) -> dict:
        return {
            "ground_energy": self.ground_energy,
            "fermi_energy": self.fermi_energy,
            "constant_term": self.constant_term,
            "pairs": [
                {"k": k, "theta": t, "eps_k": e, "branch": b, "degenerate": d}
                for k, t, e, b, d in zip(self.pairs, self.thetas, self.quasi_energies,
                                         self.branch, self.degenerate)
            ],
        }


def diagonalize(h: QuadraticHamiltonian, thetas: Sequence[float] | Mapping[float, float] | None = None) -> DiagonalForm:
    """Diagonal form for the chosen angles (default ``theta = 0`` everywhere)."""
    if thetas is None:
        thetas = [0.0] * len(h.pairs)
    elif isinstance(thetas, Mapping):
        thetas = [thetas.get(k, 0.0) for k in h.pairs]
    thetas = [float(t) for t in thetas]
    if len(thetas) != len(h.pairs):
        raise UsageError(f"{len(thetas)} angles for {len(h.pairs)} pairs")
    ebar = h.ground_energy
    const = h.ground_energy
    eps, branch, degen = [], [], []
    for k, a, th in zip(h.pairs, h.alpha, thetas):
        if not is_admissible(a, th):
            raise UsageError(f"theta={th} is not admissible for pair k={k} (alpha={a})")
        c, s = cos_sin(th)
        sin2, cos2 = 2.0 * c * s, c * c - s * s
        # both members of the pair enter the primed sum
        ebar += 2 * (a * 2.0 * sin2 ** 2)
        const += 2 * (2.0 * a * s * s)
        eps.append(2.0 * a * cos2)
        branch.append(cos2)
        degen.append(abs(a) < ZERO_THRESHOLD)
    return DiagonalForm(ground_energy=ebar, fermi_energy=h.ground_energy, constant_term=const,
                        pairs=h.pairs, thetas=tuple(thetas), quasi_energies=tuple(eps),
                        branch=tuple(branch), degenerate=tuple(degen))


# ---------------------------------------------------------------------------
# Matrix-level checks
# ---------------------------------------------------------------------------


def normal_ordered_expansion(op: FockOperator, ann: Sequence[FockOperator]) -> dict[tuple[tuple[int, ...], tuple[int, ...]], complex]:
    """
    Coefficients of ``op`` in the basis
    ``prod_i (A_i^dagger)^{s_i} prod_{i desc} A_i^{t_i}`` built from the
    annihilators ``ann``.  Keys are ``(s, t)`` occupation tuples.
    """
    n = len(ann)
    mats = [a.to_array() for a in ann]
    dim = op.dim
    keys, cols = [], []
    for s in itertools.product((0, 1), repeat=n):
        for t in itertools.product((0, 1), repeat=n):
            m = np.eye(dim, dtype=complex)
            for i in range(n):
                if s[i]:
                    m = m @ mats[i].conj().T
            for i in reversed(range(n)):
                if t[i]:
                    m = m @ mats[i]
            keys.append((s, t))
            cols.append(m.reshape(-1))
    basis = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(basis, op.to_array().reshape(-1), rcond=None)
    return {k: complex(c) for k, c in zip(keys, coef)}


@dataclass(frozen=True)
class MatrixDiagonalization:
    off_diagonal: float
    constant: complex
    number_coefficients: dict[float, complex]
    residual: float


def matrix_diagonalization(h: QuadraticHamiltonian, thetas: Sequence[float]) -> MatrixDiagonalization:
    """
    Re-express the quadratic Hamiltonian in the ``A`` operators and read off
    the constant, the ``A^dagger A`` coefficients and the largest coefficient
    of anything else (pair creation/annihilation in particular).
    """
    t = BogoliubovTransform.from_angles(thetas)
    space = FockSpace(pair_modes(h.pairs))
    ops = quasiparticle_operators(space, h.pairs, t)
    labels = space.modes.labels
    ann = [ops[lab] for lab in labels]
    hop = quadratic_operator(h, space)
    coef = normal_ordered_expansion(hop, ann)
    n = len(labels)
    zero = (0,) * n
    numbers = {}
    other = 0.0
    for (s, tt), c in coef.items():
        if s == zero and tt == zero:
            continue
        if s == tt and sum(s) == 1:
            numbers[labels[s.index(1)]] = c
        else:
            other = max(other, abs(c))
    # reconstruction residual guards the least-squares solve
    recon = coef[(zero, zero)] * np.eye(space.dim)
    for lab, c in numbers.items():
        a = ops[lab].to_array()
        recon = recon + c * (a.conj().T @ a)
    resid = float(np.max(np.abs(recon - hop.to_array()))) if other < ZERO_THRESHOLD else math.inf
    return MatrixDiagonalization(off_diagonal=other, constant=coef[(zero, zero)],
                                 number_coefficients=numbers, residual=resid)


@dataclass(frozen=True)
class VacuumReport:
    passed: bool
    residuals: dict[float, float]
    quasi_vacuum: tuple[int, ...] | None
    note: str = ""


def quasiparticle_vacuum_check(d: DiagonalForm, state: FockVector | None = None) -> VacuumReport:
    """
    Apply every ``A_k`` of the chosen transformation to ``state`` (the bare
    vacuum by default) and report the residual.  Also reports the occupation
    pattern of the basis state annihilated by all ``A_k``, if there is one.
    """
    space = FockSpace(pair_modes(d.pairs))
    t = BogoliubovTransform.from_angles(d.thetas)
    ops = quasiparticle_operators(space, d.pairs, t)
    psi = space.vacuum() if state is None else state
    zero_vec = FockVector(space.dim, space.n)
    residuals = {lab: (op @ psi).max_residual(zero_vec) for lab, op in ops.items()}
    qvac = None
    for s in range(space.dim):
        b = space.basis(s)
        if all((op @ b).max_residual(zero_vec) < ZERO_THRESHOLD for op in ops.values()):
            qvac = tuple((s >> i) & 1 for i in range(space.n_modes))
            break
    passed = max(residuals.values()) < ZERO_THRESHOLD
    note = ""
    if not passed and qvac is not None:
        occ = ", ".join(f"n_{lab}={o}" for lab, o in zip(space.modes.labels, qvac))
        note = f"state is not the quasi-particle vacuum; the vacuum of the A_k is the basis state {occ}"
    return VacuumReport(passed=passed, residuals=residuals, quasi_vacuum=qvac, note=note)
