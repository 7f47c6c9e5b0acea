"""
Identity suite driven by ``fermicoh verify``.

Every check returns the largest residual coefficient it saw; a check passes
when that residual is below :data:`~fermicoh.grassmann.ZERO_THRESHOLD`.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable

from fermicoh import berezin, bogoliubov, physics
from fermicoh.fock import (
    CoherentLabel,
    FockOperator,
    FockSpace,
    ModeSystem,
    anticommutator,
    number_conserving_hamiltonian,
    phase_variance,
    resolution_of_identity,
    u1_rotate,
)
from fermicoh.grassmann import (
    ZERO_THRESHOLD,
    GeneratorId,
    GrassmannAlgebra,
    GrassmannElement,
    exp,
    phase_factor,
    substitute_bilinears,
)


@dataclass(frozen=True)
class IdentityResult:
    identity: str
    eq: str
    modes: int
    passed: bool
    max_residual: float

    def to_dict(self) -> dict:
        return {"identity": self.identity, "eq": self.eq, "modes": self.modes,
                "pass": self.passed, "max_residual": self.max_residual}

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.identity:<32} modes={self.modes}  max_residual={self.max_residual:.3e}  [{self.eq}]"


def _random_element(rng: random.Random, n: int, terms: int = 3, even: bool | None = None) -> GrassmannElement:
    out = {}
    for _ in range(terms):
        m = rng.getrandbits(2 * n) if n else 0
        if even is not None and (m.bit_count() % 2 == 0) != even:
            m ^= 1
        out[m] = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return GrassmannElement(n, out)


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def _anticommutation(n: int, **_) -> float:
    alg = GrassmannAlgebra(n)
    gens = [alg.generator(g) for g in alg.generators()]
    worst = 0.0
    for gi, gj in itertools.product(gens, repeat=2):
        worst = max(worst, (gi * gj + gj * gi).max_abs())
    return worst


def _conjugation(n: int, **_) -> float:
    alg = GrassmannAlgebra(n)
    gens = alg.generators()
    monos = [alg.one()] + [alg.generator(g) for g in gens] + \
        [alg.monomial([g, h]) for g, h in itertools.combinations(gens, 2)]
    worst = 0.0
    for a, b in itertools.product(monos, repeat=2):
        worst = max(worst, ((a * b).conjugate() - b.conjugate() * a.conjugate()).max_abs(),
                    (a.conjugate().conjugate() - a).max_abs())
    return worst


def _associativity(n: int, seed: int = 0, **_) -> float:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(200):
        a, b, c = (_random_element(rng, n) for _ in range(3))
        worst = max(worst, ((a * b) * c - a * (b * c)).max_abs())
    return worst


def _exp_inverse(n: int, seed: int = 0, **_) -> float:
    rng = random.Random(seed + 1)
    worst = 0.0
    for _ in range(50):
        a = _random_element(rng, n, even=True)
        a = a - a.scalar_part
        worst = max(worst, (exp(a) * exp(-a) - 1).max_abs())
    return worst


def _berezin_rules(n: int, **_) -> float:
    alg = GrassmannAlgebra(n)
    worst = 0.0
    for g in alg.generators():
        worst = max(worst, berezin.integrate(alg.one(), g).max_abs())
        for h in alg.generators():
            want = 1.0 if g == h else 0.0
            worst = max(worst, (berezin.integrate(alg.generator(h), g) - want).max_abs())
    return worst


def _measure_antisymmetry(n: int, seed: int = 0, **_) -> float:
    rng = random.Random(seed + 2)
    worst = 0.0
    for _ in range(50):
        a = _random_element(rng, n, terms=6)
        for k in range(n):
            y, ys = GeneratorId(k, False), GeneratorId(k, True)
            one = berezin.integrate(berezin.integrate(a, y), ys)
            other = berezin.integrate(berezin.integrate(a, ys), y)
            worst = max(worst, (one + other).max_abs())
    return worst


def _gaussian(n: int, **_) -> float:
    alg = GrassmannAlgebra(n)
    worst = 0.0
    for k in range(n):
        worst = max(worst, (berezin.integrate_pair(exp(-alg.bilinear(k)), k) - 1).max_abs())
    return worst


def _car(n: int, **_) -> float:
    sp = FockSpace(n)
    ident, zero = sp.identity(), FockOperator.zero(sp.dim, sp.n)
    worst = 0.0
    for i, j in itertools.product(range(n), repeat=2):
        a_i, a_j = sp.annihilation(i), sp.annihilation(j)
        worst = max(worst,
                    anticommutator(a_i, sp.creation(j)).max_residual(ident if i == j else zero),
                    anticommutator(a_i, a_j).max_residual(zero),
                    anticommutator(sp.creation(i), sp.creation(j)).max_residual(zero))
    return worst


def _grassmann_operator_anticommutation(n: int, **_) -> float:
    sp = FockSpace(n)
    worst = 0.0
    for k, p in itertools.product(range(n), repeat=2):
        for y in (sp.algebra.y(p), sp.algebra.ystar(p)):
            for op in (sp.annihilation(k), sp.creation(k)):
                worst = max(worst, (y * op + op * y).max_residual(FockOperator.zero(sp.dim, sp.n)))
    return worst


def _space(n: int) -> tuple[FockSpace, CoherentLabel]:
    return FockSpace(n), CoherentLabel.standard(n)


def _unitarity(n: int, **_) -> float:
    sp, lab = _space(n)
    d = sp.displacement(lab)
    return max((d.adjoint() @ d).max_residual(sp.identity()), (d @ d.adjoint()).max_residual(sp.identity()))


def _product_form(n: int, **_) -> float:
    from fermicoh.fock import operator_exp
    sp, lab = _space(n)
    return sp.displacement(lab).max_residual(operator_exp(sp.displacement_generator(lab)))


def _displaced_annihilation(n: int, **_) -> float:
    sp, lab = _space(n)
    d = sp.displacement(lab)
    return max((d.adjoint() @ sp.annihilation(k) @ d).max_residual(sp.annihilation(k) + sp.eigenvalue(lab, k))
               for k in range(n))


def _displaced_creation(n: int, **_) -> float:
    sp, lab = _space(n)
    d = sp.displacement(lab)
    return max((d.adjoint() @ sp.creation(k) @ d).max_residual(sp.creation(k) + sp.conj_eigenvalue(lab, k))
               for k in range(n))


def _eigenvalue(n: int, **_) -> float:
    sp, lab = _space(n)
    psi = sp.coherent_state(lab)
    return max((sp.annihilation(k) @ psi).max_residual(sp.eigenvalue(lab, k) * psi) for k in range(n))


def _overlap(n: int, **_) -> float:
    sp = FockSpace(ModeSystem(n), n_pairs=2 * n)
    bra, ket = CoherentLabel.standard(n), CoherentLabel.standard(n, offset=n)
    return (sp.overlap_formula(bra, ket) - sp.overlap_matrix(bra, ket)).max_abs()


def _normalisation(n: int, **_) -> float:
    sp, lab = _space(n)
    return (sp.overlap(lab, lab) - 1).max_abs()


def _resolution(n: int, **_) -> float:
    return resolution_of_identity(n).max_residual(FockOperator.identity(1 << n, n))


def _u1_state(n: int, **_) -> float:
    sp, lab = _space(n)
    psi = sp.coherent_state(lab)
    return max(u1_rotate(psi, th).max_residual(sp.coherent_state(lab.rotated(th)))
               for th in (math.pi / 2, math.pi))


def _u1_operator(n: int, **_) -> float:
    sp = FockSpace(n)
    worst = 0.0
    for th in (math.pi / 2, math.pi, 0.7):
        u, ui = sp.u1_operator(th), sp.u1_operator(-th)
        for k in range(n):
            worst = max(worst, (ui @ sp.annihilation(k) @ u).max_residual(sp.annihilation(k) * phase_factor(th)),
                        (ui @ sp.creation(k) @ u).max_residual(sp.creation(k) * phase_factor(-th)))
    return worst


def _overlap_invariance(n: int, **_) -> float:
    sp, lab = _space(n)
    base = sp.overlap(lab, lab)
    return max((sp.overlap(lab.rotated(th), lab.rotated(th)) - base).max_abs() for th in (math.pi / 2, math.pi, 0.3))


def _hamiltonian_symmetry(n: int, **_) -> float:
    labels = tuple(range(-(n // 2), n - n // 2))
    sp = FockSpace(ModeSystem(n, labels=labels))
    h = number_conserving_hamiltonian(sp, lambda k: 0.5 * k * k, 0.37)
    return max((sp.u1_operator(th) @ h @ sp.u1_operator(-th)).max_residual(h) for th in (math.pi / 2, 1.1))


def _number_variance(n: int, **_) -> float:
    sp, lab = _space(n)
    mean, var = sp.number_moments(lab)
    return max((var - mean).max_abs(), (mean - sp.bilinear_sum(lab)).max_abs())


def _uncertainty_product(n: int, seed: int = 0, **_) -> float:
    rng = random.Random(seed + 3)
    sp, lab = _space(n)
    _, var = sp.number_moments(lab)
    worst = 0.0
    for _ in range(20):
        occ = {k: rng.uniform(0.5, 100.0) for k in range(n)}
        dn2 = substitute_bilinears(var, occ).real
        worst = max(worst, abs(dn2 * phase_variance(occ) - 0.25))
    return worst


def _canonicity(n: int, **_) -> float:
    worst = 0.0
    for th in bogoliubov.THETA_REPRESENTATIVES:
        rep = bogoliubov.check_canonicity(bogoliubov.BogoliubovTransform.from_angles([th]), pairs=[1.0])
        worst = max(worst, max(rep.norm_residuals), rep.car_residual)
    return worst


def _reference_hamiltonian() -> bogoliubov.QuadraticHamiltonian:
    params = physics.PhysicalParams(a=0.01)
    return bogoliubov.build_quadratic(params, [1.0], k_fermi=2.0, n_fermi=100.0)


def _off_diagonal(n: int, **_) -> float:
    h = _reference_hamiltonian()
    worst = 0.0
    for th in bogoliubov.THETA_REPRESENTATIVES:
        worst = max(worst, max(abs(c) for c in bogoliubov.BogoliubovTransform.from_angles([th]).off_diagonal(h)))
    return worst


def _ground_energy(n: int, **_) -> float:
    h = _reference_hamiltonian()
    return max(abs(bogoliubov.diagonalize(h, [th]).ground_energy - h.ground_energy)
               for th in bogoliubov.THETA_REPRESENTATIVES)


def _matrix_diagonalization(n: int, **_) -> float:
    h = _reference_hamiltonian()
    worst = 0.0
    for th in bogoliubov.THETA_REPRESENTATIVES:
        d = bogoliubov.diagonalize(h, [th])
        md = bogoliubov.matrix_diagonalization(h, [th])
        worst = max(worst, md.off_diagonal, md.residual, abs(md.constant - d.constant_term),
                    *(abs(c - d.quasi_energy(k)) for k, c in md.number_coefficients.items()))
    return worst


def _quartic_vanishes(n: int, **_) -> float:
    alg = GrassmannAlgebra(1)
    return (alg.ystar(0) * alg.ystar(0) * alg.y(0) * alg.y(0)).max_abs()


def _anomalous_vanish(n: int, **_) -> float:
    sp = FockSpace(ModeSystem(2, labels=(1, -1)), n_pairs=1)
    zero = FockOperator.zero(sp.dim, sp.n)
    return max(t.max_residual(zero) for t in bogoliubov.anomalous_terms(sp, 0, 1, 0))


# (name, formula, check)
CHECKS: list[tuple[str, str, Callable[..., float]]] = [
    ("grassmann_anticommutation", "y_i y_j + y_j y_i = 0", _anticommutation),
    ("conjugation_antihomomorphism", "(ab)^* = b^* a^*", _conjugation),
    ("associativity", "(ab)c = a(bc)", _associativity),
    ("exp_inverse", "exp(a) exp(-a) = 1", _exp_inverse),
    ("berezin_rules", "∫dy 1 = 0, ∫dy_i y_j = δ_ij", _berezin_rules),
    ("measure_antisymmetry", "dy* dy = -dy dy*", _measure_antisymmetry),
    ("gaussian_normalisation", "∫d²y exp(-y* y) = 1", _gaussian),
    ("car", "{a_i, a_j^†} = δ_ij, {a_i, a_j} = 0", _car),
    ("grassmann_operator_anticommutation", "{y_i, a_j} = {y_i, a_j^†} = 0", _grassmann_operator_anticommutation),
    ("displacement_unitarity", "D^† D = D D^† = I", _unitarity),
    ("displacement_product_form", "exp(Σ a^† y - y* a) = Π[1 + a^† y - y* a + (a^† a - 1/2) y* y]", _product_form),
    ("displaced_annihilation", "D^† a_k D = a_k + y_k", _displaced_annihilation),
    ("displaced_creation", "D^† a_k^† D = a_k^† + y*_k", _displaced_creation),
    ("eigenvalue", "a_k |y> = y_k |y>", _eigenvalue),
    ("overlap", "<y'|y> = exp(Σ y'* y - (y'* y' + y* y)/2)", _overlap),
    ("normalisation", "<y|y> = 1", _normalisation),
    ("resolution_of_identity", "∫d²y |y><y| = I", _resolution),
    ("u1_state", "exp(iθN) |y> = |e^{iθ} y>", _u1_state),
    ("u1_operator", "exp(-iθN) a exp(iθN) = e^{iθ} a", _u1_operator),
    ("overlap_invariance", "<e^{iθ}y|e^{iθ}y> = <y|y>", _overlap_invariance),
    ("hamiltonian_u1_symmetry", "exp(iθN) H exp(-iθN) = H", _hamiltonian_symmetry),
    ("number_fluctuation", "<N^2> - <N>^2 = Σ y* y = <N>", _number_variance),
    ("number_phase_uncertainty", "<ΔN^2> <Δθ^2> = 1/4", _uncertainty_product),
    ("bogoliubov_canonicity", "|u|^2 + |v|^2 = 1, {A_k, A_k'^†} = δ", _canonicity),
    ("bogoliubov_off_diagonal", "α_k sin 2θ_k = 0", _off_diagonal),
    ("bogoliubov_ground_energy", "Ē = E_F", _ground_energy),
    ("bogoliubov_matrix_oracle", "H = const + Σ ε_k A_k^† A_k", _matrix_diagonalization),
    ("quartic_term_vanishes", "y*_F y*_F y_F y_F = 0", _quartic_vanishes),
    ("anomalous_terms_vanish", "a^† a^† y_F y_F = y*_F y*_F a a = 0", _anomalous_vanish),
]


def run_suite(n_modes: int, seed: int = 0, cap: int = 6) -> list[IdentityResult]:
    ModeSystem(n_modes, cap=cap)  # validates the mode count
    out = []
    for name, formula, check in CHECKS:
        try:
            resid = float(check(n_modes, seed=seed))
        except Exception as exc:  # a crashing identity is a failing identity
            out.append(IdentityResult(f"{name} ({type(exc).__name__}: {exc})", formula, n_modes, False, math.inf))
            continue
        out.append(IdentityResult(name, formula, n_modes, resid < ZERO_THRESHOLD, resid))
    return out
