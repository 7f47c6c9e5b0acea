import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermicoh.bogoliubov import (
    THETA_REPRESENTATIVES,
    BogoliubovTransform,
    anomalous_terms,
    build_quadratic,
    check_canonicity,
    cos_sin,
    diagonalize,
    is_admissible,
    matrix_diagonalization,
    pair_modes,
    quadratic_operator,
    quasiparticle_operators,
    quasiparticle_vacuum_check,
    solve_theta,
)
from fermicoh.errors import UsageError
from fermicoh.fock import FockOperator, FockSpace, ModeSystem
from fermicoh.physics import PhysicalParams, critical_coupling

PARAMS = PhysicalParams(a=0.01)
G = 4 * math.pi * 0.01
ALPHA_1 = 0.5 * (0.5 + 2 * G)  # k = 1


@pytest.fixture
def h():
    return build_quadratic(PARAMS, [1.0], k_fermi=0.5, n_fermi=10.0)


def test_representatives_are_distinct_quarter_turns():
    assert len(set(THETA_REPRESENTATIVES)) == 7
    for t in THETA_REPRESENTATIVES:
        c, s = cos_sin(t)
        assert c * s == 0
        assert c * c + s * s == 1


def test_build_quadratic(h):
    assert h.pairs == (1.0,)
    assert h.alpha == (pytest.approx(ALPHA_1, rel=1e-15),)
    assert h.ground_energy == 1.25  # mu N_F with mu = 0.5^2 / 2
    assert h.anomalous_vanish


def test_build_quadratic_rejects_bad_pairs():
    with pytest.raises(UsageError, match="macroscopic"):
        build_quadratic(PARAMS, [0.5], k_fermi=0.5)
    with pytest.raises(UsageError, match="distinct"):
        build_quadratic(PARAMS, [1.0, -1.0])


def test_anomalous_terms_vanish():
    space = FockSpace(ModeSystem(2, labels=(1, -1)), n_pairs=1)
    zero = FockOperator.zero(space.dim, space.n)
    for term in anomalous_terms(space, 0, 1, 0):
        assert term == zero


def test_quadratic_operator_spectrum(h):
    op = quadratic_operator(h)
    diag = sorted(op.to_array().diagonal().real)
    e = 2 * ALPHA_1
    assert diag == pytest.approx([1.25, 1.25 + e, 1.25 + e, 1.25 + 2 * e], rel=1e-14)


@pytest.mark.parametrize("theta", THETA_REPRESENTATIVES + (math.pi / 3, 0.7))
def test_norm_condition(theta):
    assert max(BogoliubovTransform.from_angles([theta]).norm_residuals()) < 1e-15


@pytest.mark.parametrize("theta", THETA_REPRESENTATIVES)
def test_representatives_are_canonical(theta):
    rep = check_canonicity(BogoliubovTransform.from_angles([theta]), pairs=[1.0])
    assert rep.passed, rep.failures
    assert rep.car_residual == 0.0


def test_norm_alone_does_not_make_the_map_canonical():
    # pi/3 satisfies |u|^2 + |v|^2 = 1 but {a_k, a_-k} = 2 u v != 0
    t = BogoliubovTransform.from_angles([math.pi / 3])
    assert check_canonicity(t).passed
    rep = check_canonicity(t, pairs=[1.0])
    assert not rep.passed
    assert rep.car_residual > 1


def test_quarter_angle_is_singular():
    space = FockSpace(pair_modes([1.0]))
    with pytest.raises(UsageError, match="invertible"):
        quasiparticle_operators(space, [1.0], BogoliubovTransform.from_angles([math.pi / 4]))


@pytest.mark.parametrize("theta", THETA_REPRESENTATIVES)
def test_off_diagonal_vanishes(h, theta):
    assert BogoliubovTransform.from_angles([theta]).off_diagonal(h) == [0.0]


def test_solve_theta(h):
    (sol,) = solve_theta(h)
    assert not sol.degenerate
    assert sol.admissible == THETA_REPRESENTATIVES
    assert not is_admissible(sol.alpha, math.pi / 3)


def test_degenerate_pair_accepts_any_angle():
    g_c = critical_coupling(PARAMS, 1.0)
    h = build_quadratic(PARAMS, [1.0], g=g_c)
    assert h.alpha[0] == 0
    (sol,) = solve_theta(h)
    assert sol.degenerate
    d = diagonalize(h, [0.3])
    assert d.degenerate == (True,)
    assert d.quasi_energies == (0.0,)


@pytest.mark.parametrize("theta", THETA_REPRESENTATIVES)
def test_ground_energy_equals_fermi_energy(h, theta):
    d = diagonalize(h, [theta])
    assert d.ground_energy == d.fermi_energy == 1.25


@pytest.mark.parametrize("theta, constant, eps", [
    (0.0, 1.25, 2 * ALPHA_1),
    (math.pi, 1.25, 2 * ALPHA_1),
    (math.pi / 2, 1.25 + 4 * ALPHA_1, -2 * ALPHA_1),
    (-3 * math.pi / 2, 1.25 + 4 * ALPHA_1, -2 * ALPHA_1),
])
def test_diagonal_form(h, theta, constant, eps):
    d = diagonalize(h, [theta])
    assert d.constant_term == pytest.approx(constant, rel=1e-15)
    assert d.quasi_energy(1.0) == pytest.approx(eps, rel=1e-15)
    assert d.quasi_energy(-1.0) == d.quasi_energy(1.0)


def test_diagonalize_rejects_inadmissible_angle(h):
    with pytest.raises(UsageError, match="admissible"):
        diagonalize(h, [math.pi / 3])
    with pytest.raises(UsageError):
        diagonalize(h, [0.0, 0.0])


def test_diagonalize_accepts_mapping(h):
    assert diagonalize(h, {1.0: math.pi}).thetas == (math.pi,)


@pytest.mark.parametrize("theta", THETA_REPRESENTATIVES)
def test_matrix_oracle_agrees(h, theta):
    d = diagonalize(h, [theta])
    m = matrix_diagonalization(h, [theta])
    assert m.off_diagonal < 1e-12
    assert m.residual < 1e-12
    assert m.constant == pytest.approx(d.constant_term, abs=1e-12)
    for lab in (1.0, -1.0):
        assert m.number_coefficients[lab] == pytest.approx(d.quasi_energy(lab), abs=1e-12)


def test_matrix_oracle_two_pairs():
    h = build_quadratic(PARAMS, [1.0, 2.0])
    thetas = [math.pi / 2, 0.0]
    d = diagonalize(h, thetas)
    m = matrix_diagonalization(h, thetas)
    assert m.off_diagonal < 1e-12
    assert m.constant == pytest.approx(d.constant_term, abs=1e-12)
    assert m.number_coefficients[2.0] == pytest.approx(d.quasi_energy(2.0), abs=1e-12)


def test_quasiparticle_vacuum(h):
    assert quasiparticle_vacuum_check(diagonalize(h, [0.0])).passed
    rep = quasiparticle_vacuum_check(diagonalize(h, [math.pi / 2]))
    assert not rep.passed
    assert rep.quasi_vacuum == (1, 1)
    assert "n_1.0=1" in rep.note


@given(st.floats(-6, 6), st.floats(-6, 6))
def test_compose_adds_angles(a, b):
    ta, tb = BogoliubovTransform.from_angles([a]), BogoliubovTransform.from_angles([b])
    c = ta.compose(tb)
    ref = BogoliubovTransform.from_angles([a + b])
    assert c.theta == (a + b,)
    assert abs(c.u[0] - ref.u[0]) < 1e-12
    assert abs(c.v[0] - ref.v[0]) < 1e-12
    assert max(c.norm_residuals()) < 1e-12


def test_to_dict(h):
    d = diagonalize(h, [0.0]).to_dict()
    assert d["ground_energy"] == 1.25
    assert d["pairs"][0]["k"] == 1.0
