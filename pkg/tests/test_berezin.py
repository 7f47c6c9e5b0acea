import pytest
from hypothesis import given

from conftest import elements
from fermicoh.berezin import IntegrationMeasure, integrate, integrate_all, integrate_pair, left_derivative
from fermicoh.grassmann import GeneratorId, GrassmannAlgebra

Y1, Y1S, Y2, Y2S = GeneratorId(0), GeneratorId(0, True), GeneratorId(1), GeneratorId(1, True)


def test_basic_rules():
    alg = GrassmannAlgebra(1)
    assert integrate(alg.one(), Y1).is_zero()
    assert integrate(alg.y(0), Y1) == 1
    assert integrate(alg.ystar(0), Y1).is_zero()


def test_derivative_acts_from_the_left():
    alg = GrassmannAlgebra(2)
    # d/dy2 (y1 y2) = -y1
    assert left_derivative(alg.y(0) * alg.y(1), Y2) == -alg.y(0)
    assert left_derivative(alg.y(1) * alg.y(0), Y2) == alg.y(0)


@given(elements(n=2))
def test_integration_equals_differentiation(a):
    for g in GrassmannAlgebra(2).generators():
        assert integrate(a, g) == left_derivative(a, g)


@given(elements(n=2))
def test_derivatives_anticommute(a):
    for g, h in [(Y1, Y2), (Y1, Y1S), (Y2S, Y1)]:
        assert left_derivative(left_derivative(a, g), h) == -left_derivative(left_derivative(a, h), g)
    assert left_derivative(left_derivative(a, Y1), Y1).is_zero()


@given(elements(n=2), elements(n=2))
def test_graded_leibniz(a, b):
    # odd derivation: d(ab) = (da) b + twist(a) (db)
    assert left_derivative(a * b, Y2S) == left_derivative(a, Y2S) * b + a.twist() * left_derivative(b, Y2S)


def test_pair_measure_values():
    alg = GrassmannAlgebra(1)
    # ∫ d²y y* y = -1 and ∫ d²y y y* = 1 with d²y = dy* dy
    assert integrate_pair(alg.bilinear(0), 0) == -1
    assert integrate_pair(alg.y(0) * alg.ystar(0), 0) == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_gaussian_normalisation(n):
    alg = GrassmannAlgebra(n)
    for k in range(n):
        assert integrate_pair((-alg.bilinear(k)).exp(), k) == 1
    total = alg.zero()
    for k in range(n):
        total = total - alg.bilinear(k)
    assert integrate_all(total.exp()) == 1


def test_measure_antisymmetry():
    alg = GrassmannAlgebra(2)
    x = alg.y(0) * alg.ystar(0) * alg.y(1) * alg.ystar(1)
    # dy* dy versus dy dy*: swapping two differentials flips the sign
    swapped = integrate(integrate(x, Y1S), Y1)
    assert integrate_pair(x, 0) == -swapped
    # pair measures are even, so their order does not matter
    assert IntegrationMeasure([0, 1]).apply(x) == IntegrationMeasure([1, 0]).apply(x)


def test_measure_differentials_written_order():
    assert [str(g) for g in IntegrationMeasure([0, 1]).differentials()] == ["y1*", "y1", "y2*", "y2"]


def test_integrate_all_returns_number():
    alg = GrassmannAlgebra(2)
    assert integrate_all(alg.y(0)) == 0
    assert isinstance(integrate_all(alg.bilinear(0) * alg.bilinear(1)), complex)
