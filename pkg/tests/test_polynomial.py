import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statdisc.polynomial import ComplexPolynomial, DefiningPolynomial as P, to_complex, to_real


def test_weights():
    assert P.weight((1, 0, 0, 0)) == 2
    assert P.weight((0, 1, 1, 0)) == 3
    assert P.monomial(1, 1.0, y0=1, x1=2).min_weight == 4


def test_quadric_values():
    r = P.quadric([[1]])
    z = np.array([[1 + 2j, 1j], [3, 1]])
    assert np.allclose(r.at(z), [1 - 1, 3 - 1])


def test_dilate_scales_by_weight():
    p = P.monomial(1, 1.0, y0=1, x1=1) + P.monomial(1, 1.0, y0=1, x1=2) + P.quadric([[1]])
    q = p.dilate(0.1)
    assert q.terms[(0, 1, 1, 0)] == pytest.approx(0.1)
    assert q.terms[(0, 1, 2, 0)] == pytest.approx(0.01)
    assert q.terms[(1, 0, 0, 0)] == pytest.approx(1.0)


def test_json_roundtrip():
    p = P.quadric([[1, 0.5j], [-0.5j, -1]]) + P.monomial(2, 0.3, y0=1, x2=3)
    assert P.from_json(p.to_json()) == p


def test_derivative_exact():
    p = P.monomial(1, 3.0, x0=2, y1=3)
    assert p.derivative(0) == P.monomial(1, 6.0, x0=1, y1=3)
    assert p.derivative(3, 4).is_zero


@given(st.complex_numbers(max_magnitude=2), st.complex_numbers(max_magnitude=2))
def test_compose_holomorphic_matches_evaluation(a, b):
    z0, z1 = ComplexPolynomial.variable(2, 0), ComplexPolynomial.variable(2, 1)
    F = [z0 + z1 * z1 * 0.5, z1 * (1 - 0.3j) + z0 * 0.1]
    p = P.quadric([[1]]) + P.monomial(1, 0.2, y0=1, x1=1)
    q = p.compose_holomorphic(F)
    z = np.array([a, b])
    Fz = np.array([f(z[None])[0] for f in F])
    assert q.at(z) == pytest.approx(p.at(Fz), abs=1e-10)


def test_real_complex_coordinates():
    z = np.array([1 + 2j, -3j])
    assert np.allclose(to_real(z), [1, 2, 0, -3])
    assert np.allclose(to_complex(to_real(z)), z)
