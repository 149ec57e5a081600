import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statdisc.disc_core import (
    BoundaryJet1,
    HermitianForm,
    LiftedDisc,
    NormalFormSurface,
    circle_points,
    eval_defining,
    holder_norm,
    spectral_derivative,
)
from statdisc.errors import InvalidGridError, InvalidHermitianFormError, NotNormalFormError
from statdisc.polynomial import DefiningPolynomial as P
from statdisc.quadric_discs import StarDiscParams, build_disc_star


# -- holder_norm -------------------------------------------------------------
def test_holder_norm_of_constant_is_its_magnitude():
    assert holder_norm(np.full(64, 3 - 4j), 0, 0.5) == pytest.approx(5.0, abs=1e-14)


def test_holder_norm_of_identity_curve():
    zeta = circle_points(256)
    assert holder_norm(zeta, 0, 0.5) == pytest.approx(1 + np.sqrt(2), abs=1e-12)


def test_holder_norm_k1_adds_derivative_sup():
    zeta = circle_points(256)
    assert holder_norm(zeta, 1, 0.5) == pytest.approx(2 + np.sqrt(2), abs=1e-10)


def test_holder_norm_rejects_coarse_grid():
    with pytest.raises(InvalidGridError):
        holder_norm(np.ones(7), 0, 0.5)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
def test_holder_norm_rejects_bad_exponent(eps):
    with pytest.raises(ValueError):
        holder_norm(np.ones(16), 0, eps)


@given(st.integers(1, 5), st.floats(0.05, 0.95))
def test_holder_norm_monotone_in_k(m, eps):
    zeta = circle_points(128)
    curve = zeta**m + 0.3 * zeta
    assert holder_norm(curve, 1, eps) >= holder_norm(curve, 0, eps)


def test_holder_norm_identity_curve_decreases_in_eps():
    # |ζ - η| / |ζ - η|**eps peaks at the antipodal pair: 2**(1 - eps)
    zeta = circle_points(256)
    values = [holder_norm(zeta, 0, e) for e in (0.2, 0.5, 0.8)]
    assert np.allclose(values, [1 + 2 ** (1 - e) for e in (0.2, 0.5, 0.8)], atol=1e-12)
    assert values[0] > values[1] > values[2]


def test_holder_norm_not_monotone_in_eps_in_general():
    # a fast oscillation peaks at short distances (< 1), where dist**(-eps) grows with eps
    zeta = circle_points(256)
    values = [holder_norm(zeta**20, 0, e) for e in (0.2, 0.5, 0.8)]
    assert values[0] < values[1] < values[2]


def test_spectral_derivative_of_power():
    zeta = circle_points(64)
    assert np.allclose(spectral_derivative(zeta**3), 3 * zeta**2, atol=1e-12)


# -- eval_defining -----------------------------------------------------------
def test_eval_defining_quadric_at_origin():
    r = P.quadric([[1]])
    jet = eval_defining(r, np.zeros(2))
    assert jet.value == pytest.approx(0)
    assert np.allclose(jet.gradient, [0.5, 0])


def test_eval_defining_quadric_at_one_one():
    r = P.quadric([[1]])
    jet = eval_defining(r, np.array([1, 1], dtype=complex))
    assert jet.value == pytest.approx(0)
    assert np.allclose(jet.gradient, [0.5, -1])


def test_eval_defining_zero_polynomial():
    jet = eval_defining(P(1), np.array([0.3 + 1j, -2j]), order=2)
    assert jet.value == 0
    assert np.allclose(jet.gradient, 0)
    assert np.allclose(jet.hess_zz, 0) and np.allclose(jet.hess_zbar_z, 0)


def test_eval_defining_hessian_of_quadric():
    A = np.array([[1.0, 0.5j], [-0.5j, -2.0]])
    jet = eval_defining(P.quadric(A), np.array([0.1, 0.2, -0.3j]), order=2)
    assert np.allclose(jet.hess_zz, 0)
    assert np.allclose(jet.hess_zbar_z[1:, 1:], -A)


@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_gradient_matches_finite_differences(z0, z1):
    rho = P.quadric([[1]]) + P.monomial(1, 0.7, y0=1, x1=2) + P.monomial(1, -0.2, y1=3)
    z = np.array([z0, z1])
    g = eval_defining(rho, z).gradient
    h = 1e-6
    for j in range(2):
        e = np.zeros(2, dtype=complex)
        e[j] = 1
        dx = (rho.at(z + h * e) - rho.at(z - h * e)) / (2 * h)
        dy = (rho.at(z + 1j * h * e) - rho.at(z - 1j * h * e)) / (2 * h)
        assert g[j] == pytest.approx(0.5 * (dx - 1j * dy), abs=1e-6)


# -- types -------------------------------------------------------------------
def test_hermitian_form_rejects_non_hermitian_and_singular():
    with pytest.raises(InvalidHermitianFormError):
        HermitianForm([[1, 1], [0, 1]])
    with pytest.raises(InvalidHermitianFormError):
        HermitianForm([[0.0]])


def test_normal_form_surface_rejects_x0_in_higher():
    with pytest.raises(NotNormalFormError):
        NormalFormSurface(HermitianForm([[1]]), higher=P.monomial(1, 1.0, x0=1, x1=2))


def test_normal_form_surface_roundtrip_json():
    S = NormalFormSurface.perturbed([[1]], P.monomial(1, 0.05, y0=1, x1=1) + P.monomial(1, 0.3, y0=2))
    T = NormalFormSurface.from_json(S.to_json())
    assert T.polynomial.allclose(S.polynomial)
    assert S.b[0] == pytest.approx(0.025)
    assert S.b0 == pytest.approx(0.3)


@given(st.integers(4, 40), st.integers(0, 2**31 - 1))
def test_spectral_roundtrip(N, seed):
    rng = np.random.default_rng(seed)
    M = 4 * (N + 2)
    f = rng.normal(size=(N + 1, 2)) + 1j * rng.normal(size=(N + 1, 2))
    g = rng.normal(size=(N + 2, 2)) + 1j * rng.normal(size=(N + 2, 2))
    d = LiftedDisc(f, g, M)
    e = LiftedDisc.from_samples(d.samples["f"], d.samples["g"], N, M)
    assert np.allclose(e.f_coeffs, f, atol=1e-12)
    assert np.allclose(e.fstar_coeffs, g, atol=1e-12)


@given(st.floats(0, 0.9), st.floats(0, 2 * np.pi), st.floats(0.2, 3))
def test_lift_has_no_negative_modes(r, phi, v):
    d = build_disc_star(StarDiscParams(r * np.exp(1j * phi), [v]), [[1]])
    coeffs = np.fft.fft(d.samples["g"], axis=0) / d.M
    assert np.abs(coeffs[d.M // 2 + 1 :]).max() < 1e-12


def test_disc_json_roundtrip():
    d = build_disc_star(StarDiscParams(0.3j, [1.0]), [[1]])
    e = LiftedDisc.from_json(d.to_json())
    assert d.distance_c0(e) == 0.0


def test_boundary_jet_pinning_data():
    bj = BoundaryJet1(np.zeros(2), np.array([-2, -1]), np.array([1, 0]), np.array([1, -2]))
    w, s = bj.pinning_data()
    assert np.allclose(w, [-1]) and s == -2
