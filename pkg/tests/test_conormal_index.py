import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statdisc.conormal_index import (
    CircleMatrixFunction,
    FibrationEquations,
    assemble_G,
    disc_maslov_index,
    fibration_residual,
    maslov_index,
    matrix_B,
    model_B1,
    model_partial_indices,
    on_fibration,
    total_reality_check,
    winding_number,
)
from statdisc.disc_core import HermitianForm, LiftedDisc, NormalFormSurface, circle_points
from statdisc.errors import DegenerateFibrationError, NotOnFibrationError, UnderResolvedError
from statdisc.polynomial import DefiningPolynomial as P
from statdisc.quadric_discs import StarDiscParams, build_disc_star, random_star_params
from statdisc.rh_solver import DiscConstraint, solve_with_continuation

Q1 = NormalFormSurface(HermitianForm([[1]]))
DISC01 = build_disc_star(StarDiscParams(0, [1]), [[1]])


def test_model_disc_lies_in_fibration():
    eqs = FibrationEquations(Q1)
    zeta = circle_points(20)
    f, g = DISC01.evaluate(zeta)
    assert np.abs(fibration_residual(eqs, zeta, f, g)).max() <= 1e-12


def test_zero_section_is_excluded():
    eqs = FibrationEquations(Q1)
    z = np.array([1 + 0.5j, 1.0])  # on Q
    w = np.zeros(2)
    res = fibration_residual(eqs, 1.0, z, w)
    assert np.abs(res).max() < 1e-14
    assert not on_fibration(eqs, 1.0, z, w)


def test_off_surface_point():
    res = fibration_residual(FibrationEquations(Q1), 1.0, np.array([1, 0]), np.array([1, 0]))
    assert res[0] == pytest.approx(1.0)


def test_G_matches_model_matrix_at_one():
    G = assemble_G(FibrationEquations(Q1), DISC01, 64)
    expected = np.array([[0.5, 0, 0, 0], [0, 0, -1j, 0], [0, 2, 0, 1], [0, 2j, 0, -1j]])
    assert np.allclose(G.samples[0], expected, atol=1e-12)
    assert abs(np.linalg.det(G.samples[0])) > 0.1


def test_B_is_an_involution_up_to_conjugation():
    B = matrix_B(assemble_G(FibrationEquations(Q1), DISC01, 64)).samples
    eye = np.eye(4)
    assert np.allclose(B @ B.conj(), eye, atol=1e-12)


def test_model_loop_winding():
    zeta = circle_points(64)
    assert winding_number(np.linalg.det(model_B1(1, zeta))) == 4
    assert winding_number(np.linalg.det(model_B1(2, zeta))) == 6


def test_maslov_examples():
    assert disc_maslov_index(Q1, DISC01) == 4
    A2 = np.diag([1.0, -1.0])
    d = build_disc_star(StarDiscParams(0.2, [1, 0.3j]), A2)
    assert disc_maslov_index(NormalFormSurface(HermitianForm(A2)), d) == 6
    const = CircleMatrixFunction(np.tile(np.diag([2.0, 1j, -1, 3]), (32, 1, 1)), circle_points(32))
    assert maslov_index(const) == 0


@given(st.integers(0, 2**31 - 1))
def test_maslov_stable_under_refinement(seed):
    rng = np.random.default_rng(seed)
    d = build_disc_star(random_star_params(rng, [[1]], 0.9), [[1]])
    M = max(256, d.M)
    assert disc_maslov_index(Q1, d, M) == disc_maslov_index(Q1, d, 2 * M) == 4


def test_maslov_invariant_under_constant_change(rng):
    G = assemble_G(FibrationEquations(Q1), DISC01, 128)
    C = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    GC = CircleMatrixFunction(G.samples @ C, G.zeta)
    assert maslov_index(matrix_B(GC)) == maslov_index(matrix_B(G)) == 4


def test_under_resolved_winding():
    zeta = circle_points(16)
    with pytest.raises(UnderResolvedError):
        winding_number(zeta**6)


def test_degenerate_fibration_reported():
    d = LiftedDisc(DISC01.f_coeffs, np.zeros_like(DISC01.fstar_coeffs), DISC01.M)
    with pytest.raises(DegenerateFibrationError) as exc:
        assemble_G(FibrationEquations(Q1), d, 64)
    assert exc.value.zeta is not None


def test_ill_conditioned_B_warns():
    s = np.tile(np.diag([1.0, 1e-12, 1.0, 1.0]).astype(complex), (8, 1, 1))
    with pytest.warns(UserWarning):
        B = matrix_B(CircleMatrixFunction(s, circle_points(8)))
    assert B.warnings


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_model_partial_indices(n):
    idx = model_partial_indices(n)
    assert sorted(idx) == sorted([2] + [1] * (2 * n) + [0])
    assert sum(idx) == 2 * n + 2 and min(idx) >= 0


def test_model_partial_indices_rejects_n0():
    with pytest.raises(ValueError):
        model_partial_indices(0)


def test_model_disc_totally_real():
    eqs = FibrationEquations(Q1)
    for zeta in circle_points(12):
        f, g = DISC01.evaluate(np.array(zeta))
        tr = total_reality_check(eqs, zeta, f, g)
        assert tr.totally_real and tr.angle > 0.1 and tr.dimension == 4


def test_total_reality_rejects_off_fibration():
    with pytest.raises(NotOnFibrationError):
        total_reality_check(FibrationEquations(Q1), 1.0, np.array([1, 0]), np.array([1, 0]))


def test_perturbed_solved_disc_totally_real_with_maslov_4():
    S = NormalFormSurface.perturbed([[1]], P.monomial(1, 0.05, y0=1, x1=1))
    d, _ = solve_with_continuation(S, DiscConstraint.at_center([2, 1]))
    eqs = FibrationEquations(S)
    for zeta in circle_points(8):
        f, g = d.evaluate(np.array(zeta))
        assert total_reality_check(eqs, zeta, f, g).totally_real
    assert disc_maslov_index(S, d) == 4
