import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statdisc.disc_core import HermitianForm, LiftedDisc, NormalFormSurface
from statdisc.errors import ContinuationError, DivergenceError, IsotropicDirectionError, UnderResolvedError
from statdisc.polynomial import DefiningPolynomial as P
from statdisc.quadric_discs import (
    StarDiscParams,
    boundary_jet,
    build_disc_star,
    center_of_star,
    invert_center,
    random_star_params,
)
from statdisc.rh_solver import (
    DiscConstraint,
    SolverOptions,
    center_grid,
    continuation_solve,
    family_scan,
    linear_path,
    quadratic_contraction,
    solve_disc,
    solve_with_continuation,
    verify_disc,
)

A1 = HermitianForm([[1]])
Q1 = NormalFormSurface(A1)
S_B1 = NormalFormSurface.perturbed(A1, P.monomial(1, 0.05, y0=1, x1=1))


def noisy(d: LiftedDisc, rng, size=1e-2) -> LiftedDisc:
    f = d.f_coeffs.copy()
    g = d.fstar_coeffs.copy()
    k = d.N // 2
    f[:k] += size * (rng.normal(size=f[:k].shape) + 1j * rng.normal(size=f[:k].shape))
    g[:k] += size * (rng.normal(size=g[:k].shape) + 1j * rng.normal(size=g[:k].shape))
    return LiftedDisc(f, g, d.M)


def test_constraint_requires_exactly_one_pinning():
    with pytest.raises(ValueError):
        DiscConstraint()
    with pytest.raises(ValueError):
        DiscConstraint(center=[2, 1], w_alpha=[1], s0=1)
    with pytest.raises(ValueError):
        DiscConstraint(w_alpha=[1])
    assert DiscConstraint.at_center([2, 1]).kind == "center"
    assert DiscConstraint.at_jet([-1], -2).kind == "jet"


def test_quadric_recovery_from_noisy_guess(rng):
    exact = build_disc_star(StarDiscParams(0, [1]), A1)
    disc, rep = solve_disc(Q1, DiscConstraint.at_center([2, 1]), noisy(exact, rng))
    assert rep.converged
    assert disc.distance_c0(exact) <= 1e-8
    assert quadratic_contraction(rep.history) < 1e3


@settings(max_examples=8)
@given(st.integers(0, 2**31 - 1))
def test_quadric_fixed_points_are_closed_forms(seed):
    rng = np.random.default_rng(seed)
    p = random_star_params(rng, A1, 0.6)
    exact = build_disc_star(p, A1)
    disc, _ = solve_disc(Q1, DiscConstraint.at_center(center_of_star(p, A1)), noisy(exact, rng, 1e-3))
    assert disc.distance_c0(exact) <= 1e-8


def test_quadric_jet_pinning_recovers_closed_form(rng):
    p = StarDiscParams(0.2 - 0.1j, [0.9])
    exact = build_disc_star(p, A1)
    c = DiscConstraint.from_jet(boundary_jet(exact))
    disc, _ = solve_disc(Q1, c, noisy(exact, rng))
    assert disc.distance_c0(exact) <= 1e-8


def test_perturbed_center_solve_and_jet_resolve():
    disc, rep = solve_with_continuation(S_B1, DiscConstraint.at_center([2, 1]))
    assert rep.converged and rep.boundary_residual <= 1e-9
    assert verify_disc(S_B1, disc) <= 1e-9
    assert np.allclose(disc.center, [2, 1], atol=1e-10)
    c = DiscConstraint.from_jet(boundary_jet(disc))
    again, _ = solve_disc(S_B1, c, c.quadric_guess(A1, disc.N))
    assert again.distance_c0(disc) <= 1e-8


def test_perturbed_disc_differs_from_quadric_disc():
    disc, _ = solve_with_continuation(S_B1, DiscConstraint.at_center([2, 1]))
    assert disc.distance_c0(build_disc_star(StarDiscParams(0, [1]), A1)) > 1e-3


def test_continuation_degree_four_path():
    target = NormalFormSurface.perturbed(A1, P.monomial(1, 0.1, y0=1, x1=2))
    disc, reports = continuation_solve(linear_path(target), DiscConstraint.at_center([2, 1]), steps=10)
    assert reports[-1].tau == pytest.approx(1.0)
    assert verify_disc(target, disc) <= 1e-9


def test_continuation_constant_path_returns_closed_form():
    disc, reports = continuation_solve(lambda tau: Q1, DiscConstraint.at_center([2, 1]), steps=3)
    assert disc.distance_c0(build_disc_star(StarDiscParams(0, [1]), A1)) <= 1e-12
    assert all(r.iterations == 0 for r in reports[1:])


def test_continuation_large_perturbation_fails():
    # far outside the small-perturbation regime; the order cap only bounds the runtime
    target = NormalFormSurface.perturbed(A1, P.monomial(1, 5.0, y0=1, x1=1))
    with pytest.raises(ContinuationError) as exc:
        continuation_solve(linear_path(target), DiscConstraint.at_center([2, 1]), steps=10, opts=SolverOptions(max_N=64))
    assert 0 <= exc.value.last_tau < 1


def test_continuation_needs_quadric_start():
    with pytest.raises(ValueError):
        continuation_solve(lambda tau: S_B1, DiscConstraint.at_center([2, 1]))


def test_divergence_carries_history(rng):
    exact = build_disc_star(StarDiscParams(0, [1]), A1)
    with pytest.raises(DivergenceError) as exc:
        solve_disc(Q1, DiscConstraint.at_center([2, 1]), noisy(exact, rng, 0.1), SolverOptions(max_iter=1))
    assert len(exc.value.history) >= 1


def test_under_resolution_reported():
    exact = build_disc_star(StarDiscParams(0.3, [1]), A1)
    opts = SolverOptions(tail_tol=1e-40, max_N=None)
    with pytest.raises(UnderResolvedError):
        solve_disc(Q1, DiscConstraint.at_center(exact.center), exact, opts)


def test_truncation_floor_raises_order():
    S = NormalFormSurface.perturbed(A1, P.monomial(1, 0.1, y0=1, x1=2))
    c = DiscConstraint.at_center([2, 0.9])
    disc, rep = solve_disc(S, c, c.quadric_guess(A1, 32), SolverOptions(N=32))
    assert rep.N > 32 and verify_disc(S, disc) <= 1e-9
    with pytest.raises(DivergenceError):
        solve_disc(S, c, c.quadric_guess(A1, 32), SolverOptions(N=32, max_N=None))


def test_family_scan_on_quadric_matches_closed_forms():
    base = build_disc_star(StarDiscParams(0, [1]), A1)
    entries = family_scan(Q1, base, center_grid([2, 1], 0.1, 5))
    assert len(entries) == 25 and all(e.ok for e in entries)
    for e in entries:
        assert e.report.fine_residual <= 1e-9
        assert e.disc.distance_c0(build_disc_star(invert_center(e.center, A1), A1)) <= 1e-8


def test_family_scan_isotropic_point_fails_alone():
    base = build_disc_star(StarDiscParams(0, [1]), A1)
    grid = [np.array([2, 1.05]), np.array([2, 0])]
    entries = family_scan(Q1, base, grid)
    assert entries[0].ok
    assert isinstance(entries[1].error, IsotropicDirectionError)


def test_report_json_is_plain():
    _, rep = solve_disc(Q1, DiscConstraint.at_center([2, 1]), build_disc_star(StarDiscParams(0.01, [1]), A1))
    data = rep.to_json()
    assert data["converged"] is True and isinstance(data["history"], list)


def test_quadratic_contraction_skips_roundoff():
    assert quadratic_contraction([1.0, 1e-2, 1e-4, 1e-8]) == pytest.approx(1.0)
    assert quadratic_contraction([1e-9, 1e-13]) == 0.0
