"""Pushforward of lifted discs, transport of boundary jets, map reconstruction.

A holomorphic map ``F`` acts on lifted discs by
``F_*(f, g) = (F∘f, g · (dF_f)⁻¹)``.  On star-normalized discs its effect on
the boundary 1-jet at ``ζ = 1`` depends only on the 2-jet of ``F`` at 0;
:func:`pushforward_jet1` implements that, and :func:`reconstruct_map` turns
a 2-jet back into point values through the center and jet charts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .disc_core import BoundaryJet1, LiftedDisc, MapJet2, NormalFormSurface, as_point, circle_points
from .errors import DiscError, DomainError, NormalMisalignmentError, SingularDifferentialError, UnderResolvedError
from .maps import HolomorphicMap
from .quadric_discs import boundary_jet, build_disc_star, center_of_star, defining_of, invert_center, invert_jet
from .rh_solver import DiscConstraint, SolverOptions, solve_jet_pinned, solve_with_continuation

log = logging.getLogger(__name__)

_COEF_TOL = 1e-16
_LEAK_TOL = 1e-10


def _adaptive_project(f_s: np.ndarray, g_s: np.ndarray, N_min: int) -> tuple[int, float]:
    """Smallest order capturing the samples' Taylor content to round-off."""
    Ms = f_s.shape[0]
    cf = np.abs(np.fft.fft(f_s, axis=0) / Ms).max(axis=1)
    cg = np.abs(np.fft.fft(g_s, axis=0) / Ms).max(axis=1)
    half = Ms // 2
    scale = max(cf.max(), cg.max(), 1.0)
    mags = np.maximum(cf[:half], cg[:half])
    above = np.nonzero(mags > _COEF_TOL * scale)[0]
    N = max(N_min, int(above[-1]) if above.size else 0)
    # negative-frequency content measures aliasing / loss of holomorphy
    leak = float(max(cf[half:].max(), cg[half + 1 :].max(initial=0.0)))
    return min(N, half - 3), leak


def pushforward_disc(
    F: HolomorphicMap,
    d: LiftedDisc,
    N: int | None = None,
    M: int | None = None,
    return_tail: bool = False,
):
    """``F_* d``, re-projected onto Taylor modes.

    With ``N = None`` the truncation order is chosen from the decay of the
    pushed-forward samples on a grid of ``M`` points (default ``8(d.N+2)``,
    at least 1024).  Negative Fourier modes in the samples mean ``F∘h`` is
    not holomorphic on the disc (a pole of ``F`` inside ``h(Δ)``), which is
    a domain error.
    """
    Ms = M or max(1024, 1 << int(np.ceil(np.log2(8 * (d.N + 2)))))
    zeta = circle_points(Ms)
    f, g = d.evaluate(zeta)
    Ff = F(f)
    J = F.jacobian(f)
    det = np.linalg.det(J)
    if np.any(np.abs(det) < 1e-12 * np.abs(J).max(axis=(1, 2)) ** J.shape[-1]):
        raise SingularDifferentialError("dF is singular along the disc boundary")
    # g (dF)^-1 as row vectors: solve ᵗJ x = ᵗg
    gn = np.linalg.solve(np.swapaxes(J, -1, -2), g[..., None])[..., 0]
    if N is None:
        N, leak = _adaptive_project(Ff, gn, d.N)
        scale = max(np.abs(Ff).max(), np.abs(gn).max(), 1.0)
        if leak > _LEAK_TOL * scale:
            raise DomainError(f"F∘h is not holomorphic on the disc (negative modes {leak:.2e}); F has a pole on h(Δ)")
        if N >= Ms // 2 - 3:
            raise UnderResolvedError(f"pushforward needs more than {N} modes on {Ms} points")
    else:
        leak = 0.0
    out = LiftedDisc.from_samples(Ff, gn, N, M=max(d.M, 4 * (N + 2)))
    tail = out.projection_tail(Ff, gn)
    log.debug("pushforward: N=%d tail=%.3e leak=%.3e", N, tail, leak)
    if return_tail:
        return out, tail
    return out


def _star_scale(g1: np.ndarray, atol: float = 1e-8) -> complex:
    lam = g1[0]
    if np.abs(g1[1:]).max(initial=0.0) > atol or abs(lam.imag) > atol or lam.real <= atol:
        raise NormalMisalignmentError(
            f"lift at ζ=1 is {np.round(g1, 10)}, not a positive multiple of (1, 0, ..., 0)"
        )
    return lam.real


def star_renormalize(d: LiftedDisc, atol: float = 1e-8) -> LiftedDisc:
    """Rescale the lift so that ``g(1) = e0`` (positive real freedom only)."""
    _, g1 = d.evaluate(np.array(1.0 + 0j))
    return d.with_lift_scaled(1 / _star_scale(g1, atol))


def pushforward_jet1(j: MapJet2, bj: BoundaryJet1, atol: float = 1e-8) -> BoundaryJet1:
    """Boundary 1-jet of ``F_* h`` from ``j = j²F(0)`` and the 1-jet of ``h``."""
    if np.abs(j.value).max() > 1e-12:
        raise ValueError("the 2-jet must fix the origin")
    if np.abs(bj.f1).max() > atol:
        raise ValueError("boundary jet is not star-normalized (f(1) != 0)")
    L = j.linear
    if abs(np.linalg.det(L)) < 1e-14:
        raise SingularDifferentialError("linear part of the jet is singular")
    Li = np.linalg.inv(L)
    df1 = L @ bj.df1
    g1 = bj.g1 @ Li
    Qh = np.einsum("ijk,j->ik", j.quadratic, bj.df1)  # d/dζ dF_{h(ζ)} at ζ = 1
    dg1 = bj.dg1 @ Li - bj.g1 @ Li @ Qh @ Li
    lam = _star_scale(g1, atol)
    return BoundaryJet1(np.zeros_like(bj.f1), df1, g1 / lam, dg1 / lam)


@dataclass(frozen=True)
class ReconstructionOptions:
    solver: SolverOptions | None = None
    steps: int = 4


def _star_disc_with_center(surface: NormalFormSurface, z, opts: ReconstructionOptions) -> LiftedDisc:
    if surface.is_quadric:
        return build_disc_star(invert_center(z, surface.A), surface.A)
    disc, _ = solve_with_continuation(surface, DiscConstraint.at_center(z), opts=opts.solver, steps=opts.steps)
    return disc


def _center_from_jet(surface: NormalFormSurface, bj: BoundaryJet1, opts: ReconstructionOptions) -> np.ndarray:
    w, s = bj.pinning_data()
    if surface.is_quadric:
        return center_of_star(invert_jet(w, s, surface.A), surface.A)
    disc, _ = solve_jet_pinned(surface, w, s, opts=opts.solver, steps=opts.steps)
    return disc.center


def reconstruct_point(j: MapJet2, source: NormalFormSurface, target: NormalFormSurface, z, opts=None) -> np.ndarray:
    opts = opts or ReconstructionOptions()
    h = _star_disc_with_center(source, as_point(z, source.n), opts)
    bj = pushforward_jet1(j, boundary_jet(h))
    return _center_from_jet(target, bj, opts)


def reconstruct_map(
    j: MapJet2,
    source: NormalFormSurface,
    target: NormalFormSurface,
    points: Sequence,
    opts: ReconstructionOptions | None = None,
    strict: bool = True,
) -> list:
    """Values at ``points`` of the map whose 2-jet at 0 is ``j``.

    Each point goes through center disc → boundary jet → transported jet →
    jet-pinned disc → its center.  With ``strict=False`` a failing point
    yields the exception object instead of raising.
    """
    out = []
    for z in points:
        try:
            out.append(reconstruct_point(j, source, target, z, opts))
        except DiscError as exc:
            if strict:
                raise
            out.append(exc)
    return out


def _direct_values(F, points) -> np.ndarray | None:
    if isinstance(F, HolomorphicMap):
        return F(np.asarray(points, dtype=complex))
    return None


def determination_gap(
    F: HolomorphicMap,
    G: HolomorphicMap,
    surface: NormalFormSurface,
    points: Sequence,
    target: NormalFormSurface | None = None,
    opts: ReconstructionOptions | None = None,
    jet_tol: float = 1e-12,
) -> float:
    """Sup distance between the maps as seen by the 2-jet reconstruction.

    Equal 2-jets give identical reconstructions (gap ≈ 0); direct values
    are also compared, so distinct maps with distinct jets show a
    positive gap.
    """
    target = target or surface
    jF, jG = F.jet2(), G.jet2()
    pts = np.asarray(points, dtype=complex)
    recF = np.array(reconstruct_map(jF, surface, target, pts, opts))
    if jF.close_to(jG, atol=jet_tol):
        recG = recF if F is G else np.array(reconstruct_map(jG, surface, target, pts, opts))
    else:
        recG = np.array(reconstruct_map(jG, surface, target, pts, opts))
    gap = float(np.linalg.norm(recF - recG, axis=1).max())
    dF, dG = _direct_values(F, pts), _direct_values(G, pts)
    if dF is not None and dG is not None:
        gap = max(gap, float(np.linalg.norm(dF - dG, axis=1).max()))
    return gap


def interior_values(d: LiftedDisc, surface, radius_max: float = 0.9, count: int = 50, seed: int = 0) -> np.ndarray:
    """``ρ(f(ζ))`` at ``count`` random interior points ``|ζ| <= radius_max``."""
    rng = np.random.default_rng(seed)
    zeta = radius_max * np.sqrt(rng.uniform(size=count)) * np.exp(2j * np.pi * rng.uniform(size=count))
    f, _ = d.evaluate(zeta)
    return defining_of(surface).at(f)
