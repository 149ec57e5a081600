"""Normal-form reduction, anisotropic dilations and the decay probes.

``Λ_t(z0, z) = (t² z0, t z)``; ``ρ_t = t⁻² ρ∘Λ_t`` multiplies a monomial of
weighted degree ``d`` by ``t**(d - 2)`` and ``F_t = Λ_t⁻¹∘F∘Λ_t``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .disc_core import (
    DEFAULT_EPS,
    LiftedDisc,
    MapJet2,
    NormalFormSurface,
    _complex_hessians,
    as_point,
    complex_to_json,
    holder_norm,
)
from .errors import DomainError, NonHypersurfaceError
from .maps import HolomorphicMap
from .polynomial import ComplexPolynomial, DefiningPolynomial, to_real

GRAPH_WEIGHT = 4


@dataclass(frozen=True)
class NormalFormChange:
    """Holomorphic change between original and normal-form coordinates.

    ``to_original(z') = p + L (z'0 - 2q(z'_α), z'_α)``; ``to_normal`` is its
    inverse.  ``truncation_residual`` is ``max |ρ∘to_original|`` over sampled
    points of the normal-form surface at distance ``sample_radius`` from 0.
    """

    p: np.ndarray
    L: np.ndarray
    q: np.ndarray  # symmetric n×n, q(z) = ½ ᵗz q z
    to_original: HolomorphicMap
    to_normal: HolomorphicMap
    truncation_residual: float
    sample_radius: float

    def to_json(self) -> dict:
        return {
            "p": complex_to_json(self.p),
            "L": complex_to_json(self.L),
            "q": complex_to_json(self.q),
            "to_original": self.to_original.to_json(),
            "to_normal": self.to_normal.to_json(),
            "truncation_residual": self.truncation_residual,
            "sample_radius": self.sample_radius,
        }


def _linear_part(rho: DefiningPolynomial, X: np.ndarray) -> np.ndarray:
    _, g, _ = rho.real_derivatives(X, order=1)
    return 0.5 * (g[0::2] - 1j * g[1::2])


def _affine_map(L: np.ndarray, b: np.ndarray) -> list[ComplexPolynomial]:
    return [ComplexPolynomial.linear(L[i], b[i]) for i in range(L.shape[0])]


def _graph_solve(rho: DefiningPolynomial, max_weight: int = GRAPH_WEIGHT) -> DefiningPolynomial:
    """Rewrite ``x0 + R(x0, y0, z) = 0`` as ``x0 - ψ(y0, z) = 0``.

    Fixed point ``ψ ← -R0 - trunc(R(ψ) - R0)`` with ``R0 = R|_{x0=0}``; only
    terms produced by substituting ``ψ`` for ``x0`` are truncated at
    ``max_weight``, so an input without ``x0`` in ``R`` is returned exactly.
    """
    n = rho.n
    x0 = DefiningPolynomial.variable(n, 0)
    R = rho - x0
    if not R.depends_on(0):
        return rho
    R0 = R.select(lambda e: e[0] == 0)
    Rx = R - R0
    psi = -R0.truncate(max_weight)
    variables = [DefiningPolynomial.variable(n, k) for k in range(2 * n + 2)]
    for _ in range(2 * max_weight):
        subs = [psi] + variables[1:]
        new = -R0 - Rx.substitute(subs).truncate(max_weight)
        if new.allclose(psi, 1e-15):
            psi = new
            break
        psi = new
    return x0 - psi


def to_normal_form(rho: DefiningPolynomial, p=None, sample_radius: float = 0.05, seed: int = 0):
    """Bring ``{ρ = 0}`` near ``p`` to normal form; returns ``(surface, change)``."""
    n = rho.n
    m = n + 1
    p = np.zeros(m, dtype=complex) if p is None else as_point(p, n)
    X = to_real(p)
    if abs(float(rho(X))) > 1e-10:
        raise DomainError(f"ρ(p) = {float(rho(X)):.3g}: p is not on the surface")
    omega = _linear_part(rho, X)
    if np.abs(omega).max() < 1e-12:
        raise NonHypersurfaceError("dρ vanishes at p")
    # z' = P (z - p), first row 2ω so that the linear part becomes x0'
    k = int(np.argmax(np.abs(omega)))
    keep = [i for i in range(m) if i != k]
    P = np.vstack([2 * omega[None, :], np.eye(m, dtype=complex)[keep]])
    L = np.linalg.inv(P)
    rho1 = rho.compose_holomorphic(_affine_map(L, p))
    lin = rho1.select(lambda e: sum(e) == 1)
    rho1 = rho1 - rho1.select(lambda e: sum(e) == 0) - lin + DefiningPolynomial.variable(n, 0)
    rho2 = _graph_solve(rho1)
    w2 = rho2.select(lambda e: DefiningPolynomial.weight(e) == 2 and not e[0])
    Hzz = _complex_hessians(w2, n)["zz"][1:, 1:]
    q = Hzz  # pluriharmonic part is 2 Re(½ ᵗz Hzz z)
    zs = [ComplexPolynomial.variable(m, j) for j in range(m)]
    qpoly = ComplexPolynomial.constant(m, 0)
    for i in range(n):
        for j in range(n):
            if q[i, j]:
                qpoly = qpoly + zs[i + 1] * zs[j + 1] * (0.5 * q[i, j])
    shift = [zs[0] - qpoly * 2] + zs[1:]
    rho3 = rho2.compose_holomorphic(shift)
    surface = NormalFormSurface.from_polynomial(rho3, tol=1e-10)
    # compose the changes
    u_of_z = shift  # u = (z'0 - 2q, z'_α)
    orig = [
        sum((u_of_z[j] * L[i, j] for j in range(m)), ComplexPolynomial.constant(m, p[i])) for i in range(m)
    ]
    to_original = HolomorphicMap(orig, name="to_original")
    Pn = [ComplexPolynomial.linear(P[i], -(P[i] @ p)) for i in range(m)]  # u = P(z - p)
    back = [Pn[0] + qpoly.substitute(Pn) * 2] + Pn[1:]
    to_normal = HolomorphicMap(back, name="to_normal", inverse=to_original)
    to_original.inverse = to_normal
    residual = _truncation_residual(rho, surface, to_original, sample_radius, seed)
    return surface, NormalFormChange(p, L, q, to_original, to_normal, residual, sample_radius)


def surface_points(surface: NormalFormSurface, count: int, radius: float, seed: int = 0) -> np.ndarray:
    """Points of ``{ρ = 0}`` (``ρ`` is ``x0`` plus an ``x0``-free remainder)."""
    rng = np.random.default_rng(seed)
    n = surface.n
    X = np.zeros((count, 2 * n + 2))
    X[:, 1:] = rng.uniform(-radius, radius, size=(count, 2 * n + 1))
    X[:, 0] = -(surface.polynomial - DefiningPolynomial.variable(n, 0))(X)
    return X[:, 0::2] + 1j * X[:, 1::2]


def _truncation_residual(rho, surface, to_original, radius, seed) -> float:
    z = surface_points(surface, 100, radius, seed)
    return float(np.abs(rho.at(to_original(z))).max())


# ---------------------------------------------------------------------------
# Dilations
# ---------------------------------------------------------------------------
def dilate_defining(surface: NormalFormSurface, t: float) -> NormalFormSurface:
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    return NormalFormSurface.from_polynomial(surface.polynomial.dilate(t))


def dilate_map(F, t: float):
    """``Λ_t⁻¹∘F∘Λ_t`` for a :class:`HolomorphicMap` or a :class:`MapJet2`."""
    if isinstance(F, MapJet2):
        return F.dilate(t)
    if isinstance(F, HolomorphicMap):
        return F.dilate(t)
    raise TypeError("expected HolomorphicMap or MapJet2")


def _multi_indices(d: int, max_order: int):
    for order in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(d), order):
            yield combo


def c4_distance(surface: NormalFormSurface, ball_radius: float = 1.0, grid: int = 9, order: int = 4) -> float:
    """Grid sup over the real ball of all derivatives of ``ρ - r`` up to ``order``."""
    pert = surface.perturbation
    d = 2 * surface.n + 2
    if pert.is_zero:
        return 0.0
    axis = np.linspace(-ball_radius, ball_radius, grid)
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    pts = pts[np.linalg.norm(pts, axis=1) <= ball_radius * (1 + 1e-12)]
    best = 0.0
    cache: dict[tuple, DefiningPolynomial] = {(): pert}
    for combo in _multi_indices(d, order):
        if combo not in cache:
            cache[combo] = cache[combo[:-1]].derivative(combo[-1])
        poly = cache[combo]
        if poly.is_zero:
            continue
        best = max(best, float(np.abs(poly(pts)).max()))
    return best


def pushforward_decay_probe(F: HolomorphicMap, disc: LiftedDisc, t_list, eps: float = DEFAULT_EPS, M: int | None = None):
    """``[(t, ‖F_t* disc - disc‖_{C^{1,eps}})]`` for each ``t``."""
    from .jet_determination import pushforward_disc

    jet = F.jet2()
    if not jet.close_to(MapJet2.identity(F.n), atol=1e-12):
        raise ValueError("F must agree with the identity to order 2 at 0")
    base = disc if M is None else disc.with_M(M)
    out = []
    for t in t_list:
        Ft = dilate_map(F, t)
        pushed = pushforward_disc(Ft, base).with_M(base.M)
        diff = np.concatenate(
            [pushed.samples["f"] - base.samples["f"], pushed.samples["g"] - base.samples["g"]], axis=1
        )
        out.append((float(t), holder_norm(diff, 1, eps)))
    return out


def loglog_slope(series) -> float:
    t = np.log([s[0] for s in series])
    y = np.log([s[1] for s in series])
    return float(np.polyfit(t, y, 1)[0])
