"""Conormal fibration equations, the matrices G and B, and Maslov indices.

The fibre coordinate ``w`` used throughout is the twisted one, ``w = ζ f*``
(the ``g`` part of a :class:`LiftedDisc`).  A point ``(z, w)`` belongs to the
fibre over ``ζ`` iff ``ρ(z) = 0`` and ``w/ζ`` is a non-zero real multiple of
``∂ρ(z)``.  With ``m_j = ρ_j / ρ_0`` (``ρ_j = ∂ρ/∂z_j``) the 2n+2 real
equations are::

    ρ̃0      = ρ(z)
    ρ̃1      = i(u - ū),          u = w0 / (2ζρ_0)
    ρ̃_{1+j}   = X_j + X̄_j,        X_j = w_j - w0 m_j
    ρ̃_{n+1+j} = i(X_j - X̄_j)

For the quadric ``ρ_0 = ½`` and these are the classical ones.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .disc_core import LiftedDisc, NormalFormSurface, eval_defining
from .errors import DegenerateFibrationError, NotOnFibrationError, UnderResolvedError
from .polynomial import DefiningPolynomial

COND_WARN = 1e10


@dataclass(frozen=True)
class FibrationJet:
    """Residuals and holomorphic derivatives ``∂ρ̃_i/∂(z, w)`` at samples."""

    residual: np.ndarray  # (..., 2n+2) real
    D: np.ndarray  # (..., 2n+2, 2n+2) complex: columns z0..zn, w0..wn

    @property
    def G(self) -> np.ndarray:
        """``∂ρ̃_i/∂(z̄, w̄)``; equal to ``conj(D)`` as every ``ρ̃_i`` is real."""
        return self.D.conj()


class FibrationEquations:
    """The 2n+2 real equations cutting out the conormal fibration of ``ρ``."""

    def __init__(self, surface):
        if isinstance(surface, NormalFormSurface):
            rho = surface.polynomial
        elif isinstance(surface, DefiningPolynomial):
            rho = surface
        else:
            rho = NormalFormSurface(surface).polynomial
        self.surface = surface
        self.rho = rho
        self.n = rho.n

    def evaluate(self, zeta, z, w, jacobian: bool = True) -> FibrationJet:
        zeta = np.asarray(zeta, dtype=complex)
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        n = self.n
        m = n + 1
        jet = eval_defining(self.rho, z, order=2 if jacobian else 1)
        grad = jet.gradient
        r0 = grad[..., 0]
        mj = grad[..., 1:] / r0[..., None]
        u = w[..., 0] / (2 * zeta * r0)
        X = w[..., 1:] - w[..., :1] * mj
        res = np.concatenate(
            [jet.value[..., None], (-2 * u.imag)[..., None], 2 * X.real, -2 * X.imag], axis=-1
        )
        if not jacobian:
            return FibrationJet(res, None)
        Hzz, Hbz = jet.hess_zz, jet.hess_zbar_z  # Hbz[k, j] = ∂²ρ/∂z̄_k∂z_j
        D = np.zeros(z.shape[:-1] + (2 * m, 2 * m), dtype=complex)
        D[..., 0, :m] = grad
        # ρ̃1
        du_dz = -(u / r0)[..., None] * Hzz[..., 0, :]
        du_dzb = -(u / r0)[..., None] * Hbz[..., :, 0]
        D[..., 1, :m] = 1j * (du_dz - du_dzb.conj())
        D[..., 1, m] = 1j / (2 * zeta * r0)
        # ρ̃_{1+j}, ρ̃_{n+1+j}
        dm_dz = (Hzz[..., 1:, :] - mj[..., :, None] * Hzz[..., :1, :]) / r0[..., None, None]
        dm_dzb = (
            np.swapaxes(Hbz[..., :, 1:], -1, -2) - mj[..., :, None] * Hbz[..., None, :, 0]
        ) / r0[..., None, None]
        w0 = w[..., 0][..., None, None]
        dX_dz = -w0 * dm_dz
        dX_dzb = -w0 * dm_dzb
        dX_dw = np.zeros(z.shape[:-1] + (n, m), dtype=complex)
        dX_dw[..., :, 0] = -mj
        dX_dw[..., :, 1:] = np.eye(n)
        D[..., 2 : 2 + n, :m] = dX_dz + dX_dzb.conj()
        D[..., 2 : 2 + n, m:] = dX_dw
        D[..., 2 + n :, :m] = 1j * (dX_dz - dX_dzb.conj())
        D[..., 2 + n :, m:] = 1j * dX_dw
        return FibrationJet(res, D)


def fibration_residual(eqs: FibrationEquations, zeta, z, w) -> np.ndarray:
    """The 2n+2 real values ``ρ̃_i(ζ)(z, w)``."""
    return eqs.evaluate(zeta, z, w, jacobian=False).residual


def on_fibration(eqs: FibrationEquations, zeta, z, w, tol: float = 1e-8) -> bool:
    w = np.asarray(w, dtype=complex)
    return bool(np.abs(fibration_residual(eqs, zeta, z, w)).max() <= tol and abs(w[0]) > tol)


def real_jacobian(D: np.ndarray) -> np.ndarray:
    """Real Jacobian w.r.t. ``(Re u_0, Im u_0, Re u_1, ...)`` of real functions.

    For real ``R`` with holomorphic derivative ``D = ∂R/∂u``,
    ``∂R/∂Re u = 2 Re D`` and ``∂R/∂Im u = -2 Im D``.
    """
    out = np.empty(D.shape[:-1] + (2 * D.shape[-1],))
    out[..., 0::2] = 2 * D.real
    out[..., 1::2] = -2 * D.imag
    return out


@dataclass(frozen=True)
class CircleMatrixFunction:
    samples: np.ndarray  # (M, d, d)
    zeta: np.ndarray
    condition: np.ndarray = field(default=None)
    warnings: tuple = ()

    def __post_init__(self):
        if self.condition is None:
            object.__setattr__(self, "condition", np.linalg.cond(self.samples))

    @property
    def M(self) -> int:
        return self.samples.shape[0]

    @property
    def max_condition(self) -> float:
        return float(self.condition.max())

    def det(self) -> np.ndarray:
        return np.linalg.det(self.samples)


def assemble_G(eqs: FibrationEquations, d: LiftedDisc, M: int | None = None) -> CircleMatrixFunction:
    """``G(ζ_k) = ∂ρ̃_i/∂(z̄, w̄)`` at ``(f(ζ_k), g(ζ_k))``."""
    d = d if M is None else d.with_M(M)
    s = d.samples
    G = eqs.evaluate(s["zeta"], s["f"], s["g"]).G
    cond = np.linalg.cond(G)
    bad = ~np.isfinite(cond) | (cond > 1 / np.finfo(float).eps)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise DegenerateFibrationError(f"G is singular at ζ = {s['zeta'][k]:.6g}", zeta=s["zeta"][k])
    return CircleMatrixFunction(G, s["zeta"], cond)


def matrix_B(G: CircleMatrixFunction) -> CircleMatrixFunction:
    """Pointwise ``B = -Ḡ⁻¹ G``."""
    B = -np.linalg.solve(G.samples.conj(), G.samples)
    notes = []
    if G.max_condition > COND_WARN:
        msg = f"ill-conditioned G (cond {G.max_condition:.3g} > {COND_WARN:g})"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    return CircleMatrixFunction(B, G.zeta, warnings=tuple(notes))


def winding_number(values: np.ndarray) -> int:
    """Winding of a closed sampled curve around 0 (argument increments)."""
    values = np.asarray(values, dtype=complex)
    if np.any(values == 0):
        raise UnderResolvedError("curve passes through 0")
    steps = np.angle(np.roll(values, -1) / values)
    if np.abs(steps).max() >= np.pi / 2:
        raise UnderResolvedError("argument jumps by >= π/2 between samples; increase M")
    total = steps.sum() / (2 * np.pi)
    k = round(total)
    if abs(total - k) > 1e-6:
        raise UnderResolvedError(f"non-integral winding {total}")
    return int(k)


def maslov_index(B: CircleMatrixFunction) -> int:
    return winding_number(B.det())


def disc_maslov_index(surface, d: LiftedDisc, M: int | None = None) -> int:
    return maslov_index(matrix_B(assemble_G(FibrationEquations(surface), d, M)))


def model_B1(n: int, zeta) -> np.ndarray:
    """Block-diagonal model loop ``diag(-1, -R, ..., -R, ζ²)``, ``R = [[0, ζ], [ζ, 0]]``."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    B = np.zeros(zeta.shape + (2 * n + 2, 2 * n + 2), dtype=complex)
    B[..., 0, 0] = -1
    for j in range(n):
        k = 1 + 2 * j
        B[..., k, k + 1] = -zeta
        B[..., k + 1, k] = -zeta
    B[..., -1, -1] = zeta**2
    return B


def model_partial_indices(n: int, M: int = 64) -> list[int]:
    """Partial indices of the model loop: ``[2, 1 (2n times), 0]``.

    Each block is read off directly (constant -> 0, the ``R`` block is
    ``ζ`` times a constant invertible matrix -> ``(1, 1)``, ``ζ²`` -> 2).
    Only nonnegativity and the sum are claims of the theory; the sum is
    cross-checked here against the winding of ``det B1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    indices = [2] + [1] * (2 * n) + [0]
    zeta = np.exp(2j * np.pi * np.arange(M) / M)
    wind = winding_number(np.linalg.det(model_B1(n, zeta)))
    if wind != sum(indices):
        raise AssertionError(f"model indices sum {sum(indices)} != winding {wind}")
    return indices


@dataclass(frozen=True)
class TotalReality:
    totally_real: bool
    angle: float  # smallest singular value of [T | iT] (orthonormal T)
    dimension: int


def total_reality_check(eqs: FibrationEquations, zeta, z, w, tol: float = 1e-8) -> TotalReality:
    """Is the fibre over ``ζ`` totally real at ``(z, w)``?

    The tangent space ``T`` is the kernel of the real Jacobian of the
    2n+2 equations; ``T ∩ iT = 0`` iff the real ``(4n+4) × (4n+4)`` matrix
    ``[T | J T]`` (``J`` = multiplication by ``i``) has full rank.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if not on_fibration(eqs, zeta, z, w, tol):
        raise NotOnFibrationError("point is not on the conormal fibration (or w0 = 0)")
    D = eqs.evaluate(zeta, z, w).D
    Jr = real_jacobian(D)
    m = Jr.shape[1]
    _, sv, Vt = np.linalg.svd(Jr)
    rank = int((sv > 1e-10 * sv[0]).sum())
    T = Vt[rank:].T  # orthonormal basis of the kernel, (m, m - rank)
    Jc = np.zeros((m, m))
    for k in range(m // 2):
        Jc[2 * k + 1, 2 * k] = 1.0
        Jc[2 * k, 2 * k + 1] = -1.0
    span = np.concatenate([T, Jc @ T], axis=1)
    angle = float(np.linalg.svd(span, compute_uv=False).min())
    return TotalReality(angle > 1e-8 and T.shape[1] * 2 == m, angle, T.shape[1])
