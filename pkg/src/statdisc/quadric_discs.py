"""Closed-form stationary discs of the hyperquadric ``Re z0 = ᵗz̄Az``.

Two families are built here:

* the full family, parametrised by ``(a, v, w, y0, b)``;
* the star-normalized subfamily (``h(1) = 0``, ``h*(1) = e0``), parametrised
  by ``(a, v)``, together with its exact center and boundary-jet charts.

The rational parts ``1/(1 - aζ)`` are expanded to a truncation order chosen
from ``|a|`` so that the dropped geometric tail is below round-off.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .disc_core import (
    DEFAULT_M,
    DEFAULT_N,
    BoundaryJet1,
    HermitianForm,
    LiftedDisc,
    as_point,
    circle_points,
    complex_from_json,
    complex_to_json,
    eval_defining,
)
from .errors import (
    AdmissibleRegionError,
    InconsistentJetError,
    InvalidRotationError,
    IsotropicDirectionError,
    NearBoundaryParameterError,
)
from .maps import HolomorphicMap
from .polynomial import ComplexPolynomial, DefiningPolynomial

A_CUTOFF = 1 - 1e-9
A_WARN = 0.95
_TAIL_TOL = 1e-17


@dataclass(frozen=True)
class FullDiscParams:
    a: complex
    v: np.ndarray
    w: np.ndarray
    y0: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "v", np.atleast_1d(np.asarray(self.v, dtype=complex)))
        object.__setattr__(self, "w", np.atleast_1d(np.asarray(self.w, dtype=complex)))
        object.__setattr__(self, "y0", float(self.y0))
        object.__setattr__(self, "b", float(self.b))
        if self.v.shape != self.w.shape:
            raise ValueError("v and w must have the same length n")
        if abs(self.a) >= 1:
            raise NearBoundaryParameterError("|a| must be < 1")
        if not np.linalg.norm(self.w) > 0:
            raise ValueError("w must be nonzero")
        if self.b == 0:
            raise ValueError("b must be nonzero")

    def to_json(self) -> dict:
        return {
            "a": complex_to_json(self.a),
            "v": complex_to_json(self.v),
            "w": complex_to_json(self.w),
            "y0": self.y0,
            "b": self.b,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> FullDiscParams:
        return cls(
            complex_from_json(data["a"]),
            np.atleast_1d(complex_from_json(data["v"])),
            np.atleast_1d(complex_from_json(data["w"])),
            data.get("y0", 0.0),
            data.get("b", 1.0),
        )


@dataclass(frozen=True)
class StarDiscParams:
    a: complex
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "v", np.atleast_1d(np.asarray(self.v, dtype=complex)))
        if abs(self.a) >= 1:
            raise NearBoundaryParameterError("|a| must be < 1")
        if not np.linalg.norm(self.v) > 0:
            raise ValueError("v must be nonzero")

    @property
    def gamma(self) -> complex:
        a = self.a
        return 2 * (1 - a) / (1 - abs(a) ** 2)

    def close_to(self, other: StarDiscParams, atol: float = 1e-10) -> bool:
        return abs(self.a - other.a) <= atol and np.allclose(self.v, other.v, atol=atol, rtol=0)

    def to_json(self) -> dict:
        return {"a": complex_to_json(self.a), "v": complex_to_json(self.v)}

    @classmethod
    def from_json(cls, data: Mapping) -> StarDiscParams:
        return cls(complex_from_json(data["a"]), np.atleast_1d(complex_from_json(data["v"])))


def truncation_order(a: complex, N: int | None = None) -> int:
    """Taylor order needed to resolve ``1/(1 - aζ)`` to round-off."""
    r = abs(a)
    if r >= A_CUTOFF:
        raise NearBoundaryParameterError(f"|a| = {r:.12g} too close to 1 for a truncated representation")
    if r > A_WARN:
        warnings.warn(f"|a| = {r:.3f} > {A_WARN}: slow geometric decay, large truncation order", stacklevel=3)
    if N is not None:
        return N
    if r < 1e-300:
        return DEFAULT_N
    need = math.ceil(math.log(_TAIL_TOL) / math.log(r)) + 2
    return max(DEFAULT_N, need)


def grid_size(N: int, M: int | None = None) -> int:
    if M is not None:
        return M
    return max(DEFAULT_M, 1 << math.ceil(math.log2(4 * (N + 2))))


def _geometric(a: complex, N: int) -> np.ndarray:
    """Taylor coefficients of ``1/(1 - aζ)`` up to ``ζ**N``."""
    return a ** np.arange(N + 1)


def _poly_mul(p: np.ndarray, q: np.ndarray, size: int) -> np.ndarray:
    """Product of coefficient columns truncated to ``size`` rows."""
    out = np.zeros((size,) + np.broadcast_shapes(p.shape[1:], q.shape[1:]), dtype=complex)
    for k, c in enumerate(p):
        if k >= size:
            break
        m = min(size - k, q.shape[0])
        out[k : k + m] += c * q[:m]
    return out


def _col(x) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1, 1)


def build_disc_full(p: FullDiscParams, A, N: int | None = None, M: int | None = None) -> LiftedDisc:
    """Disc of the full family with lift ``b(ζ - ā)(1 - aζ)(½, -ᵗh̄_α A)``."""
    A = HermitianForm.coerce(A)
    if p.v.shape[0] != A.n:
        raise ValueError("parameter dimension does not match A")
    N = truncation_order(p.a, N)
    M = grid_size(N, M)
    a, v, w = p.a, p.v, p.w
    geo = _geometric(a, N)
    # ζ/(1 - aζ) and (1 + aζ)/(1 - aζ)
    shift = np.concatenate([[0], geo[:-1]])
    mobius = np.concatenate([[1], 2 * a * geo[:-1]])
    vAv, vAw, wAw = A(v), A.pairing(v, w), A(w)
    f = np.zeros((N + 1, A.n + 1), dtype=complex)
    f[:, 0] = 2 * vAw * shift + wAw / (1 - abs(a) ** 2) * mobius
    f[0, 0] += vAv + 1j * p.y0
    f[:, 1:] = shift[:, None] * w[None, :]
    f[0, 1:] += v
    # g = b(1 - aζ)(½(ζ - ā), -((ζ - ā)v̄ + w̄)A)
    g = np.zeros((N + 2, A.n + 1), dtype=complex)
    one_minus = np.array([1, -a])
    g[:3, 0] = p.b * _poly_mul(_col(one_minus), _col([-np.conj(a) / 2, 0.5]), 3)[:, 0]
    vA = v.conj() @ A.A
    wA = w.conj() @ A.A
    lin = np.stack([-np.conj(a) * vA + wA, vA])  # (ζ - ā)v̄A + w̄A
    g[:3, 1:] = -p.b * _poly_mul(_col(one_minus), lin, 3)
    return LiftedDisc(f, g, M)


def build_disc_star(p: StarDiscParams, A, N: int | None = None, M: int | None = None) -> LiftedDisc:
    A = HermitianForm.coerce(A)
    if p.v.shape[0] != A.n:
        raise ValueError("parameter dimension does not match A")
    N = truncation_order(p.a, N)
    M = grid_size(N, M)
    a, v = p.a, p.v
    geo = _geometric(a, N)
    ratio = geo - np.concatenate([[0], geo[:-1]])  # (1 - ζ)/(1 - aζ)
    head = np.concatenate([[p.gamma * A(v)], v])
    f = ratio[:, None] * head[None, :]
    scale = 2 / abs(1 - a) ** 2
    g = np.zeros((N + 2, A.n + 1), dtype=complex)
    one_minus = np.array([1, -a])
    g[:3, 0] = scale / 2 * _poly_mul(_col(one_minus), _col([-np.conj(a), 1]), 3)[:, 0]
    vA = v.conj() @ A.A
    g[:3, 1:] = scale * _poly_mul(_col(one_minus), np.stack([vA, -vA]), 3)
    return LiftedDisc(f, g, M)


def center_of_star(p: StarDiscParams, A) -> np.ndarray:
    A = HermitianForm.coerce(A)
    return np.concatenate([[p.gamma * A(p.v)], p.v])


def _gamma_to_a(gamma: complex) -> complex:
    return (2 * gamma - gamma**2) / abs(gamma) ** 2


def invert_center(z, A) -> StarDiscParams:
    A = HermitianForm.coerce(A)
    z = as_point(z, A.n)
    v = z[1:]
    q = A(v)
    if abs(q) <= 1e-14 * max(1.0, float(np.linalg.norm(v)) ** 2):
        raise IsotropicDirectionError("ᵗv̄Av = 0: no star disc has this center")
    gamma = z[0] / q
    if gamma.real <= 1:
        raise AdmissibleRegionError(f"Re γ = {gamma.real:.6g} <= 1: point outside the center image")
    return StarDiscParams(_gamma_to_a(gamma), v)


def boundary_jet(d: LiftedDisc) -> BoundaryJet1:
    f1, g1 = d.evaluate(np.array(1.0 + 0j))
    df1, dg1 = d.evaluate(np.array(1.0 + 0j), derivative=1)
    return BoundaryJet1(f1, df1, g1, dg1)


def boundary_jet_closed_form(p: StarDiscParams, A) -> BoundaryJet1:
    """``h'(1)`` and ``g'(1)`` of a star disc, from the parameters."""
    A = HermitianForm.coerce(A)
    a, v = p.a, p.v
    n = A.n
    df1 = np.concatenate([[-2 * A(v) / (1 - abs(a) ** 2)], -v / (1 - a)])
    dg1 = np.concatenate([[(1 + abs(a) ** 2 - 2 * a) / abs(1 - a) ** 2], -2 * (v.conj() @ A.A) / (1 - np.conj(a))])
    e0 = np.zeros(n + 1, dtype=complex)
    e0[0] = 1
    return BoundaryJet1(np.zeros(n + 1), df1, e0, dg1)


def invert_jet(w_alpha, s0: complex, A) -> StarDiscParams:
    """Star disc with ``f'_α(1) = w_alpha`` and ``f'_0(1) g'_0(1) = s0``."""
    A = HermitianForm.coerce(A)
    w_alpha = np.atleast_1d(np.asarray(w_alpha, dtype=complex))
    if w_alpha.shape != (A.n,):
        raise ValueError("w_alpha has the wrong length")
    q = A(w_alpha)
    if abs(q) <= 1e-14 * max(1.0, float(np.linalg.norm(w_alpha)) ** 2) or not np.any(w_alpha):
        raise IsotropicDirectionError("ᵗw̄Aw = 0: jet chart not invertible")
    gamma = 1 - complex(s0) / (2 * q)
    if gamma.real <= 1:
        raise InconsistentJetError(f"Re γ = {gamma.real:.6g} <= 1: no star disc has this jet")
    a = _gamma_to_a(gamma)
    return StarDiscParams(a, -(1 - a) * w_alpha)


# ---------------------------------------------------------------------------
# Residual checks
# ---------------------------------------------------------------------------
def defining_of(surface_or_A) -> DefiningPolynomial:
    if isinstance(surface_or_A, DefiningPolynomial):
        return surface_or_A
    if hasattr(surface_or_A, "polynomial"):
        return surface_or_A.polynomial
    return DefiningPolynomial.quadric(HermitianForm.coerce(surface_or_A).A)


def gluing_residual(d: LiftedDisc, surface, M: int = 512) -> float:
    """``max |ρ(f(ζ))|`` over ``M`` boundary points."""
    rho = defining_of(surface)
    f, _ = d.evaluate(circle_points(M))
    return float(np.max(np.abs(rho.at(f))))


@dataclass(frozen=True)
class ConormalityReport:
    proportionality: float
    imaginary: float
    min_factor: float

    def ok(self, tol: float = 1e-10) -> bool:
        return self.proportionality <= tol and self.imaginary <= tol and self.min_factor > tol


def conormality_residual(d: LiftedDisc, surface, M: int = 512) -> ConormalityReport:
    """Check ``g(ζ) = ζ c(ζ) ∂ρ(f(ζ))`` with ``c`` real and nonzero."""
    rho = defining_of(surface)
    zeta = circle_points(M)
    f, g = d.evaluate(zeta)
    u = zeta[:, None] * eval_defining(rho, f).gradient
    c = np.einsum("ki,ki->k", u.conj(), g) / np.einsum("ki,ki->k", u.conj(), u).real
    prop = np.linalg.norm(g - c[:, None] * u, axis=1)
    return ConormalityReport(float(prop.max()), float(np.abs(c.imag).max()), float(np.abs(c).min()))


# ---------------------------------------------------------------------------
# Automorphisms
# ---------------------------------------------------------------------------
def _heisenberg_map(A: HermitianForm, w: np.ndarray, s: float) -> HolomorphicMap:
    n = A.n
    m = n + 1
    wA = w.conj() @ A.A
    L = np.eye(m, dtype=complex)
    L[0, 1:] = 2 * wA
    b = np.concatenate([[A(w) + 1j * s], w])
    return HolomorphicMap.affine(L, b, name="heisenberg")


def _inverted_heisenberg_map(A: HermitianForm, c: np.ndarray, s: float) -> HolomorphicMap:
    n = A.n
    m = n + 1
    z = [ComplexPolynomial.variable(m, j) for j in range(m)]
    cA = c.conj() @ A.A
    den = ComplexPolynomial.linear(np.concatenate([[A(c) + 1j * s], 2 * cA]), 1.0)
    comps = [z[0]] + [z[j] + z[0] * c[j - 1] for j in range(1, m)]
    return HolomorphicMap(comps, den, name="inverted_heisenberg")


def quadric_automorphism(kind: str, A, **params) -> HolomorphicMap:
    """Automorphism of ``Q^A`` with exact jets and exact inverse.

    ``kind`` is one of

    * ``"heisenberg"`` (``w``, ``s``): ``(z0 + 2ᵗw̄Az + ᵗw̄Aw + is, z + w)``;
    * ``"dilation"`` (``t > 0``): ``(t² z0, t z)``;
    * ``"rotation"`` (``U`` with ``ᵗŪAU = A``): ``(z0, Uz)``;
    * ``"inverted_heisenberg"`` (``c``, ``s``): ``(z0, z + c z0) / δ`` with
      ``δ = 1 + 2ᵗc̄Az + (ᵗc̄Ac + is) z0``.  It fixes 0 and has a non-zero
      quadratic part, and ``r∘F = r / |δ|²``.
    """
    A = HermitianForm.coerce(A)
    n = A.n
    if kind == "heisenberg":
        w = np.atleast_1d(np.asarray(params.get("w", np.zeros(n)), dtype=complex))
        s = float(params.get("s", 0.0))
        F = _heisenberg_map(A, w, s)
        F.inverse = _heisenberg_map(A, -w, -s)
    elif kind == "inverted_heisenberg":
        c = np.atleast_1d(np.asarray(params.get("c", np.zeros(n)), dtype=complex))
        s = float(params.get("s", 0.0))
        F = _inverted_heisenberg_map(A, c, s)
        F.inverse = _inverted_heisenberg_map(A, -c, -s)
    elif kind == "dilation":
        t = float(params["t"])
        if not t > 0:
            raise ValueError("dilation needs t > 0")
        w = np.array([t**2] + [t] * n, dtype=complex)
        F = HolomorphicMap.affine(np.diag(w), name="dilation")
        F.inverse = HolomorphicMap.affine(np.diag(1 / w), name="dilation")
    elif kind == "rotation":
        U = np.atleast_2d(np.asarray(params["U"], dtype=complex))
        if U.shape != (n, n) or not np.allclose(U.conj().T @ A.A @ U, A.A, atol=1e-10, rtol=0):
            raise InvalidRotationError("rotation must satisfy ᵗŪAU = A")
        L = np.eye(n + 1, dtype=complex)
        L[1:, 1:] = U
        F = HolomorphicMap.affine(L, name="rotation")
        F.inverse = HolomorphicMap.affine(np.linalg.inv(L), name="rotation")
    else:
        raise ValueError(f"unknown automorphism kind {kind!r}")
    F.inverse.inverse = F
    return F


def random_star_params(rng: np.random.Generator, A, a_max: float = 0.9) -> StarDiscParams:
    """Random ``(a, v)`` with ``|a| <= a_max`` and ``ᵗv̄Av`` away from 0."""
    A = HermitianForm.coerce(A)
    while True:
        a = a_max * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        v = rng.normal(size=A.n) + 1j * rng.normal(size=A.n)
        if abs(A(v)) > 0.1 * np.linalg.norm(v) ** 2:
            return StarDiscParams(a, v)


def random_full_params(rng: np.random.Generator, n: int, a_max: float = 0.9) -> FullDiscParams:
    """Random ``(a, v, w, y0, b)`` with ``|a| <= a_max``."""
    a = a_max * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0)
    return FullDiscParams(a, v, w, float(rng.normal()), float(b))
