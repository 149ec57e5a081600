"""Shared domain types and unit-circle utilities.

Conventions
-----------
* Points of C^{n+1} are complex arrays with last axis ``n+1``; index 0 is
  ``z0`` and ``1..n`` are ``z_alpha``.
* Covectors are complex row vectors of the same length; the complex
  derivative is ``∂/∂z = (∂/∂x - i ∂/∂y) / 2``.
* A lifted disc is stored as Taylor coefficients of ``f`` and of
  ``g = ζ f*``; the coefficient of ``ζ**k`` in ``g`` is ``d_{k-1}`` of the
  meromorphic fibre ``f*``, so holomorphy of ``g`` is structural.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import InvalidGridError, InvalidHermitianFormError, NotNormalFormError
from .maps import HolomorphicMap, MapJet2  # noqa: F401  (re-exported domain types)
from .polynomial import DefiningPolynomial, to_real

DEFAULT_M = 256
DEFAULT_N = 32
DEFAULT_EPS = 0.5
SINGULARITY_TOL = 1e-12


def circle_points(M: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(M) / M)


def as_point(z, n: int | None = None) -> np.ndarray:
    """Validate a point of C^{n+1} (``n >= 1``)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1 or z.shape[0] < 2:
        raise ValueError("a point of C^{n+1} needs n+1 >= 2 complex coordinates")
    if n is not None and z.shape[0] != n + 1:
        raise ValueError(f"expected {n + 1} coordinates, got {z.shape[0]}")
    return z


def complex_to_json(z) -> list:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return [float(z.real), float(z.imag)]
    return [complex_to_json(v) for v in z]


def complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# Hermitian forms and surfaces
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class HermitianForm:
    """Invertible Hermitian matrix of a model hyperquadric."""

    A: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidHermitianFormError("A must be square")
        if not np.allclose(A, A.conj().T, atol=1e-12):
            raise InvalidHermitianFormError("A must be Hermitian")
        if abs(np.linalg.det(A)) <= SINGULARITY_TOL:
            raise InvalidHermitianFormError("A must be invertible (Levi non-degenerate)")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @classmethod
    def coerce(cls, A) -> HermitianForm:
        return A if isinstance(A, HermitianForm) else cls(A)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def __call__(self, v) -> np.ndarray:
        """``ᵗv̄Av`` (real), vectorised over leading axes."""
        v = np.asarray(v, dtype=complex)
        return np.einsum("...i,ij,...j->...", v.conj(), self.A, v).real

    def pairing(self, u, v) -> np.ndarray:
        """``ᵗūAv``."""
        return np.einsum("...i,ij,...j->...", np.conj(u), self.A, v)

    @property
    def signature(self) -> tuple[int, int]:
        ev = np.linalg.eigvalsh(self.A)
        return int((ev > 0).sum()), int((ev < 0).sum())

    def __eq__(self, other):
        return isinstance(other, HermitianForm) and np.array_equal(self.A, other.A)

    def __hash__(self):
        return hash(self.A.tobytes())


@dataclass(frozen=True, eq=False)
class NormalFormSurface:
    """``ρ = x0 - ᵗz̄Az + b0 y0² + Σ(b_j z_j + b̄_j z̄_j) y0 + higher``."""

    A: HermitianForm
    b0: float = 0.0
    b: np.ndarray | None = None
    higher: DefiningPolynomial | None = None

    def __post_init__(self):
        A = HermitianForm.coerce(self.A)
        object.__setattr__(self, "A", A)
        n = A.n
        b = np.zeros(n, dtype=complex) if self.b is None else np.asarray(self.b, dtype=complex).reshape(n)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "b0", float(self.b0))
        h = DefiningPolynomial(n) if self.higher is None else self.higher
        if h.n != n:
            raise ValueError("higher-order part lives in the wrong dimension")
        if h.depends_on(0):
            raise NotNormalFormError("higher-order part may not depend on x0")
        if h.terms and h.min_weight < 3:
            raise NotNormalFormError("higher-order part must have weighted degree >= 3")
        object.__setattr__(self, "higher", h)

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def is_quadric(self) -> bool:
        return self.b0 == 0 and not np.any(self.b) and self.higher.is_zero

    def quadric(self) -> NormalFormSurface:
        return NormalFormSurface(self.A)

    @cached_property
    def polynomial(self) -> DefiningPolynomial:
        n = self.n
        P = DefiningPolynomial
        rho = P.quadric(self.A.A)
        if self.b0:
            rho = rho + P.monomial(n, self.b0, y0=2)
        for j, bj in enumerate(self.b, start=1):
            if bj:
                rho = rho + P.monomial(n, 2 * bj.real, y0=1, **{f"x{j}": 1})
                rho = rho + P.monomial(n, -2 * bj.imag, y0=1, **{f"y{j}": 1})
        return rho + self.higher

    @cached_property
    def perturbation(self) -> DefiningPolynomial:
        """``ρ - r``."""
        return self.polynomial - DefiningPolynomial.quadric(self.A.A)

    @classmethod
    def from_polynomial(cls, rho: DefiningPolynomial, tol: float = 1e-12) -> NormalFormSurface:
        """Read off normal-form data; raises if ``rho`` is not in normal form."""
        n = rho.n
        W = DefiningPolynomial.weight
        lin = rho.select(lambda e: sum(e) <= 1)
        if not lin.allclose(DefiningPolynomial.variable(n, 0), tol):
            raise NotNormalFormError("linear part must be exactly x0 (run to_normal_form first)")
        rest = rho - lin
        if rest.depends_on(0):
            raise NotNormalFormError("x0 may only appear linearly")
        w2 = rest.select(lambda e: W(e) == 2)
        if any(e[1] for e in w2.terms):
            raise NotNormalFormError("linear y0 term present")
        H = _complex_hessians(w2, n)
        A = -H["zbar_z"][1:, 1:]
        q = H["zz"][1:, 1:]
        if np.abs(q).max(initial=0) > tol:
            raise NotNormalFormError("pluriharmonic quadratic term q(z)+q̄(z) present")
        y0sq = [0] * (2 * n + 2)
        y0sq[1] = 2
        b0 = rest.terms.get(tuple(y0sq), 0.0)
        b = np.zeros(n, dtype=complex)
        skip = {tuple(y0sq)}
        for j in range(1, n + 1):
            ex = [0] * (2 * n + 2)
            ex[1] = 1
            ex[2 * j] = 1
            ey = [0] * (2 * n + 2)
            ey[1] = 1
            ey[2 * j + 1] = 1
            cx, cy = rest.terms.get(tuple(ex), 0.0), rest.terms.get(tuple(ey), 0.0)
            b[j - 1] = (cx - 1j * cy) / 2
            skip |= {tuple(ex), tuple(ey)}
        higher = rest.select(lambda e: W(e) >= 3 and e not in skip)
        return cls(HermitianForm(0.5 * (A + A.conj().T)), b0, b, higher)

    @classmethod
    def perturbed(cls, A, extra: DefiningPolynomial) -> NormalFormSurface:
        A = HermitianForm.coerce(A)
        return cls.from_polynomial(DefiningPolynomial.quadric(A.A) + extra)

    def to_json(self) -> dict:
        return self.polynomial.to_json()

    @classmethod
    def from_json(cls, data: Mapping) -> NormalFormSurface:
        return cls.from_polynomial(DefiningPolynomial.from_json(data))


def _complex_hessians(p: DefiningPolynomial, n: int, X: np.ndarray | None = None) -> dict:
    """Complex Hessian blocks of ``p`` at real point ``X`` (default 0)."""
    X = np.zeros(2 * n + 2) if X is None else X
    _, _, H = p.real_derivatives(X)
    return _wirtinger_hessians(H)


def _wirtinger_hessians(H: np.ndarray) -> dict:
    Hxx = H[..., 0::2, 0::2]
    Hyy = H[..., 1::2, 1::2]
    Hxy = H[..., 0::2, 1::2]  # [i, j] = ρ_{x_i y_j}
    Hyx = H[..., 1::2, 0::2]  # [i, j] = ρ_{y_i x_j}
    zz = 0.25 * (Hxx - Hyy - 1j * (Hxy + Hyx))
    # [i, j] = ∂²ρ/∂z̄_i∂z_j
    zbar_z = 0.25 * (Hxx + Hyy + 1j * (Hyx - Hxy))
    return {"zz": zz, "zbar_z": zbar_z}


# ---------------------------------------------------------------------------
# Defining-function calculus
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DefiningJet:
    value: np.ndarray
    gradient: np.ndarray | None = None  # ∂ρ/∂z_j as covector
    hess_zz: np.ndarray | None = None  # ∂²ρ/∂z_i∂z_j
    hess_zbar_z: np.ndarray | None = None  # [i, j] = ∂²ρ/∂z̄_i∂z_j


def eval_defining(rho: DefiningPolynomial, z, order: int = 1) -> DefiningJet:
    """Value, (1,0)-gradient and complex Hessian blocks of ``ρ`` at ``z``."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    X = to_real(z)
    if order == 0:
        return DefiningJet(rho(X))
    val, g, H = rho.real_derivatives(X, order=order)
    grad = 0.5 * (g[..., 0::2] - 1j * g[..., 1::2])
    if order == 1:
        return DefiningJet(val, grad)
    blocks = _wirtinger_hessians(H)
    return DefiningJet(val, grad, blocks["zz"], blocks["zbar_z"])


# ---------------------------------------------------------------------------
# Circle sampling, spectral calculus, Hölder norms
# ---------------------------------------------------------------------------
def spectral_derivative(samples: np.ndarray) -> np.ndarray:
    """``d/dζ`` along the unit circle of uniformly sampled values.

    Computed as ``(d/dθ) / (iζ)``; for boundary values of a holomorphic
    function this is the complex derivative.
    """
    s = np.asarray(samples, dtype=complex)
    M = s.shape[0]
    k = np.fft.fftfreq(M, 1.0 / M)
    if M % 2 == 0:
        k[M // 2] = 0.0
    shape = (M,) + (1,) * (s.ndim - 1)
    dtheta = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(s, axis=0), axis=0)
    return dtheta / (1j * circle_points(M).reshape(shape))


def holder_seminorm(samples: np.ndarray, eps: float) -> float:
    """``max_{p≠q} ‖s_p - s_q‖ / |ζ_p - ζ_q|**eps`` over a uniform grid."""
    s = np.asarray(samples)
    s = s.reshape(s.shape[0], -1)
    M = s.shape[0]
    zeta = circle_points(M)
    best = 0.0
    chunk = max(1, 2_000_000 // max(1, M * s.shape[1]))
    for start in range(0, M, chunk):
        rows = slice(start, min(M, start + chunk))
        diff = np.linalg.norm(s[rows, None, :] - s[None, :, :], axis=-1)
        dist = np.abs(zeta[rows, None] - zeta[None, :])
        mask = dist > 0
        ratio = np.where(mask, diff / np.where(mask, dist, 1.0) ** eps, 0.0)
        best = max(best, float(ratio.max()))
    return best


def holder_norm(samples, k: int = 0, eps: float = DEFAULT_EPS) -> float:
    """C^{k,eps} norm of a curve sampled on a uniform grid of the circle.

    ``samples`` has shape ``(M,)`` or ``(M, d)`` (real or complex; C^d is
    normed as R^{2d}).  For ``k == 1`` the derivative is the spectral
    ``d/dζ``.  Both the curve and (for ``k == 1``) its derivative contribute
    a sup norm and an ``eps``-Hölder seminorm.
    """
    s = np.asarray(samples)
    if s.ndim == 1:
        s = s[:, None]
    M = s.shape[0]
    if M < 8:
        raise InvalidGridError(f"need at least 8 samples, got {M}")
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    total = 0.0
    curve = s
    for level in range(k + 1):
        if level:
            curve = spectral_derivative(curve)
        total += float(np.linalg.norm(curve, axis=-1).max()) + holder_seminorm(curve, eps)
    return total


def _polyval(coeffs: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    zeta = np.asarray(zeta, dtype=complex)
    out = np.zeros(zeta.shape + coeffs.shape[1:], dtype=complex)
    zz = zeta.reshape(zeta.shape + (1,) * (coeffs.ndim - 1))
    for c in coeffs[::-1]:
        out = out * zz + c
    return out


def _derivative_coeffs(coeffs: np.ndarray) -> np.ndarray:
    j = np.arange(1, coeffs.shape[0]).reshape(-1, *([1] * (coeffs.ndim - 1)))
    if coeffs.shape[0] <= 1:
        return np.zeros_like(coeffs[:1])
    return coeffs[1:] * j


# ---------------------------------------------------------------------------
# Lifted discs and jets
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BoundaryJet1:
    """Values and first derivatives of ``f`` and ``g`` at ``ζ = 1``."""

    f1: np.ndarray
    df1: np.ndarray
    g1: np.ndarray
    dg1: np.ndarray

    def __post_init__(self):
        for name in ("f1", "df1", "g1", "dg1"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.f1.shape[0] - 1

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.f1, self.df1, self.g1, self.dg1])

    def pinning_data(self) -> tuple[np.ndarray, complex]:
        """``(f'_α(1), f'_0(1) g'_0(1))`` -- the jet parametrisation data."""
        return self.df1[1:].copy(), complex(self.df1[0] * self.dg1[0])


@dataclass(frozen=True, eq=False)
class LiftedDisc:
    """Truncated Taylor representation of a lifted disc ``(f, g = ζ f*)``.

    Parameters
    ----------
    f_coeffs : (N+1, n+1) complex
        ``f(ζ) = Σ_{j=0..N} c_j ζ^j``.
    fstar_coeffs : (N+2, n+1) complex
        Row ``k`` is ``d_{k-1}``: ``f*(ζ) = Σ_{j=-1..N} d_j ζ^j`` and hence
        ``g(ζ) = Σ_k fstar_coeffs[k] ζ^k``.
    M : int
        Number of cached boundary samples.
    """

    f_coeffs: np.ndarray
    fstar_coeffs: np.ndarray
    M: int = DEFAULT_M

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.f_coeffs, dtype=complex)).copy()
        g = np.atleast_2d(np.asarray(self.fstar_coeffs, dtype=complex)).copy()
        if f.shape[1] < 2 or g.shape[1] != f.shape[1]:
            raise ValueError("coefficient arrays must have n+1 >= 2 columns")
        if g.shape[0] != f.shape[0] + 1:
            raise ValueError("fstar_coeffs must have exactly one more row than f_coeffs (index -1..N)")
        if self.M < 8:
            raise InvalidGridError("need M >= 8 boundary samples")
        f.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "f_coeffs", f)
        object.__setattr__(self, "fstar_coeffs", g)

    @property
    def n(self) -> int:
        return self.f_coeffs.shape[1] - 1

    @property
    def N(self) -> int:
        return self.f_coeffs.shape[0] - 1

    @property
    def g_coeffs(self) -> np.ndarray:
        return self.fstar_coeffs

    @property
    def center(self) -> np.ndarray:
        return self.f_coeffs[0].copy()

    def evaluate(self, zeta, derivative: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """``(f, g)`` (or their ``derivative``-th ζ-derivatives) at ``zeta``."""
        cf, cg = self.f_coeffs, self.fstar_coeffs
        for _ in range(derivative):
            cf, cg = _derivative_coeffs(cf), _derivative_coeffs(cg)
        return _polyval(cf, zeta), _polyval(cg, zeta)

    def fstar(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        return self.evaluate(zeta)[1] / zeta[..., None]

    @cached_property
    def samples(self) -> dict:
        zeta = circle_points(self.M)
        f, g = self.evaluate(zeta)
        df, dg = self.evaluate(zeta, 1)
        return {"zeta": zeta, "f": f, "g": g, "df": df, "dg": dg}

    def boundary(self) -> np.ndarray:
        """Boundary samples of the full lift ``(f, g)``, shape ``(M, 2n+2)``."""
        s = self.samples
        return np.concatenate([s["f"], s["g"]], axis=1)

    @classmethod
    def from_samples(cls, f_samples, g_samples, N: int, M: int | None = None) -> LiftedDisc:
        """Project uniform boundary samples onto ``N+1`` / ``N+2`` Taylor modes."""
        f_samples = np.asarray(f_samples, dtype=complex)
        g_samples = np.asarray(g_samples, dtype=complex)
        Ms = f_samples.shape[0]
        if N + 2 > Ms // 2:
            raise InvalidGridError(f"N={N} needs more than {Ms} samples")
        cf = np.fft.fft(f_samples, axis=0) / Ms
        cg = np.fft.fft(g_samples, axis=0) / Ms
        return cls(cf[: N + 1], cg[: N + 2], M or Ms)

    def projection_tail(self, f_samples, g_samples) -> float:
        """Energy of the modes a :meth:`from_samples` projection discards."""
        Ms = np.asarray(f_samples).shape[0]
        cf = np.fft.fft(f_samples, axis=0) / Ms
        cg = np.fft.fft(g_samples, axis=0) / Ms
        return float(np.sqrt((np.abs(cf[self.N + 1 :]) ** 2).sum() + (np.abs(cg[self.N + 2 :]) ** 2).sum()))

    def tail_estimate(self, fraction: float = 0.1) -> float:
        """Norm of the top ``fraction`` of Taylor coefficients."""
        k = max(1, int(np.ceil(fraction * (self.N + 1))))
        return float(np.sqrt((np.abs(self.f_coeffs[-k:]) ** 2).sum() + (np.abs(self.fstar_coeffs[-k:]) ** 2).sum()))

    def resized(self, N: int, M: int | None = None) -> LiftedDisc:
        n1 = self.n + 1
        f = np.zeros((N + 1, n1), dtype=complex)
        g = np.zeros((N + 2, n1), dtype=complex)
        kf = min(N + 1, self.N + 1)
        f[:kf] = self.f_coeffs[:kf]
        g[: kf + 1] = self.fstar_coeffs[: kf + 1]
        return LiftedDisc(f, g, M or self.M)

    def with_lift_scaled(self, s: float) -> LiftedDisc:
        return LiftedDisc(self.f_coeffs, self.fstar_coeffs * s, self.M)

    def with_M(self, M: int) -> LiftedDisc:
        return LiftedDisc(self.f_coeffs, self.fstar_coeffs, M)

    def distance_c0(self, other: LiftedDisc, M: int = 512) -> float:
        """Sup distance of the lifts over ``M`` boundary points."""
        zeta = circle_points(M)
        f1, g1 = self.evaluate(zeta)
        f2, g2 = other.evaluate(zeta)
        return float(np.max(np.linalg.norm(np.concatenate([f1 - f2, g1 - g2], axis=1), axis=1)))

    def holder_norm(self, k: int = 1, eps: float = DEFAULT_EPS) -> float:
        return holder_norm(self.boundary(), k, eps)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "M": self.M,
            "f_coeffs": complex_to_json(self.f_coeffs.T),
            "fstar_coeffs": complex_to_json(self.fstar_coeffs.T),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> LiftedDisc:
        f = complex_from_json(data["f_coeffs"]).T
        g = complex_from_json(data["fstar_coeffs"]).T
        return cls(f, g, int(data.get("M", DEFAULT_M)))

    def to_csv_rows(self) -> list[list[float]]:
        """Rows ``θ, Re/Im f_0.., Re/Im g_0..`` over the cached grid."""
        s = self.samples
        theta = 2 * np.pi * np.arange(self.M) / self.M
        vals = np.concatenate([s["f"], s["g"]], axis=1)
        parts = np.empty((self.M, 2 * vals.shape[1]))
        parts[:, 0::2] = vals.real
        parts[:, 1::2] = vals.imag
        return [[float(t)] + [float(v) for v in row] for t, row in zip(theta, parts)]

    def csv_header(self) -> list[str]:
        cols = ["theta"]
        for name in ("f", "g"):
            for j in range(self.n + 1):
                cols += [f"re_{name}{j}", f"im_{name}{j}"]
        return cols
