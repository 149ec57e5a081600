"""Holomorphic maps of C^{n+1} with exact first and second derivatives.

A :class:`HolomorphicMap` is ``F = P / D`` with ``P`` a tuple of holomorphic
polynomials and ``D`` a scalar holomorphic polynomial (``D = 1`` for
polynomial maps).  That covers every automorphism of the hyperquadrics used
here, including the ones that fix the origin with a non-trivial quadratic
part.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError
from .polynomial import ComplexPolynomial


def _weights(n: int) -> np.ndarray:
    return np.array([2] + [1] * n)


@dataclass(frozen=True)
class MapJet2:
    """2-jet of a holomorphic map at a point.

    ``quadratic[i, j, k] = ∂²F_i / ∂z_j ∂z_k``.
    """

    value: np.ndarray
    linear: np.ndarray
    quadratic: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", np.asarray(self.value, dtype=complex))
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=complex))
        object.__setattr__(self, "quadratic", np.asarray(self.quadratic, dtype=complex))
        m = self.value.shape[0]
        if self.linear.shape != (m, m) or self.quadratic.shape != (m, m, m):
            raise ValueError("inconsistent jet shapes")
        if not np.allclose(self.quadratic, self.quadratic.transpose(0, 2, 1), atol=1e-12):
            raise ValueError("quadratic part must be symmetric")

    @property
    def n(self) -> int:
        return self.value.shape[0] - 1

    @classmethod
    def identity(cls, n: int) -> MapJet2:
        m = n + 1
        return cls(np.zeros(m), np.eye(m), np.zeros((m, m, m)))

    def close_to(self, other: MapJet2, atol: float = 1e-12) -> bool:
        return (
            np.allclose(self.value, other.value, atol=atol, rtol=0)
            and np.allclose(self.linear, other.linear, atol=atol, rtol=0)
            and np.allclose(self.quadratic, other.quadratic, atol=atol, rtol=0)
        )

    def dilate(self, t: float) -> MapJet2:
        """Jet at 0 of ``Λ_t⁻¹ ∘ F ∘ Λ_t``, from the jet of ``F`` at 0."""
        w = _weights(self.n)
        return MapJet2(
            self.value * t ** (-w),
            self.linear * t ** (w[None, :] - w[:, None]),
            self.quadratic * t ** (w[None, :, None] + w[None, None, :] - w[:, None, None]),
        )

    def evaluate(self, dz: np.ndarray) -> np.ndarray:
        """Second-order Taylor polynomial at displacement ``dz``."""
        dz = np.asarray(dz, dtype=complex)
        return (
            self.value
            + dz @ self.linear.T
            + 0.5 * np.einsum("ijk,...j,...k->...i", self.quadratic, dz, dz)
        )


class HolomorphicMap:
    """Rational holomorphic map ``z ↦ P(z) / D(z)`` on C^{n+1}."""

    def __init__(
        self,
        components: Sequence[ComplexPolynomial],
        denominator: ComplexPolynomial | None = None,
        name: str = "",
        inverse: HolomorphicMap | None = None,
    ):
        self.components = tuple(components)
        m = len(self.components)
        if any(p.nvars != m for p in self.components):
            raise ValueError("map components must be polynomials in n+1 variables")
        self.denominator = denominator if denominator is not None else ComplexPolynomial.constant(m, 1.0)
        self.name = name
        self.inverse = inverse

    def __repr__(self):
        return f"HolomorphicMap({self.name or 'unnamed'}, n={self.n})"

    @property
    def n(self) -> int:
        return len(self.components) - 1

    @property
    def is_polynomial(self) -> bool:
        return self.denominator.terms == {(0,) * (self.n + 1): 1.0}

    # -- constructors ----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> HolomorphicMap:
        m = n + 1
        F = cls([ComplexPolynomial.variable(m, j) for j in range(m)], name="identity")
        F.inverse = F
        return F

    @classmethod
    def affine(cls, L: np.ndarray, b: np.ndarray | None = None, name: str = "affine") -> HolomorphicMap:
        L = np.asarray(L, dtype=complex)
        m = L.shape[0]
        b = np.zeros(m) if b is None else np.asarray(b, dtype=complex)
        return cls([ComplexPolynomial.linear(L[i], b[i]) for i in range(m)], name=name)

    # -- evaluation ------------------------------------------------------
    @cached_property
    def _first(self):
        m = self.n + 1
        dP = [[p.derivative(j) for j in range(m)] for p in self.components]
        dD = [self.denominator.derivative(j) for j in range(m)]
        return dP, dD

    @cached_property
    def _second(self):
        m = self.n + 1
        dP, dD = self._first
        d2P = [[[dP[i][j].derivative(k) for k in range(m)] for j in range(m)] for i in range(m)]
        d2D = [[dD[j].derivative(k) for k in range(m)] for j in range(m)]
        return d2P, d2D

    def _denom(self, z, check: bool = True):
        D = self.denominator(z)
        if check and np.any(np.abs(D) < 1e-10):
            raise DomainError(f"{self.name or 'map'}: denominator vanishes on the input")
        return D

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        P = np.stack([p(z) for p in self.components], axis=-1)
        return P / self._denom(z)[..., None]

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        """``J[..., i, j] = ∂F_i/∂z_j``."""
        z = np.asarray(z, dtype=complex)
        m = self.n + 1
        dP, dD = self._first
        D = self._denom(z)
        P = np.stack([p(z) for p in self.components], axis=-1)
        JP = np.stack([np.stack([dP[i][j](z) for j in range(m)], axis=-1) for i in range(m)], axis=-2)
        gD = np.stack([dD[j](z) for j in range(m)], axis=-1)
        return JP / D[..., None, None] - P[..., :, None] * gD[..., None, :] / (D**2)[..., None, None]

    def second(self, z: np.ndarray) -> np.ndarray:
        """``S[..., i, j, k] = ∂²F_i/∂z_j∂z_k``."""
        z = np.asarray(z, dtype=complex)
        m = self.n + 1
        dP, dD = self._first
        d2P, d2D = self._second
        D = self._denom(z)
        u = 1.0 / D
        gD = np.stack([dD[j](z) for j in range(m)], axis=-1)
        hD = np.stack([np.stack([d2D[j][k](z) for k in range(m)], axis=-1) for j in range(m)], axis=-2)
        du = -gD * (u**2)[..., None]
        d2u = -hD * (u**2)[..., None, None] + 2 * gD[..., :, None] * gD[..., None, :] * (u**3)[..., None, None]
        P = np.stack([p(z) for p in self.components], axis=-1)
        JP = np.stack([np.stack([dP[i][j](z) for j in range(m)], axis=-1) for i in range(m)], axis=-2)
        HP = np.stack(
            [np.stack([np.stack([d2P[i][j][k](z) for k in range(m)], axis=-1) for j in range(m)], axis=-2) for i in range(m)],
            axis=-3,
        )
        return (
            HP * u[..., None, None, None]
            + JP[..., :, :, None] * du[..., None, None, :]
            + JP[..., :, None, :] * du[..., None, :, None]
            + P[..., :, None, None] * d2u[..., None, :, :]
        )

    def jet2(self, base: np.ndarray | None = None) -> MapJet2:
        base = np.zeros(self.n + 1, dtype=complex) if base is None else np.asarray(base, dtype=complex)
        S = self.second(base)
        return MapJet2(self(base), self.jacobian(base), 0.5 * (S + S.transpose(0, 2, 1)))

    # -- transformations -------------------------------------------------
    def dilate(self, t: float) -> HolomorphicMap:
        """``Λ_t⁻¹ ∘ F ∘ Λ_t`` with exact coefficient scaling."""
        w = _weights(self.n)
        W = ComplexPolynomial.weight
        comps = [
            ComplexPolynomial(p.nvars, {e: c * t ** (W(e) - w[i]) for e, c in p.terms.items()})
            for i, p in enumerate(self.components)
        ]
        den = ComplexPolynomial(self.denominator.nvars, {e: c * t ** W(e) for e, c in self.denominator.terms.items()})
        out = HolomorphicMap(comps, den, name=f"{self.name}_t={t:g}")
        if self.inverse is not None and self.inverse is not self:
            out.inverse = HolomorphicMap(
                [ComplexPolynomial(p.nvars, {e: c * t ** (W(e) - w[i]) for e, c in p.terms.items()})
                 for i, p in enumerate(self.inverse.components)],
                ComplexPolynomial(self.inverse.denominator.nvars,
                                  {e: c * t ** W(e) for e, c in self.inverse.denominator.terms.items()}),
                name=f"{self.inverse.name}_t={t:g}",
                inverse=out,
            )
        elif self.inverse is self:
            out.inverse = out
        return out

    # -- serialisation ---------------------------------------------------
    def to_json(self) -> dict:
        data = {"n": self.n, "components": [p.to_json() for p in self.components]}
        if not self.is_polynomial:
            data["denominator"] = self.denominator.to_json()
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> HolomorphicMap:
        n = int(data["n"])
        comps = [ComplexPolynomial.from_json(n + 1, c) for c in data["components"]]
        if len(comps) != n + 1:
            raise ValueError("polynomial map needs n+1 components")
        den = ComplexPolynomial.from_json(n + 1, data["denominator"]) if "denominator" in data else None
        return cls(comps, den, name=data.get("name", ""))
