"""Sparse polynomials used for defining functions and holomorphic maps.

Two flavours live here:

* :class:`DefiningPolynomial` -- a real polynomial in the real coordinates
  ``(x0, y0, x1, y1, ..., xn, yn)`` of C^{n+1}.  Monomials carry a weighted
  degree (weight 2 for ``x0, y0`` and weight 1 for the others).
* :class:`ComplexPolynomial` -- a holomorphic polynomial in ``(z0, ..., zn)``
  with complex coefficients.

All calculus is exact coefficient manipulation; evaluation is vectorised
over leading array axes.
"""
from __future__ import annotations

import math
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


def to_real(z: np.ndarray) -> np.ndarray:
    """Interleave ``(Re z0, Im z0, Re z1, ...)`` along the last axis."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[..., 0::2] + 1j * X[..., 1::2]


def _eval_monomials(exps: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Values of every monomial ``X**exps[t]``, shape ``X.shape[:-1] + (T,)``."""
    if exps.shape[0] == 0:
        return np.zeros(X.shape[:-1] + (0,), dtype=X.dtype)
    maxdeg = int(exps.max()) if exps.size else 0
    pw = X[..., None] ** np.arange(maxdeg + 1)  # (..., d, D+1)
    d = exps.shape[1]
    gathered = pw[..., np.arange(d)[None, :], exps]  # (..., T, d)
    return gathered.prod(axis=-1)


class _TermBank:
    """Evaluate several polynomials sharing one monomial table."""

    def __init__(self, polys: Sequence[_SparsePoly], nvars: int):
        keys: dict[Exponent, int] = {}
        for p in polys:
            for e in p.terms:
                keys.setdefault(e, len(keys))
        self.exps = np.array(list(keys), dtype=int).reshape(len(keys), nvars)
        dtype = complex if any(p._complex for p in polys) else float
        self.coeffs = np.zeros((len(keys), len(polys)), dtype=dtype)
        for k, p in enumerate(polys):
            for e, c in p.terms.items():
                self.coeffs[keys[e], k] = c

    def __call__(self, X: np.ndarray) -> np.ndarray:
        if self.exps.shape[0] == 0:
            return np.zeros(X.shape[:-1] + (self.coeffs.shape[1],), dtype=np.result_type(X, self.coeffs))
        return _eval_monomials(self.exps, X) @ self.coeffs


class _SparsePoly:
    _complex = False

    def __init__(self, nvars: int, terms: Mapping[Exponent, complex] | None = None):
        self.nvars = nvars
        clean: dict[Exponent, complex] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != nvars or min(e, default=0) < 0:
                raise ValueError(f"bad exponent {e} for {nvars} variables")
            if c != 0:
                clean[e] = self._coerce(c)
        self.terms = clean

    # subclasses supply _coerce and _new
    def _coerce(self, c):
        raise NotImplementedError

    def _new(self, terms):
        raise NotImplementedError

    # -- algebra ---------------------------------------------------------
    def _check(self, other):
        if other.nvars != self.nvars:
            raise ValueError("polynomials live in different dimensions")

    def __add__(self, other):
        if not isinstance(other, _SparsePoly):
            other = self._new({(0,) * self.nvars: other})
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return self._new(terms)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, _SparsePoly):
            return self._new({e: c * other for e, c in self.terms.items()})
        self._check(other)
        terms: dict[Exponent, complex] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return self._new(terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self._new({(0,) * self.nvars: 1})
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, _SparsePoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def allclose(self, other, atol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(e, 0) - other.terms.get(e, 0)) <= atol for e in keys)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def derivative(self, var: int, order: int = 1):
        terms: dict[Exponent, complex] = {}
        for e, c in self.terms.items():
            if e[var] < order:
                continue
            f = math.perm(e[var], order)
            e2 = list(e)
            e2[var] -= order
            terms[tuple(e2)] = terms.get(tuple(e2), 0) + c * f
        return self._new(terms)

    def partial(self, multi: Sequence[int]):
        """Derivative for a multi-index of variable counts."""
        p = self
        for var, k in enumerate(multi):
            if k:
                p = p.derivative(var, k)
        return p

    def select(self, predicate):
        return self._new({e: c for e, c in self.terms.items() if predicate(e)})

    def substitute(self, subs: Sequence[_SparsePoly]):
        """Compose: replace variable ``k`` by ``subs[k]`` (all in a common space)."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitute per variable")
        target = subs[0]
        for s in subs:
            target._check(s)
        cache: dict[tuple[int, int], _SparsePoly] = {}

        def power(k, m):
            if (k, m) not in cache:
                cache[(k, m)] = subs[k] ** m
            return cache[(k, m)]

        result = target._new({})
        for e, c in self.terms.items():
            term = target._new({(0,) * target.nvars: c})
            for k, m in enumerate(e):
                if m:
                    term = term * power(k, m)
            result = result + term
        return result

    @cached_property
    def _bank(self):
        return _TermBank([self], self.nvars)


class DefiningPolynomial(_SparsePoly):
    """Real polynomial in ``(x0, y0, ..., xn, yn)``.

    Parameters
    ----------
    n : int
        Number of ``z_alpha`` coordinates; the ambient space is C^{n+1}.
    terms : mapping
        Exponent tuples of length ``2n+2`` to real coefficients.
    """

    def __init__(self, n: int, terms: Mapping[Exponent, float] | None = None):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        super().__init__(2 * n + 2, terms)

    def _coerce(self, c):
        c = complex(c)
        if abs(c.imag) > 1e-13 * max(1.0, abs(c.real)):
            raise ValueError(f"defining polynomials are real, got coefficient {c}")
        return float(c.real)

    def _new(self, terms):
        return DefiningPolynomial(self.n, terms)

    def __repr__(self):
        return f"DefiningPolynomial(n={self.n}, {self.pretty()})"

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        names = [f"{c}{j}" for j in range(self.n + 1) for c in "xy"]
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (self.weight(kv[0]), kv[0])):
            mono = "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(names, e) if k)
            parts.append(f"{c:+.6g}" + (f"*{mono}" if mono else ""))
        return " ".join(parts)

    # -- constructors ----------------------------------------------------
    @classmethod
    def constant(cls, n: int, c: float) -> DefiningPolynomial:
        return cls(n, {(0,) * (2 * n + 2): c})

    @classmethod
    def variable(cls, n: int, index: int) -> DefiningPolynomial:
        e = [0] * (2 * n + 2)
        e[index] = 1
        return cls(n, {tuple(e): 1.0})

    @classmethod
    def monomial(cls, n: int, coeff: float = 1.0, **powers: int) -> DefiningPolynomial:
        """``monomial(1, 0.05, y0=1, x1=1)`` is ``0.05*y0*x1``."""
        e = [0] * (2 * n + 2)
        for name, k in powers.items():
            part, j = name[0], int(name[1:])
            if part not in "xy" or not 0 <= j <= n:
                raise ValueError(f"unknown variable {name}")
            e[2 * j + (part == "y")] = k
        return cls(n, {tuple(e): coeff})

    @classmethod
    def hermitian(cls, A: np.ndarray) -> DefiningPolynomial:
        """The real quadratic form ``ᵗz̄_α A z_α``."""
        A = np.asarray(A, dtype=complex)
        n = A.shape[0]
        out = cls(n)
        for i in range(n):
            for j in range(n):
                if A[i, j] == 0:
                    continue
                zi = ComplexPolynomial.variable(n + 1, i + 1).to_real_parts(n)
                zj = ComplexPolynomial.variable(n + 1, j + 1).to_real_parts(n)
                # conj(z_i) * A_ij * z_j, real part (imaginary parts cancel in the sum)
                re = A[i, j].real * (zi[0] * zj[0] + zi[1] * zj[1]) - A[i, j].imag * (zi[0] * zj[1] - zi[1] * zj[0])
                out = out + re
        return out

    @classmethod
    def quadric(cls, A: np.ndarray) -> DefiningPolynomial:
        """``r(z) = x0 - ᵗz̄_α A z_α``."""
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        n = A.shape[0]
        return cls.variable(n, 0) - cls.hermitian(A)

    # -- weights ---------------------------------------------------------
    @staticmethod
    def weight(e: Exponent) -> int:
        return 2 * (e[0] + e[1]) + sum(e[2:])

    @property
    def min_weight(self) -> int:
        return min((self.weight(e) for e in self.terms), default=0)

    def weight_part(self, w: int) -> DefiningPolynomial:
        return self.select(lambda e: self.weight(e) == w)

    def truncate(self, max_weight: int) -> DefiningPolynomial:
        return self.select(lambda e: self.weight(e) <= max_weight)

    def dilate(self, t: float) -> DefiningPolynomial:
        """Coefficients scaled by ``t**(weight - 2)`` (i.e. ``t**-2 ρ∘Λ_t``)."""
        return DefiningPolynomial(self.n, {e: c * t ** (self.weight(e) - 2) for e, c in self.terms.items()})

    def depends_on(self, var: int) -> bool:
        return any(e[var] for e in self.terms)

    # -- evaluation ------------------------------------------------------
    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self._bank(X)[..., 0]

    def at(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at complex points ``z`` of shape ``(..., n+1)``."""
        return self(to_real(z))

    @cached_property
    def gradient_polys(self) -> list[DefiningPolynomial]:
        return [self.derivative(k) for k in range(self.nvars)]

    @cached_property
    def hessian_polys(self) -> list[list[DefiningPolynomial]]:
        g = self.gradient_polys
        return [[g[i].derivative(j) for j in range(self.nvars)] for i in range(self.nvars)]

    @cached_property
    def _bank2(self) -> _TermBank:
        d = self.nvars
        polys = [self] + self.gradient_polys + [self.hessian_polys[i][j] for i in range(d) for j in range(d)]
        return _TermBank(polys, d)

    def real_derivatives(self, X: np.ndarray, order: int = 2):
        """Value, real gradient and real Hessian at real points ``X``."""
        X = np.asarray(X, dtype=float)
        d = self.nvars
        if order == 0:
            return self(X), None, None
        vals = self._bank2(X)
        value = vals[..., 0]
        grad = vals[..., 1 : d + 1]
        hess = vals[..., d + 1 :].reshape(X.shape[:-1] + (d, d)) if order >= 2 else None
        return value, grad, hess

    def compose_holomorphic(self, F: Sequence[ComplexPolynomial]) -> DefiningPolynomial:
        """``ρ∘F`` for a holomorphic polynomial map ``F`` of C^{n+1}."""
        subs = []
        for comp in F:
            re, im = comp.to_real_parts(self.n)
            subs.extend([re, im])
        return self.substitute(subs)

    # -- serialisation ---------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"exp": list(e), "coeff": c} for e, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> DefiningPolynomial:
        n = int(data["n"])
        terms: dict[Exponent, float] = {}
        for t in data["terms"]:
            e = tuple(t["exp"])
            terms[e] = terms.get(e, 0.0) + float(t["coeff"])
        return cls(n, terms)


class ComplexPolynomial(_SparsePoly):
    """Holomorphic polynomial in ``nvars`` complex variables ``z0, z1, ...``."""

    _complex = True

    def _coerce(self, c):
        return complex(c)

    def _new(self, terms):
        return ComplexPolynomial(self.nvars, terms)

    def __repr__(self):
        return f"ComplexPolynomial({self.nvars}, {self.terms})"

    @classmethod
    def constant(cls, nvars: int, c: complex) -> ComplexPolynomial:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, index: int) -> ComplexPolynomial:
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, {tuple(e): 1.0})

    @classmethod
    def linear(cls, coeffs: Sequence[complex], const: complex = 0) -> ComplexPolynomial:
        m = len(coeffs)
        p = cls.constant(m, const)
        for j, c in enumerate(coeffs):
            p = p + cls.variable(m, j) * c
        return p

    @staticmethod
    def weight(e: Exponent) -> int:
        return 2 * e[0] + sum(e[1:])

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self._bank(z)[..., 0]

    def to_real_parts(self, n: int | None = None) -> tuple[DefiningPolynomial, DefiningPolynomial]:
        """Real and imaginary parts as polynomials in ``(x0, y0, ...)``."""
        n = self.nvars - 1 if n is None else n
        d = 2 * n + 2
        acc: dict[Exponent, complex] = {}
        for e, c in self.terms.items():
            partial: dict[Exponent, complex] = {(0,) * d: c}
            for j, m in enumerate(e):
                if not m:
                    continue
                nxt: dict[Exponent, complex] = {}
                for pe, pc in partial.items():
                    for k in range(m + 1):
                        # (x + i y)^m = sum C(m,k) x^(m-k) (i y)^k
                        coef = pc * math.comb(m, k) * (1j) ** k
                        ne = list(pe)
                        ne[2 * j] += m - k
                        ne[2 * j + 1] += k
                        ne = tuple(ne)
                        nxt[ne] = nxt.get(ne, 0) + coef
                partial = nxt
            for pe, pc in partial.items():
                acc[pe] = acc.get(pe, 0) + pc
        re = DefiningPolynomial(n, {e: c.real for e, c in acc.items()})
        im = DefiningPolynomial(n, {e: c.imag for e, c in acc.items()})
        return re, im

    def to_json(self) -> list:
        return [{"exp": list(e), "coeff": [c.real, c.imag]} for e, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, nvars: int, data: Iterable) -> ComplexPolynomial:
        terms: dict[Exponent, complex] = {}
        for t in data:
            c = t["coeff"]
            c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            e = tuple(t["exp"])
            terms[e] = terms.get(e, 0) + c
        return cls(nvars, terms)
