"""Collocation solver for stationary discs of perturbed quadrics.

Unknowns are the Taylor coefficients of ``f`` (``N+1`` rows) and of
``g = ζ f*`` (``N+2`` rows).  Equations are the 2n+2 real fibration
residuals at ``M`` collocation points, star normalization ``f(1) = 0``,
``g(1) = e0`` and one pinning condition (center or boundary 1-jet).  The
overdetermined system is solved by Levenberg-Marquardt.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .conormal_index import FibrationEquations, real_jacobian
from .disc_core import DEFAULT_M, LiftedDisc, NormalFormSurface, as_point, circle_points
from .errors import ContinuationError, DiscError, DivergenceError, IsotropicDirectionError, NumericalFailure, UnderResolvedError
from .quadric_discs import boundary_jet, build_disc_star, center_of_star, invert_center, invert_jet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscConstraint:
    """Star normalization plus exactly one pinning condition."""

    center: np.ndarray | None = None
    w_alpha: np.ndarray | None = None
    s0: complex | None = None

    def __post_init__(self):
        has_center = self.center is not None
        has_jet = self.w_alpha is not None or self.s0 is not None
        if has_center == has_jet:
            raise ValueError("give exactly one of center or (w_alpha, s0)")
        if has_center:
            object.__setattr__(self, "center", as_point(self.center))
        else:
            if self.w_alpha is None or self.s0 is None:
                raise ValueError("jet pinning needs both w_alpha and s0")
            object.__setattr__(self, "w_alpha", np.atleast_1d(np.asarray(self.w_alpha, dtype=complex)))
            object.__setattr__(self, "s0", complex(self.s0))

    @classmethod
    def at_center(cls, z) -> DiscConstraint:
        return cls(center=z)

    @classmethod
    def at_jet(cls, w_alpha, s0) -> DiscConstraint:
        return cls(w_alpha=w_alpha, s0=s0)

    @classmethod
    def from_jet(cls, bj) -> DiscConstraint:
        w, s = bj.pinning_data()
        return cls(w_alpha=w, s0=s)

    @property
    def kind(self) -> str:
        return "center" if self.center is not None else "jet"

    def quadric_guess(self, A, N: int | None = None) -> LiftedDisc:
        """Closed-form star disc of ``Q^A`` satisfying this constraint."""
        if self.kind == "center":
            p = invert_center(self.center, A)
        else:
            p = invert_jet(self.w_alpha, self.s0, A)
        return build_disc_star(p, A, N)


@dataclass(frozen=True)
class SolverOptions:
    N: int | None = None  # default: the guess's truncation order
    M: int | None = None  # default: 4N
    tol: float = 1e-10
    tail_tol: float = 1e-8
    max_iter: int = 50
    lambda0: float = 1e-3
    lambda_down: float = 0.3
    lambda_up: float = 10.0
    max_N: int | None = 128  # order may grow up to this on a truncation floor; None keeps N fixed
    stall_floor: float = 1e-4


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    boundary_residual: float
    constraint_residual: float
    tail: float
    history: list = field(default_factory=list)
    distance_from_guess: float = float("nan")
    fine_residual: float = float("nan")
    tau: float | None = None
    N: int | None = None

    def to_json(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "boundary_residual": self.boundary_residual,
            "constraint_residual": self.constraint_residual,
            "tail": self.tail,
            "history": [float(h) for h in self.history],
            "distance_from_guess": self.distance_from_guess,
            "fine_residual": self.fine_residual,
            "N": self.N,
            **({"tau": self.tau} if self.tau is not None else {}),
        }


def _complex_rows(a: np.ndarray) -> np.ndarray:
    """Real rows of ``Re``/``Im`` of complex-linear forms ``a @ u``."""
    a = np.atleast_2d(a)
    out = np.empty((2 * a.shape[0], 2 * a.shape[1]))
    out[0::2, 0::2] = a.real
    out[0::2, 1::2] = -a.imag
    out[1::2, 0::2] = a.imag
    out[1::2, 1::2] = a.real
    return out


def _split(z: np.ndarray) -> np.ndarray:
    z = np.atleast_1d(z)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


class _System:
    def __init__(self, eqs: FibrationEquations, c: DiscConstraint, N: int, M: int):
        self.eqs = eqs
        self.c = c
        self.N = N
        self.M = M
        self.m = eqs.n + 1
        if c.kind == "center" and c.center.shape[0] != self.m:
            raise ValueError("center has the wrong dimension")
        if c.kind == "jet" and c.w_alpha.shape[0] != eqs.n:
            raise ValueError("w_alpha has the wrong dimension")
        self.zeta = circle_points(M)
        self.pf = self.zeta[:, None] ** np.arange(N + 1)[None, :]  # (M, N+1)
        self.pg = self.zeta[:, None] ** np.arange(N + 2)[None, :]
        self.nf = (N + 1) * self.m
        self.ng = (N + 2) * self.m
        self.wb = 1 / np.sqrt(M)

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = x[0::2] + 1j * x[1::2]
        return u[: self.nf].reshape(self.N + 1, self.m), u[self.nf :].reshape(self.N + 2, self.m)

    def pack(self, d: LiftedDisc) -> np.ndarray:
        return _split(np.concatenate([d.f_coeffs.ravel(), d.fstar_coeffs.ravel()]))

    def constraints(self, cf, cg, jac: bool):
        m, N = self.m, self.N
        nv = self.nf + self.ng
        rows, vals = [], []
        e0 = np.zeros(m)
        e0[0] = 1
        # f(1) = 0 and g(1) = e0
        for l in range(m):
            a = np.zeros(nv, dtype=complex)
            a[l : self.nf : m] = 1
            rows.append(a)
            vals.append(cf[:, l].sum())
        for l in range(m):
            a = np.zeros(nv, dtype=complex)
            a[self.nf + l :: m] = 1
            rows.append(a)
            vals.append(cg[:, l].sum() - e0[l])
        jf = np.arange(N + 1)
        if self.c.kind == "center":
            for l in range(m):
                a = np.zeros(nv, dtype=complex)
                a[l] = 1
                rows.append(a)
                vals.append(cf[0, l] - self.c.center[l])
        else:
            for l in range(1, m):
                a = np.zeros(nv, dtype=complex)
                a[l : self.nf : m] = jf
                rows.append(a)
                vals.append(jf @ cf[:, l] - self.c.w_alpha[l - 1])
            df0 = jf @ cf[:, 0]
            dg0 = np.arange(N + 2) @ cg[:, 0]
            a = np.zeros(nv, dtype=complex)
            a[0 : self.nf : m] = jf * dg0
            a[self.nf :: m] = np.arange(N + 2) * df0
            rows.append(a)
            vals.append(df0 * dg0 - self.c.s0)
        r = _split(np.array(vals))
        return r, (_complex_rows(np.array(rows)) if jac else None)

    def boundary(self, cf, cg, jac: bool):
        f = self.pf @ cf
        g = self.pg @ cg
        J = self.eqs.evaluate(self.zeta, f, g, jacobian=jac)
        if not jac:
            return J.residual, None
        m = self.m
        D = J.D  # (M, 2m, 2m)
        Cf = D[:, :, None, :m] * self.pf[:, None, :, None]  # (M, 2m, N+1, m)
        Cg = D[:, :, None, m:] * self.pg[:, None, :, None]
        C = np.concatenate([Cf.reshape(self.M, 2 * m, -1), Cg.reshape(self.M, 2 * m, -1)], axis=2)
        return J.residual, real_jacobian(C).reshape(self.M * 2 * m, -1)

    def residual(self, x: np.ndarray, jac: bool = True):
        cf, cg = self.unpack(x)
        rb, Jb = self.boundary(cf, cg, jac)
        rc, Jc = self.constraints(cf, cg, jac)
        r = np.concatenate([self.wb * rb.ravel(), rc])
        J = np.vstack([self.wb * Jb, Jc]) if jac else None
        return r, J, float(np.abs(rb).max()), float(np.abs(rc).max())


def _surface_eqs(surface) -> FibrationEquations:
    return surface if isinstance(surface, FibrationEquations) else FibrationEquations(surface)


def verify_disc(surface, d: LiftedDisc, factor: int = 4) -> float:
    """Sup fibration residual on a grid ``factor`` times finer than the collocation one."""
    eqs = _surface_eqs(surface)
    zeta = circle_points(max(DEFAULT_M, factor * 4 * (d.N + 2)))
    f, g = d.evaluate(zeta)
    return float(np.abs(eqs.evaluate(zeta, f, g, jacobian=False).residual).max())


def _gauss_newton(sys_: _System, x: np.ndarray, opts: SolverOptions, budget: int):
    """Iterate from ``x``; returns ``(x, history, rb, rc, iterations, stalled)``.

    ``stalled`` means the least-squares cost stopped decreasing (by less than
    1% over three accepted steps, or no acceptable step at all) before the
    sup residual reached ``opts.tol``.
    """
    r, J, rb, rc = sys_.residual(x)
    cost = float(r @ r)
    lam = opts.lambda0
    history = [max(rb, rc)]
    costs = [cost]
    it = 0
    while max(rb, rc) > opts.tol and it < budget:
        it += 1
        accepted = None
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = 1.0
        while t >= 1 / 16:
            r_new = sys_.residual(x + t * step, jac=False)[0]
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                accepted = x + t * step
                break
            t /= 2
        while accepted is None and lam <= 1e12:
            mu = lam * np.sqrt(cost)
            scale = np.sqrt(np.maximum((J * J).sum(axis=0), 1e-12))
            A = np.vstack([J, np.sqrt(mu) * np.diag(scale)])
            b = np.concatenate([-r, np.zeros(J.shape[1])])
            x_try = x + np.linalg.lstsq(A, b, rcond=None)[0]
            r_new = sys_.residual(x_try, jac=False)[0]
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                accepted = x_try
                lam = max(lam * opts.lambda_down, 1e-12)
            else:
                lam *= opts.lambda_up
        if accepted is None:
            return x, history, rb, rc, it, True
        x = accepted
        r, J, rb, rc = sys_.residual(x)
        cost = float(r @ r)
        history.append(max(rb, rc))
        costs.append(cost)
        log.debug("iter %d: boundary %.3e constraint %.3e", it, rb, rc)
        if len(costs) >= 4 and costs[-1] > 0.99 * costs[-4] and history[-1] > opts.tol:
            return x, history, rb, rc, it, True
    return x, history, rb, rc, it, False


def solve_disc(
    surface,
    c: DiscConstraint,
    guess: LiftedDisc,
    opts: SolverOptions | None = None,
) -> tuple[LiftedDisc, SolveReport]:
    """Gauss-Newton collocation solve with backtracking.

    A full Newton step is tried first and halved down to ``1/16``; if that
    still does not reduce the residual a Levenberg-Marquardt step with
    damping ``μ = λ‖r‖`` (column-scaled) is used instead.  Near a solution
    full steps are accepted and the rate is quadratic.

    A residual that stalls close to zero (below ``opts.stall_floor``) is a
    truncation floor, not divergence: the order is raised by half, up to
    ``opts.max_N``, and the iteration continues from the current disc.
    """
    opts = opts or SolverOptions()
    eqs = _surface_eqs(surface)
    N = opts.N if opts.N is not None else guess.N
    M = opts.M if opts.M is not None else 4 * N
    if M < 2 * (N + 2):
        raise ValueError("need M >= 2(N+2) collocation points")
    if guess.n != eqs.n:
        raise ValueError("guess lives in the wrong dimension")
    max_N = max(N, opts.max_N or N)
    guess_r = guess.resized(N)
    current = guess_r
    history: list[float] = []
    it = 0
    while True:
        sys_ = _System(eqs, c, N, M)
        x, hist, rb, rc, used, stalled = _gauss_newton(sys_, sys_.pack(current), opts, opts.max_iter - it)
        history.extend(hist if not history else hist[1:])
        it += used
        cf, cg = sys_.unpack(x)
        disc = LiftedDisc(cf, cg, max(guess.M, DEFAULT_M, 4 * (N + 2)))
        converged = max(rb, rc) <= opts.tol
        tail = disc.tail_estimate()
        grow = (converged and tail > opts.tail_tol) or (stalled and history[-1] <= opts.stall_floor)
        if not grow or N >= max_N or it >= opts.max_iter:
            break
        N = min(max_N, int(np.ceil(1.5 * N)))
        M = max(M, 4 * N)
        log.debug("raising truncation order to N=%d (residual %.3e, tail %.3e)", N, history[-1], tail)
        current = disc.resized(N)
    report = SolveReport(
        converged=converged and tail <= opts.tail_tol,
        iterations=it,
        boundary_residual=rb,
        constraint_residual=rc,
        tail=tail,
        history=history,
        distance_from_guess=disc.distance_c0(guess_r),
        N=N,
    )
    if not converged:
        raise DivergenceError(
            f"no convergence after {it} iterations at N={N} (boundary {rb:.3e}, constraint {rc:.3e})", history
        )
    if tail > opts.tail_tol:
        raise UnderResolvedError(f"Taylor tail {tail:.3e} > {opts.tail_tol:g} at N={N}; increase N")
    report.fine_residual = verify_disc(eqs, disc)
    return disc, report


def quadratic_contraction(history: Sequence[float], last: int = 3, floor: float = 1e-13) -> float:
    """Largest ``r_{k+1} / r_k²`` over the last ``last`` Newton steps.

    A step is informative only if the predicted ``C r_k²`` and the observed
    ``r_{k+1}`` both lie above the round-off ``floor``; other steps are
    skipped.  ``0.0`` means no informative step.
    """
    h = np.asarray(history, dtype=float)
    pairs = [(h[k], h[k + 1]) for k in range(max(0, len(h) - 1 - last), len(h) - 1)]
    ratios = [b / a**2 for a, b in pairs if b > floor and a**2 > floor]
    return float(max(ratios, default=0.0))


def _quadric_A(eqs: FibrationEquations):
    s = eqs.surface
    return s.A if isinstance(s, NormalFormSurface) else NormalFormSurface.from_polynomial(eqs.rho).A


def continuation_solve(
    surface_path: Callable[[float], NormalFormSurface],
    c: DiscConstraint,
    steps: int = 10,
    opts: SolverOptions | None = None,
    N: int | None = None,
    min_step: float = 1e-4,
    max_refinements: int = 10,
) -> tuple[LiftedDisc, list[SolveReport]]:
    """March ``τ`` from the quadric (closed form) to ``τ = 1``."""
    start = surface_path(0.0)
    if not start.is_quadric:
        raise ValueError("surface_path(0) must be the exact quadric")
    disc = c.quadric_guess(start.A, N)
    reports: list[SolveReport] = []
    tau, h, refinements = 0.0, 1.0 / steps, 0
    while tau < 1.0:
        nxt = min(1.0, tau + h)
        try:
            disc_new, rep = solve_disc(surface_path(nxt), c, disc, opts)
        except NumericalFailure as exc:
            h /= 2
            refinements += 1
            log.info("continuation: failure at τ=%.4g (%s), step -> %.3g", nxt, exc, h)
            if h < min_step or refinements > max_refinements:
                raise ContinuationError(f"continuation stalled at τ = {tau:.6g}", last_tau=tau, disc=disc) from exc
            continue
        rep.tau = nxt
        reports.append(rep)
        disc, tau = disc_new, nxt
    return disc, reports


def linear_path(surface: NormalFormSurface) -> Callable[[float], NormalFormSurface]:
    """``τ ↦ r + τ(ρ - r)``."""
    A = surface.A
    pert = surface.perturbation

    def path(tau: float) -> NormalFormSurface:
        return NormalFormSurface.perturbed(A, pert * tau) if tau else NormalFormSurface(A)

    return path


def solve_with_continuation(
    surface: NormalFormSurface,
    c: DiscConstraint,
    guess: LiftedDisc | None = None,
    opts: SolverOptions | None = None,
    steps: int = 4,
) -> tuple[LiftedDisc, SolveReport]:
    """Direct solve from ``guess`` (quadric closed form by default), falling back on continuation."""
    if guess is None:
        guess = c.quadric_guess(surface.A)
    try:
        return solve_disc(surface, c, guess, opts)
    except NumericalFailure:
        if surface.is_quadric:
            raise
    disc, reports = continuation_solve(linear_path(surface), c, steps, opts)
    return disc, reports[-1]


def solve_jet_pinned(
    surface: NormalFormSurface,
    w_alpha,
    s0: complex,
    opts: SolverOptions | None = None,
    steps: int = 4,
    max_refinements: int = 10,
) -> tuple[LiftedDisc, SolveReport]:
    """Jet-pinned solve with a homotopy fallback in the jet data.

    First a direct solve from the closed-form quadric disc with the same
    jet.  If that fails, the disc centered where the quadric chart puts the
    jet is solved (its own jet is then known exactly) and the pinning data
    is moved linearly from that jet to the requested one.
    """
    target = DiscConstraint.at_jet(w_alpha, s0)
    try:
        return solve_disc(surface, target, target.quadric_guess(surface.A), opts)
    except NumericalFailure as exc:
        log.info("jet solve: direct attempt failed (%s); homotopy in the jet data", exc)
    z_est = center_of_star(invert_jet(target.w_alpha, target.s0, surface.A), surface.A)
    disc, _ = solve_with_continuation(surface, DiscConstraint.at_center(z_est), opts=opts, steps=steps)
    w_start, s_start = boundary_jet(disc).pinning_data()
    tau, h, refinements = 0.0, 1.0 / steps, 0
    report = None
    while tau < 1.0:
        nxt = min(1.0, tau + h)
        c = DiscConstraint.at_jet(
            (1 - nxt) * w_start + nxt * target.w_alpha, (1 - nxt) * s_start + nxt * target.s0
        )
        try:
            disc_new, report = solve_disc(surface, c, disc, opts)
        except NumericalFailure as exc:
            h /= 2
            refinements += 1
            if refinements > max_refinements:
                raise ContinuationError(f"jet homotopy stalled at τ = {tau:.6g}", last_tau=tau, disc=disc) from exc
            continue
        disc, tau = disc_new, nxt
    return disc, report


@dataclass
class ScanEntry:
    center: np.ndarray
    disc: LiftedDisc | None = None
    report: SolveReport | None = None
    error: DiscError | None = None

    @property
    def ok(self) -> bool:
        return self.disc is not None


def family_scan(
    surface,
    base_disc: LiftedDisc,
    center_grid: Sequence,
    opts: SolverOptions | None = None,
) -> list[ScanEntry]:
    """Center-pinned solves over a grid, each seeded by its nearest solved neighbour.

    Points are processed in order of distance from the base center; failures
    are recorded per point and do not stop the scan.
    """
    eqs = _surface_eqs(surface)
    A = _quadric_A(eqs)
    entries = [ScanEntry(as_point(z, eqs.n)) for z in center_grid]
    solved: list[tuple[np.ndarray, LiftedDisc]] = [(base_disc.center, base_disc)]
    order = sorted(range(len(entries)), key=lambda k: np.linalg.norm(entries[k].center - base_disc.center))
    for k in order:
        e = entries[k]
        try:
            v = e.center[1:]
            if abs(A(v)) <= 1e-14 * max(1.0, float(np.linalg.norm(v)) ** 2):
                raise IsotropicDirectionError("ᵗv̄Av = 0 at this grid point")
            seed = min(solved, key=lambda s: np.linalg.norm(s[0] - e.center))[1]
            e.disc, e.report = solve_disc(eqs, DiscConstraint.at_center(e.center), seed, opts)
            solved.append((e.center, e.disc))
        except DiscError as exc:
            e.error = exc
    return entries


def center_grid(center, radius: float, size: int = 5) -> list[np.ndarray]:
    """``size × size`` grid in the (Re z0, Re z1) plane around ``center``."""
    center = as_point(center)
    offsets = np.linspace(-radius, radius, size)
    pts = []
    for dx in offsets:
        for dy in offsets:
            z = center.copy()
            z[0] += dx
            z[1] += dy
            pts.append(z)
    return pts


def with_options(opts: SolverOptions | None, **kw) -> SolverOptions:
    return replace(opts or SolverOptions(), **kw)
