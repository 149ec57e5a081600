"""The twelve acceptance experiments, each runnable on its own.

Every ``criterion_k`` returns a :class:`CriterionResult`; ``run_all`` runs a
selection and is what ``statdisc selftest`` and the acceptance tests call.
Randomness comes from one seed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conormal_index import disc_maslov_index, model_partial_indices
from .disc_core import HermitianForm, LiftedDisc, NormalFormSurface
from .jet_determination import (
    determination_gap,
    interior_values,
    pushforward_disc,
    pushforward_jet1,
    reconstruct_map,
    star_renormalize,
)
from .maps import HolomorphicMap, MapJet2
from .normal_scaling import c4_distance, dilate_defining, loglog_slope, pushforward_decay_probe
from .polynomial import ComplexPolynomial, DefiningPolynomial
from .quadric_discs import (
    boundary_jet,
    build_disc_full,
    build_disc_star,
    center_of_star,
    conormality_residual,
    gluing_residual,
    invert_center,
    invert_jet,
    quadric_automorphism,
    random_full_params,
    random_star_params,
    StarDiscParams,
)
from .rh_solver import DiscConstraint, center_grid, family_scan, quadratic_contraction, solve_disc, solve_with_continuation

A1 = HermitianForm([[1.0]])
A2_MIXED = HermitianForm(np.diag([1.0, -1.0]))


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] criterion {self.number:2d} {self.title}: {parts} ({self.seconds:.1f} s)"

    def to_json(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": self.seconds,
            "detail": {k: _plain(v) for k, v in self.detail.items()},
        }


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def random_hermitian(rng: np.random.Generator, n: int) -> HermitianForm:
    """Random invertible Hermitian form of random (possibly mixed) signature."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    ev = rng.choice([-1.0, 1.0], size=n) * rng.uniform(0.5, 2.0, size=n)
    return HermitianForm(Q @ np.diag(ev) @ Q.conj().T)


def perturbed_y0x1(c: float = 0.05) -> NormalFormSurface:
    return NormalFormSurface.perturbed(A1, DefiningPolynomial.monomial(1, c, y0=1, x1=1))


def perturbed_y0x1sq(c: float = 0.1) -> NormalFormSurface:
    return NormalFormSurface.perturbed(A1, DefiningPolynomial.monomial(1, c, y0=1, x1=2))


def cubic_tangency_map() -> HolomorphicMap:
    """``(z0 + z1³, z1 + z0 z1²)``: identity up to order 2 at 0."""
    z0, z1 = ComplexPolynomial.variable(2, 0), ComplexPolynomial.variable(2, 1)
    return HolomorphicMap([z0 + z1 * z1 * z1, z1 + z0 * z1 * z1], name="cubic_tangency")


def _sample_full_discs(rng, count: int = 100) -> list[tuple[LiftedDisc, HermitianForm]]:
    out = []
    for k in range(count):
        n = 1 + k % 2
        A = random_hermitian(rng, n)
        out.append((build_disc_full(random_full_params(rng, n, 0.9), A), A))
    return out


# ---------------------------------------------------------------------------
def criterion_1(rng) -> CriterionResult:
    discs = _sample_full_discs(rng)
    worst = max(gluing_residual(d, A, M=512) for d, A in discs)
    return CriterionResult(1, "closed-form gluing", worst <= 1e-10, {"max_residual": worst, "discs": len(discs)})


def criterion_2(rng) -> CriterionResult:
    discs = _sample_full_discs(rng)
    reports = [conormality_residual(d, A, M=512) for d, A in discs]
    prop = max(r.proportionality for r in reports)
    imag = max(r.imaginary for r in reports)
    factor = min(r.min_factor for r in reports)
    ok = all(r.ok(1e-10) for r in reports)
    return CriterionResult(2, "conormality of lifts", ok, {"proportionality": prop, "imag_factor": imag, "min_factor": factor})


def criterion_3(rng) -> CriterionResult:
    err_c = err_j = 0.0
    for k in range(100):
        A = A1 if k % 2 == 0 else A2_MIXED
        p = random_star_params(rng, A, 0.9)
        q = invert_center(center_of_star(p, A), A)
        err_c = max(err_c, abs(q.a - p.a), float(np.abs(q.v - p.v).max()))
        w, s = boundary_jet(build_disc_star(p, A)).pinning_data()
        q = invert_jet(w, s, A)
        err_j = max(err_j, abs(q.a - p.a), float(np.abs(q.v - p.v).max()))
    return CriterionResult(3, "parametrization round-trips", max(err_c, err_j) <= 1e-10, {"center": err_c, "jet": err_j})


def criterion_4(rng) -> CriterionResult:
    bad = []
    for A, expected in ((A1, 4), (A2_MIXED, 6)):
        for _ in range(20):
            d = build_disc_star(random_star_params(rng, A, 0.9), A)
            M = max(256, d.M)
            k1, k2 = disc_maslov_index(A, d, M), disc_maslov_index(A, d, 2 * M)
            if not (k1 == k2 == expected):
                bad.append((A.n, k1, k2))
    return CriterionResult(4, "Maslov index", not bad, {"failures": len(bad), "expected": "4 (n=1), 6 (n=2)"})


def criterion_5(rng) -> CriterionResult:
    ok = True
    sums = []
    for n in range(1, 6):
        idx = model_partial_indices(n)
        sums.append(sum(idx))
        ok &= sum(idx) == 2 * n + 2 and min(idx) >= 0
    return CriterionResult(5, "model partial indices", ok, {"sums": sums})


def criterion_6(rng) -> CriterionResult:
    dist = 0.0
    contraction = 0.0
    for _ in range(20):
        p = random_star_params(rng, A1, 0.6)
        exact = build_disc_star(p, A1)
        noise = 1e-2 * (rng.normal(size=exact.f_coeffs.shape) + 1j * rng.normal(size=exact.f_coeffs.shape))
        noise_g = 1e-2 * (rng.normal(size=exact.fstar_coeffs.shape) + 1j * rng.normal(size=exact.fstar_coeffs.shape))
        noise[exact.N // 2 :] = 0
        noise_g[exact.N // 2 :] = 0
        guess = LiftedDisc(exact.f_coeffs + noise, exact.fstar_coeffs + noise_g, exact.M)
        disc, rep = solve_disc(NormalFormSurface(A1), DiscConstraint.at_center(center_of_star(p, A1)), guess)
        dist = max(dist, disc.distance_c0(exact))
        contraction = max(contraction, quadratic_contraction(rep.history))
    ok = dist <= 1e-8 and contraction < 1e3
    return CriterionResult(6, "solver-oracle agreement", ok, {"max_c0_distance": dist, "contraction_C": contraction})


def criterion_7(rng) -> CriterionResult:
    detail = {}
    ok = True
    for label, S in (("y0x1", perturbed_y0x1()), ("y0x1^2", perturbed_y0x1sq())):
        base, _ = solve_with_continuation(S, DiscConstraint.at_center([2, 1]))
        entries = family_scan(S, base, center_grid([2, 1], 0.1, 5))
        solved = [e for e in entries if e.ok]
        res = max((e.report.fine_residual for e in solved), default=np.inf)
        jet_err = 0.0
        for e in solved:
            c = DiscConstraint.from_jet(boundary_jet(e.disc))
            again, _ = solve_disc(S, c, c.quadric_guess(A1, e.disc.N))
            jet_err = max(jet_err, again.distance_c0(e.disc))
        detail[f"{label}_solved"] = f"{len(solved)}/25"
        detail[f"{label}_residual"] = res
        detail[f"{label}_jet_resolve"] = jet_err
        ok &= len(solved) == 25 and res <= 1e-9 and jet_err <= 1e-8
    return CriterionResult(7, "perturbed family", ok, detail)


def criterion_8(rng) -> CriterionResult:
    ts = (0.2, 0.1, 0.05)
    spreads = {}
    for label, extra, power in (
        ("y0x1", DefiningPolynomial.monomial(1, 1.0, y0=1, x1=1), 1),
        ("y0x1^2", DefiningPolynomial.monomial(1, 1.0, y0=1, x1=2), 2),
    ):
        S = NormalFormSurface.perturbed(A1, extra)
        ratios = [c4_distance(dilate_defining(S, t)) / t**power for t in ts]
        spreads[label] = max(ratios) / min(ratios) - 1
    ok = all(v <= 0.01 for v in spreads.values())
    return CriterionResult(8, "dilation decay", ok, {f"{k}_spread": v for k, v in spreads.items()})


def criterion_9(rng) -> CriterionResult:
    """Two fixture discs with boundaries in a ball of radius about 3."""
    F = cubic_tangency_map()
    slopes = {}
    for label, p in (("disc_0_1", StarDiscParams(0.0, [1.0])), ("disc_03_08", StarDiscParams(0.3 + 0.2j, [0.8]))):
        series = pushforward_decay_probe(F, build_disc_star(p, A1), (0.2, 0.1, 0.05))
        slopes[label] = loglog_slope(series)
    return CriterionResult(9, "pushforward decay", min(slopes.values()) >= 0.95, slopes)


def diagram_automorphisms(A: HermitianForm) -> dict[str, HolomorphicMap]:
    """Automorphisms fixing 0 used for the diagram check."""
    n = A.n
    U = np.exp(0.7j) * np.eye(n)
    return {
        "heisenberg": quadric_automorphism("inverted_heisenberg", A, c=0.1 * np.ones(n), s=0.05),
        "dilation": quadric_automorphism("dilation", A, t=0.7),
        "rotation": quadric_automorphism("rotation", A, U=U),
    }


def criterion_10(rng) -> CriterionResult:
    params = [random_star_params(rng, A1, 0.6) for _ in range(20)]
    errs = {}
    for name, F in diagram_automorphisms(A1).items():
        j = F.jet2()
        worst = 0.0
        for p in params:
            h = build_disc_star(p, A1)
            lhs = boundary_jet(star_renormalize(pushforward_disc(F, h)))
            rhs = pushforward_jet1(j, boundary_jet(h))
            worst = max(worst, float(np.abs(lhs.as_vector() - rhs.as_vector()).max()))
        errs[name] = worst
    return CriterionResult(10, "diagram commutativity", max(errs.values()) <= 1e-9, errs)


def criterion_11(rng) -> CriterionResult:
    Q = NormalFormSurface(A1)
    pts = [center_of_star(random_star_params(rng, A1, 0.4), A1) for _ in range(20)]
    G = quadric_automorphism("dilation", A1, t=0.8)
    rec = np.array(reconstruct_map(G.jet2(), Q, Q, pts))
    err_a = float(np.abs(rec - G(np.array(pts))).max())
    S = perturbed_y0x1()
    rec = np.array(reconstruct_map(MapJet2.identity(1), S, S, pts))
    err_b = float(np.abs(rec - np.array(pts)).max())
    gap = determination_gap(HolomorphicMap.identity(1), G, Q, pts)
    ok = err_a <= 1e-6 and err_b <= 1e-6 and gap > 1e-2
    return CriterionResult(11, "jet determination", ok, {"dilation_err": err_a, "identity_err": err_b, "distinct_gap": gap})


def criterion_12(rng) -> CriterionResult:
    """Literal form: ``r(h(ζ)) < 0`` at interior points of discs of ``Q^A``, ``A > 0``."""
    vals = []
    for k in range(20):
        n = 1 + k % 2
        A = HermitianForm(np.diag(rng.uniform(0.5, 2.0, size=n)))
        vals.append(interior_values(build_disc_star(random_star_params(rng, A, 0.9), A), A, seed=k))
        vals.append(interior_values(build_disc_full(random_full_params(rng, n, 0.9), A), A, seed=k))
    vals = np.concatenate(vals)
    return CriterionResult(
        12,
        "one-sidedness r(h) < 0",
        bool(np.all(vals < 0)),
        {"max_interior_r": float(vals.max()), "min_interior_r": float(vals.min())},
    )


CRITERIA: dict[int, Callable] = {
    k: f for k, f in sorted((int(name.split("_")[1]), obj) for name, obj in globals().items() if name.startswith("criterion_"))
}


def run_criterion(k: int, seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng([seed, k])
    start = time.perf_counter()
    try:
        result = CRITERIA[k](rng)
    except Exception as exc:  # a crash is a failure of that criterion, reported as such
        result = CriterionResult(k, CRITERIA[k].__name__, False, {"error": f"{type(exc).__name__}: {exc}"})
    result.seconds = time.perf_counter() - start
    return result


def run_all(selection=None, seed: int = 0, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for k in selection or sorted(CRITERIA):
        r = run_criterion(k, seed)
        if echo:
            echo(r.line())
        out.append(r)
    return out
