"""``statdisc`` command line.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure
(divergence, under-resolution, singular data along a disc).  Every run that
writes an output also writes ``<out>.manifest.json`` with the input hash,
options, versions and a residual summary; nothing time-dependent goes into
outputs so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .conormal_index import FibrationEquations, assemble_G, matrix_B, maslov_index
from .disc_core import HermitianForm, LiftedDisc, NormalFormSurface, as_point
from .errors import DiscError, NumericalFailure
from .jet_determination import reconstruct_map
from .maps import HolomorphicMap
from .normal_scaling import dilate_defining, loglog_slope, pushforward_decay_probe, to_normal_form
from .polynomial import DefiningPolynomial
from .quadric_discs import (
    FullDiscParams,
    StarDiscParams,
    build_disc_full,
    build_disc_star,
    center_of_star,
    conormality_residual,
    gluing_residual,
)
from .rh_solver import DiscConstraint, SolverOptions, center_grid, family_scan, solve_with_continuation

log = logging.getLogger("statdisc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------
def parse_complex_list(text: str) -> np.ndarray:
    """``"2, 1+0.5j"`` -> complex array."""
    try:
        return np.array([complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()])
    except ValueError as exc:
        raise UsageError(f"cannot parse complex list {text!r}") from exc


def parse_form(text: str, n: int | None = None) -> HermitianForm:
    """``identity`` (with ``--n``), ``diag:1,-1``, a JSON matrix, or a JSON file."""
    if text == "identity":
        return HermitianForm(np.eye(n or 1))
    if text.startswith("diag:"):
        return HermitianForm(np.diag(parse_complex_list(text[5:]).real))
    path = Path(text)
    data = json.loads(path.read_text()) if path.exists() else json.loads(text)
    M = np.array([[complex(*c) if isinstance(c, list) else complex(c) for c in row] for row in data])
    return HermitianForm(M)


def read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def read_surface(path: str) -> NormalFormSurface:
    return NormalFormSurface.from_json(read_json(path))


def read_map(path: str) -> HolomorphicMap:
    data = read_json(path)
    if isinstance(data, list):  # bare list of component tables
        data = {"n": len(data) - 1, "components": data}
    return HolomorphicMap.from_json(data)


def write_json(path: str, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_manifest(out: str, args, inputs: list[str], summary: dict) -> None:
    h = hashlib.sha256()
    for p in inputs:
        h.update(Path(p).read_bytes())
    opts = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "command": args.command,
        "options": opts,
        "inputs": inputs,
        "inputs_sha256": h.hexdigest(),
        "versions": {"statdisc": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "summary": summary,
    }
    write_json(out + ".manifest.json", manifest)


def _c(z) -> list:
    z = np.asarray(z, dtype=complex)
    return [[float(v.real), float(v.imag)] for v in z.ravel()]


def _opts(args) -> SolverOptions:
    return SolverOptions(N=args.modes, tol=args.tol)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def cmd_disc_quadric(args) -> int:
    v = parse_complex_list(args.v)
    A = parse_form(args.A, len(v))
    a = complex(args.a.replace(" ", ""))
    if args.w is not None:
        p = FullDiscParams(a, v, parse_complex_list(args.w), args.y0, args.b)
        d = build_disc_full(p, A, args.modes)
    else:
        p = StarDiscParams(a, v)
        d = build_disc_star(p, A, args.modes)
    _emit_disc(args, d)
    summary = {
        "gluing_residual": gluing_residual(d, A),
        "conormality_residual": conormality_residual(d, A).proportionality,
        "center": _c(d.center),
    }
    write_manifest(args.out, args, [], summary)
    print(json.dumps(summary, sort_keys=True))
    return 0


def _emit_disc(args, d: LiftedDisc) -> None:
    write_json(args.out, d.to_json())
    if getattr(args, "csv", None):
        write_csv(args.csv, d.csv_header(), d.to_csv_rows())


def cmd_disc_solve(args) -> int:
    S = read_surface(args.surface)
    if (args.center is None) == (args.jet is None):
        raise UsageError("give exactly one of --center or --jet")
    if args.center is not None:
        c = DiscConstraint.at_center(parse_complex_list(args.center))
    else:
        vals = parse_complex_list(args.jet)
        c = DiscConstraint.at_jet(vals[:-1], vals[-1])
    disc, report = solve_with_continuation(S, c, opts=_opts(args), steps=args.steps)
    _emit_disc(args, disc)
    write_json(args.out + ".report.json", report.to_json())
    write_manifest(args.out, args, [args.surface], report.to_json())
    print(json.dumps({"converged": report.converged, "fine_residual": report.fine_residual, "center": _c(disc.center)}))
    return 0


def cmd_disc_scan(args) -> int:
    S = read_surface(args.surface)
    center = parse_complex_list(args.center)
    base, _ = solve_with_continuation(S, DiscConstraint.at_center(center), opts=_opts(args), steps=args.steps)
    entries = family_scan(S, base, center_grid(center, args.radius, args.size), _opts(args))
    rows = []
    for e in entries:
        res = e.report.fine_residual if e.ok else float("nan")
        status = "ok" if e.ok else type(e.error).__name__
        rows.append([f"{z.real:.17g}" for z in e.center] + [f"{z.imag:.17g}" for z in e.center] + [f"{res:.6e}", status])
    n = S.n
    header = [f"re_z{j}" for j in range(n + 1)] + [f"im_z{j}" for j in range(n + 1)] + ["fine_residual", "status"]
    write_csv(args.out, header, rows)
    solved = [e for e in entries if e.ok]
    summary = {
        "solved": len(solved),
        "total": len(entries),
        "max_fine_residual": max((e.report.fine_residual for e in solved), default=None),
    }
    write_manifest(args.out, args, [args.surface], summary)
    print(json.dumps(summary, sort_keys=True))
    return 0 if len(solved) == len(entries) else 2


def cmd_indices(args) -> int:
    S = read_surface(args.surface)
    d = LiftedDisc.from_json(read_json(args.disc))
    G = assemble_G(FibrationEquations(S), d, args.M)
    B = matrix_B(G)
    out = {"maslov": maslov_index(B), "det_winding_samples": B.M, "min_condition": float(G.condition.min())}
    print(json.dumps(out, sort_keys=True))
    if args.out:
        write_json(args.out, out)
        write_manifest(args.out, args, [args.surface, args.disc], out)
    return 0


def cmd_normalform(args) -> int:
    rho = DefiningPolynomial.from_json(read_json(args.rho))
    p = parse_complex_list(args.point) if args.point else None
    surface, change = to_normal_form(rho, p)
    write_json(args.out, surface.to_json())
    write_json(args.out + ".change.json", change.to_json())
    summary = {"truncation_residual": change.truncation_residual, "A": _c(surface.A.A)}
    write_manifest(args.out, args, [args.rho], summary)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_dilate(args) -> int:
    S = dilate_defining(read_surface(args.surface), args.t)
    write_json(args.out, S.to_json())
    write_manifest(args.out, args, [args.surface], {"t": args.t})
    return 0


def cmd_decay(args) -> int:
    F = read_map(args.map)
    d = LiftedDisc.from_json(read_json(args.disc))
    ts = [float(t) for t in args.t.split(",")]
    series = pushforward_decay_probe(F, d, ts, eps=args.eps)
    write_csv(args.out, ["t", "holder_norm"], [[f"{t:.17g}", f"{v:.17g}"] for t, v in series])
    summary = {"slope": loglog_slope(series) if len(series) > 1 and all(v > 0 for _, v in series) else None}
    write_manifest(args.out, args, [args.map, args.disc], summary)
    print(json.dumps(summary, sort_keys=True))
    return 0


def _jetdet_points(args, S: NormalFormSurface, rng) -> list[np.ndarray]:
    if args.points:
        return [as_point(parse_complex_list(line), S.n) for line in Path(args.points).read_text().splitlines() if line.strip()]
    if args.grid:
        vals = args.grid.split(";")
        if len(vals) != 3:
            raise UsageError("--grid expects 'center;radius;size'")
        return center_grid(parse_complex_list(vals[0]), float(vals[1]), int(vals[2]))
    from .quadric_discs import random_star_params

    return [center_of_star(random_star_params(rng, S.A, 0.4), S.A) for _ in range(args.count)]


def cmd_jetdet(args) -> int:
    rng = np.random.default_rng(args.seed)
    S = read_surface(args.surface)
    T = read_surface(args.target) if args.target else S
    F = read_map(args.map)
    if np.abs(F(np.zeros((1, S.n + 1)))).max() > 1e-12:
        raise UsageError("the map must fix the origin (translate with the normal-form change first)")
    pts = _jetdet_points(args, S, rng)
    rec = reconstruct_map(F.jet2(), S, T, pts, strict=False)
    direct = F(np.array(pts))
    rows, gaps, failures = [], [], 0
    for z, r, dz in zip(pts, rec, direct):
        if isinstance(r, Exception):
            failures += 1
            r = np.full(S.n + 1, np.nan)
        gap = float(np.linalg.norm(r - dz))
        gaps.append(gap)
        rows.append([json.dumps(_c(z)), json.dumps(_c(r)), json.dumps(_c(dz)), f"{gap:.6e}"])
    write_csv(args.out, ["point", "reconstructed", "direct", "gap"], rows)
    finite = [g for g in gaps if np.isfinite(g)]
    summary = {"points": len(pts), "failures": failures, "max_gap": max(finite, default=None)}
    inputs = [args.surface, args.map] + ([args.target] if args.target else []) + ([args.points] if args.points else [])
    write_manifest(args.out, args, inputs, summary)
    print(json.dumps(summary, sort_keys=True))
    return 0 if failures == 0 else 2


def cmd_selftest(args) -> int:
    from .acceptance import run_all

    only = [int(k) for k in args.only.split(",")] if args.only else None
    results = run_all(only, seed=args.seed, echo=print)
    if args.out:
        write_json(args.out, [r.to_json() for r in results])
    return 0 if all(r.passed for r in results) else 2


# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="statdisc", description="Stationary discs and 2-jet determination experiments.")
    p.add_argument("--seed", type=int, default=0, help="seed for all random sampling (default 0)")
    p.add_argument("--log-level", default="WARNING")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(q):
        q.add_argument("--modes", type=int, default=None, help="truncation order N")
        q.add_argument("--tol", type=float, default=1e-10)
        q.add_argument("--steps", type=int, default=4, help="continuation steps on fallback")

    disc = sub.add_parser("disc", help="construct or solve discs")
    dsub = disc.add_subparsers(dest="disc_command", required=True, parser_class=_Parser)
    q = dsub.add_parser("quadric", help="closed-form disc of a hyperquadric")
    q.add_argument("--A", default="identity", help="identity | diag:1,-1 | JSON matrix or file")
    q.add_argument("--a", default="0")
    q.add_argument("--v", default="1", help="comma-separated complex vector")
    q.add_argument("--w", default=None, help="give w (and --y0, --b) for a disc of the full family")
    q.add_argument("--y0", type=float, default=0.0)
    q.add_argument("--b", type=float, default=1.0)
    q.add_argument("--modes", type=int, default=None)
    q.add_argument("--out", required=True)
    q.add_argument("--csv", default=None, help="also write boundary samples as CSV")
    q.set_defaults(func=cmd_disc_quadric)

    s = dsub.add_parser("solve", help="solve a disc on a perturbed surface")
    s.add_argument("--surface", required=True)
    s.add_argument("--center", default=None)
    s.add_argument("--jet", default=None, help="w_1,...,w_n,s0")
    solver_flags(s)
    s.add_argument("--out", required=True)
    s.add_argument("--csv", default=None)
    s.set_defaults(func=cmd_disc_solve)

    sc = dsub.add_parser("scan", help="center-pinned family scan on a grid")
    sc.add_argument("--surface", required=True)
    sc.add_argument("--center", default="2,1")
    sc.add_argument("--radius", type=float, default=0.1)
    sc.add_argument("--size", type=int, default=5)
    solver_flags(sc)
    sc.add_argument("--out", required=True)
    sc.set_defaults(func=cmd_disc_scan)

    ix = sub.add_parser("indices", help="Maslov index along a disc")
    ix.add_argument("--surface", required=True)
    ix.add_argument("--disc", required=True)
    ix.add_argument("--M", type=int, default=None)
    ix.add_argument("--out", default=None)
    ix.set_defaults(func=cmd_indices)

    nf = sub.add_parser("normalform", help="reduce a defining polynomial to normal form")
    nf.add_argument("--rho", required=True)
    nf.add_argument("--point", default=None)
    nf.add_argument("--out", required=True)
    nf.set_defaults(func=cmd_normalform)

    dl = sub.add_parser("dilate", help="anisotropic dilation of a surface")
    dl.add_argument("--surface", required=True)
    dl.add_argument("--t", type=float, required=True)
    dl.add_argument("--out", required=True)
    dl.set_defaults(func=cmd_dilate)

    dc = sub.add_parser("decay", help="pushforward decay probe")
    dc.add_argument("--map", required=True)
    dc.add_argument("--disc", required=True)
    dc.add_argument("--t", default="0.2,0.1,0.05")
    dc.add_argument("--eps", type=float, default=0.5)
    dc.add_argument("--out", required=True)
    dc.set_defaults(func=cmd_decay)

    jd = sub.add_parser("jetdet", help="reconstruct a map from its 2-jet")
    jd.add_argument("--surface", required=True)
    jd.add_argument("--target", default=None)
    jd.add_argument("--map", required=True)
    jd.add_argument("--points", default=None, help="file with one comma-separated point per line")
    jd.add_argument("--grid", default=None, help="'center;radius;size'")
    jd.add_argument("--count", type=int, default=20, help="random admissible points if no --points/--grid")
    jd.add_argument("--out", required=True)
    jd.set_defaults(func=cmd_jetdet)

    st = sub.add_parser("selftest", help="run the acceptance experiments")
    st.add_argument("--only", default=None, help="comma-separated criterion numbers")
    st.add_argument("--out", default=None)
    st.set_defaults(func=cmd_selftest)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"statdisc: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"statdisc: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (UsageError, DiscError, ValueError, KeyError) as exc:
        print(f"statdisc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
