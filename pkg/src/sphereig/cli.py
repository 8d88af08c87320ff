"""Command-line interface.

Subcommands: ``cap-spectrum`` (radial cap eigenvalues), ``solve`` (FEM
spectrum of a domain spec file), ``verify`` (inequality report) and
``sweep`` (parameter sweeps to CSV).  Exit codes: 0 pass, 1 verification
margin below tolerance, 2 input error, 3 solver failure.
"""

import argparse
import math
import sys

import numpy as np

from sphereig.errors import InputError, SolverError
from sphereig.cap_spectrum import CapProblem, mu1_cap, solve_mode
from sphereig.fem import assemble_s2, assemble_s3_axisym, neumann_spectrum
from sphereig.mesh import (build_meridian_mesh, build_planar_mesh, export_mesh,
                           refine)
from sphereig import verifier
from sphereig.verifier import (load_domain_spec, margin_tolerance, report_row,
                               sweep, verify_domain, write_csv)

EXIT_PASS = 0
EXIT_MARGIN = 1
EXIT_INPUT = 2
EXIT_SOLVER = 3


def _num(text):
    try:
        return float(eval(text, {"__builtins__": {}}, {"pi": math.pi}))
    except Exception as exc:
        raise InputError(f"invalid number {text!r}: {exc}") from exc


def cmd_cap_spectrum(args):
    modes = [args.l] if args.l is not None else [0, 1]
    print(f"# dim={args.dim} gamma={args.gamma:.17g}")
    print(f"{'l':>3s} {'k':>3s} {'mu':>24s}")
    for l in modes:
        pairs = solve_mode(CapProblem(dim=args.dim, gamma=args.gamma, mode_l=l),
                           args.kmax)
        for p in pairs:
            print(f"{l:3d} {p.k:3d} {p.mu:24.17g}")
    if args.l is None:
        cap = mu1_cap(args.dim, args.gamma)
        print(f"# mu1(D_gamma) = {cap.value:.17g} "
              f"(attained by l=1: {cap.attained_by_l1})")
    return EXIT_PASS


def _build_mesh(spec, h, refinements):
    mesh = build_planar_mesh(spec, h) if spec.dim == 2 \
        else build_meridian_mesh(spec, h)
    for _ in range(refinements):
        mesh = refine(mesh)
    return mesh


def cmd_solve(args):
    spec = load_domain_spec(args.spec)
    mesh = _build_mesh(spec, args.h, 0)
    if args.export_mesh:
        export_mesh(mesh, args.export_mesh)
    print(f"# {args.spec}: dim={spec.dim} h={mesh.h:g} vertices={mesh.n_vertices}")
    if spec.dim == 2:
        vals, _ = neumann_spectrum(assemble_s2(mesh), args.count)
        print(f"{'i':>3s} {'mu':>24s}")
        for i, v in enumerate(vals):
            print(f"{i:3d} {v:24.17g}")
    else:
        for m in (0, 1):
            vals, _ = neumann_spectrum(assemble_s3_axisym(mesh, m), args.count)
            print(f"# azimuthal mode m={m}")
            print(f"{'i':>3s} {'mu':>24s}")
            for i, v in enumerate(vals):
                print(f"{i:3d} {v:24.17g}")
    return EXIT_PASS


def cmd_verify(args):
    spec = load_domain_spec(args.spec)
    rep = verify_domain(spec, args.h, refinements=args.refinements,
                        proof_steps=args.proof_steps)
    print(f"dim = {rep.dim}")
    for i, mu in enumerate(rep.eigenvalues, start=1):
        print(f"mu_{i} = {mu:.17g}")
    print(f"volume = {rep.domain_volume:.17g}")
    print(f"gamma = {rep.equivalent_gamma:.17g}")
    print(f"mu1_cap = {rep.mu1_cap:.17g}")
    print(f"lhs = {rep.lhs:.17g}")
    print(f"rhs = {rep.rhs:.17g}")
    print(f"margin = {rep.margin:.17g}")
    print(f"mesh_h = {rep.mesh_h:.17g}")
    print(f"refinements = {rep.refinements}")
    if rep.balancing_residual is not None:
        print(f"balancing_residual = {rep.balancing_residual:.17g}")
        print(f"balancing_scale = {rep.balancing_scale:.17g}")
    if rep.proof is not None:
        print(f"ratio_excess = {rep.proof.ratio_excess:.17g}")
        print(f"mass_excess = {rep.proof.mass_excess:.17g}")
        print(f"rearrangement_max = {rep.proof.rearrangement_max:.17g}")
        for i, (lhs, rhs) in enumerate(rep.proof.trial_bounds, start=1):
            print(f"trial_bound_{i} = {lhs:.17g} <= {rhs:.17g}")
    print(f"tolerance = {margin_tolerance(rep.mesh_h):.17g}")
    print(f"pass = {'true' if rep.passed else 'false'}")
    if args.csv:
        write_csv([report_row(args.spec, rep)], args.csv)
    return EXIT_PASS if rep.passed else EXIT_MARGIN


def cmd_sweep(args):
    template = load_domain_spec(args.template)
    values = np.linspace(args.start, args.stop, args.steps)
    rows = sweep(template, args.param, values, args.h, cap_only=args.cap_only)
    write_csv(rows, args.out)
    bad = [r for r in rows if str(r.get("status", "")).startswith("error")]
    print(f"wrote {len(rows)} rows to {args.out} ({len(bad)} errors)")
    return EXIT_PASS if not bad else EXIT_SOLVER


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sphereig",
        description="Neumann eigenvalues of hemisphere domains and the "
                    "harmonic-mean isoperimetric inequality")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cap-spectrum", help="radial eigenvalues of a geodesic cap")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--gamma", type=_num, required=True)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--kmax", type=int, default=3)
    p.set_defaults(func=cmd_cap_spectrum)

    p = sub.add_parser("solve", help="FEM eigenvalue table for a domain spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--h", type=_num, required=True)
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--export-mesh", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="inequality report for a domain spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--h", type=_num, required=True)
    p.add_argument("--refinements", type=int, default=0)
    p.add_argument("--proof-steps", action="store_true")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="parameter sweep, one CSV row per value")
    p.add_argument("--template", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="start", type=_num, required=True)
    p.add_argument("--to", dest="stop", type=_num, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--h", type=_num, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cap-only", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
