#!/usr/bin/env python3
"""FEM eigenvalue convergence against the radial solver on caps.

S^2: tilt pair of the gamma = pi/3 cap under uniform refinement.
S^3: azimuthal modes m = 0, 1 of the meridian rectangle.

Usage: python scripts/convergence_study.py [--h0 0.08] [--levels 4]
"""

import argparse
import math
import time

import numpy as np

from sphereig.cap_spectrum import CapProblem, solve_mode
from sphereig.fem import assemble_s2, assemble_s3_axisym, neumann_spectrum
from sphereig.mesh import (DomainSpec, build_meridian_mesh, build_planar_mesh,
                           refine)

GAMMA = math.pi / 3


def s2_study(h0, levels):
    mu_exact = solve_mode(CapProblem(dim=2, gamma=GAMMA, mode_l=1), 1)[0].mu
    print(f"S^2 cap gamma=pi/3: radial mu_11 = {mu_exact:.12f}")
    print(f"{'h':>8s} {'n':>8s} {'mu1_h':>16s} {'error':>12s} {'gap':>10s} {'t[s]':>6s}")
    mesh = build_planar_mesh(DomainSpec(kind="cap", dim=2, gamma=GAMMA), h0)
    errs, hs = [], []
    for _ in range(levels):
        t0 = time.perf_counter()
        vals, _ = neumann_spectrum(assemble_s2(mesh), 3)
        err = vals[1] - mu_exact
        gap = abs(vals[2] - vals[1]) / vals[1]
        print(f"{mesh.h:8.4f} {mesh.n_vertices:8d} {vals[1]:16.10f} "
              f"{err:12.3e} {gap:10.2e} {time.perf_counter() - t0:6.1f}")
        errs.append(err)
        hs.append(mesh.h)
        mesh = refine(mesh)
    order = np.polyfit(np.log(hs), np.log(np.abs(errs)), 1)[0]
    print(f"fitted order: {order:.3f}\n")


def s3_study(h0, levels):
    mu11 = solve_mode(CapProblem(dim=3, gamma=GAMMA, mode_l=1), 1)[0].mu
    mu02 = solve_mode(CapProblem(dim=3, gamma=GAMMA, mode_l=0), 2)[1].mu
    print(f"S^3 cap gamma=pi/3: radial mu_11 = {mu11:.10f}, mu_02 = {mu02:.10f}")
    print(f"{'h':>8s} {'n':>8s} {'m=1 error':>12s} {'t[s]':>6s}")
    mesh = build_meridian_mesh(DomainSpec(kind="cap", dim=3, gamma=GAMMA), h0)
    errs, hs = [], []
    for _ in range(levels):
        t0 = time.perf_counter()
        vals, _ = neumann_spectrum(assemble_s3_axisym(mesh, 1), 2)
        errs.append(vals[0] - mu11)
        hs.append(mesh.h)
        print(f"{mesh.h:8.4f} {mesh.n_vertices:8d} {errs[-1]:12.3e} "
              f"{time.perf_counter() - t0:6.1f}")
        mesh = refine(mesh)
    order = np.polyfit(np.log(hs), np.log(np.abs(errs)), 1)[0]
    print(f"fitted order: {order:.3f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--h0", type=float, default=0.08)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()
    s2_study(args.h0, args.levels)
    s3_study(args.h0, max(2, args.levels - 1))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
