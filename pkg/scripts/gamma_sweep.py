#!/usr/bin/env python3
"""Sweep mu_1(D_gamma) against the cap radius and check its monotonicity.

Writes one CSV row per radius with mu_11, mu_02 and their minimum; the
column must decrease strictly and stay above N for gamma < pi/2.

Usage: python scripts/gamma_sweep.py [--dim 2] [--steps 50] [--out gamma_sweep.csv]
"""

import argparse
import math

import numpy as np

from sphereig.mesh import DomainSpec
from sphereig.verifier import sweep, write_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--steps", type=int, default=50)
    ap.add_argument("--lo", type=float, default=0.1)
    ap.add_argument("--out", default="gamma_sweep.csv")
    args = ap.parse_args()

    template = DomainSpec(kind="cap", dim=args.dim, gamma=1.0)
    values = np.linspace(args.lo, math.pi / 2, args.steps)
    rows = sweep(template, "gamma", values, h=float("nan"), cap_only=True)
    write_csv(rows, args.out,
              columns=("name", "dim", "gamma", "mu1_cap", "mu1", "mu2", "status"))

    mus = [r["mu1_cap"] for r in rows if r["status"] == "ok"]
    decreasing = all(b < a for a, b in zip(mus, mus[1:]))
    above = all(m > args.dim for m in mus[:-1])
    print(f"wrote {args.out}")
    print(f"strictly decreasing: {decreasing}")
    print(f"mu1 > {args.dim} below the hemisphere: {above}")
    print(f"endpoints: mu1({values[0]:.3f}) = {mus[0]:.6f}, "
          f"mu1(pi/2) = {mus[-1]:.12f}")
    return 0 if (decreasing and above) else 1


if __name__ == "__main__":
    raise SystemExit(main())
