#!/usr/bin/env python3
"""Verify the main inequality over the 20-domain corpus and write a CSV.

Usage: python scripts/run_corpus.py [--h 0.02] [--out corpus_report.csv]
"""

import argparse
import time

from sphereig.errors import InputError, SolverError
from sphereig.verifier import (corpus, margin_tolerance, report_row,
                               verify_domain, write_csv)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--h", type=float, default=0.02)
    ap.add_argument("--out", default="corpus_report.csv")
    ap.add_argument("--no-proof-steps", action="store_true")
    args = ap.parse_args()

    rows = []
    failures = 0
    t_all = time.perf_counter()
    for name, spec, equality in corpus():
        t0 = time.perf_counter()
        try:
            rep = verify_domain(spec, args.h,
                                proof_steps=not args.no_proof_steps)
        except (InputError, SolverError) as exc:
            print(f"{name:34s} ERROR {exc}")
            rows.append({"name": name, "status": f"error: {exc}"})
            failures += 1
            continue
        ok = rep.margin >= -margin_tolerance(rep.mesh_h)
        if equality:
            ok &= abs(rep.margin) <= 1e-3
        else:
            ok &= rep.margin > 0.0
        failures += 0 if ok else 1
        rows.append(report_row(name, rep, status="ok" if ok else "margin"))
        kind = "ball " if equality else "other"
        print(f"{name:34s} {kind} margin={rep.margin:+.3e} "
              f"gamma={rep.equivalent_gamma:.4f} "
              f"[{time.perf_counter() - t0:5.1f}s] {'PASS' if ok else 'FAIL'}")
    write_csv(rows, args.out)
    print(f"\nwrote {args.out}; {failures} failure(s); "
          f"total {time.perf_counter() - t_all:.0f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
