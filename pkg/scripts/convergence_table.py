"""Finite-difference Hessian error against the exact Hessian of the affine
family, for a range of steps and sphere dimensions."""
import argparse

import numpy as np

from quadrev import SolutionParams, convergence_scan, sample_sphere


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="2,3,5")
    ap.add_argument("--hs", default="1e-1,3e-2,1e-2,3e-3,1e-3,3e-4,1e-4,1e-5,1e-6")
    ap.add_argument("--c2", type=float, default=2.0)
    ap.add_argument("--C", type=float, default=1.0)
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    hs = [float(h) for h in args.hs.split(",")]
    for n in (int(d) for d in args.dims.split(",")):
        xi = np.eye(n + 1)[-1]
        scan = convergence_scan(SolutionParams(args.c2, args.C, xi).field(),
                                sample_sphere(n, args.samples, seed=args.seed), hs)
        print(f"n = {n}")
        print(f"  {'h':>8} {'max error':>11} {'roundoff':>11} {'order':>7}  reliable")
        for r in scan.rows:
            order = "" if r.order is None else f"{r.order:7.3f}"
            print(f"  {r.h:8.0e} {r.max_error:11.3e} {r.roundoff_bound:11.3e} {order:>7}  {r.reliable}")


if __name__ == "__main__":
    main()
