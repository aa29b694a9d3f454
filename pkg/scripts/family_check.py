"""Residuals of every system on a grid of (c2, C) over the solution family,
on both the analytic and the finite-difference path."""
import argparse

import numpy as np

from quadrev import SolutionParams, residual_report, sample_sphere, solution_to_quadric
from quadrev.errors import NoSolutionError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c2", default="0,0.5,1,2,5,10")
    ap.add_argument("--C", default="0.25,0.5,1,1.5,2")
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    xi = np.eye(args.dim + 1)[-1]
    pts = sample_sphere(args.dim, args.samples, seed=args.seed)
    print(f"{'c2':>5} {'C':>5} {'branch':>6} {'kind':>18} {'eq1 exact':>10} {'eq1 fd':>10} {'S dev':>10}")
    for c2 in (float(c) for c in args.c2.split(",")):
        for C in (float(c) for c in args.C.split(",")):
            for branch in ("plus", "minus") if c2 < 1 else ("plus",):
                try:
                    sol = SolutionParams(c2, C, xi, branch)
                except NoSolutionError:
                    continue
                kind = solution_to_quadric(sol).kind.value
                w = sol.field()
                exact = residual_report(w, pts, c2=c2, S=sol.S)
                fd = residual_report(w.as_generic(), pts, c2=c2)
                dev = exact.s_stats.max_dev if exact.s_stats else float("nan")
                print(f"{c2:5.2f} {C:5.2f} {branch:>6} {kind:>18} {exact.systems['eq1'].max:10.2e} "
                      f"{fd.systems['eq1'].max:10.2e} {dev:10.2e}")


if __name__ == "__main__":
    main()
