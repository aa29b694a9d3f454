"""Axis error and classification rate of the inverse-radial fit under
multiplicative Gaussian noise on rho."""
import argparse
import math

import numpy as np

from quadrev import QuadricParams, fit_arrays, focal_quadric, radial_array, sample_directions


def trial_stats(q: QuadricParams, sigma: float, count: int, trials: int, weights):
    angles, correct = [], 0
    for t in range(trials):
        X = sample_directions(q, count, seed=t)
        noise = np.random.default_rng([t, 1]).standard_normal(count)
        fit = fit_arrays(X, radial_array(q, X) * (1 + sigma * noise), weights=weights)
        if fit.C > 0:
            angles.append(math.acos(min(1.0, abs(fit.v @ q.xi) / fit.C)))
        correct += fit.kind is q.kind
    return float(np.median(angles)), float(np.max(angles)), correct


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", default="0.3,1.0,1.5")
    ap.add_argument("--sigmas", default="1e-4,1e-3,1e-2")
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--weights", choices=["none", "rho2"], default="none")
    args = ap.parse_args()
    weights = None if args.weights == "none" else args.weights
    print(f"{'eps':>5} {'sigma':>7} {'median ang':>11} {'max ang':>10} {'kind ok':>8}")
    for eps in (float(e) for e in args.eps.split(",")):
        q = focal_quadric(1.0, eps, np.array([0.0, 0.0, 1.0]))
        for sigma in (float(s) for s in args.sigmas.split(",")):
            med, mx, ok = trial_stats(q, sigma, args.count, args.trials, weights)
            print(f"{eps:5.2f} {sigma:7.0e} {med:11.2e} {mx:10.2e} {ok:5d}/{args.trials}")


if __name__ == "__main__":
    main()
