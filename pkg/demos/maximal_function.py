"""Spherical maximal averages of random functions on Z_16^5.

Shows the l2 ratio ||A_* f|| / ||f|| staying bounded over random inputs and
the mollified operator, which removes the major-arc part of f first.
"""
import argparse

import numpy as np

from spheredist import GridFunction, l2_ratio, maximal_average, mollified_maximal
from spheredist.averaging import decay_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    ratios = []
    for _ in range(args.trials):
        f = GridFunction(rng.normal(size=(16,) * 5))
        ratios.append(l2_ratio(maximal_average(f, 1, 20), f))
    print(f"||A_* f|| / ||f|| over [1, 20]: max {max(ratios):.3f}, mean {np.mean(ratios):.3f}")

    f = GridFunction(rng.normal(size=(16,) * 5))
    etas = (0.5, 0.25, 0.125)
    sq = []
    for eta in etas:
        out, info = mollified_maximal(f, eta, 4, 16, strict=False, return_info=True)
        sq.append(l2_ratio(out, f) ** 2)
        print(f"eta {eta:5.3f}: q_eta {info.q}, L2 {info.L2:.2f}, exact cutoff {info.exact_cutoff}, ratio^2 {sq[-1]:.3e}")
    print("fitted exponent:", decay_exponent(etas, sq))


if __name__ == "__main__":
    main()
