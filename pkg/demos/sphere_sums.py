"""Lattice spheres in five dimensions and the size of their exponential sums.

Prints r_5(lam) for small lam, checks the two anchors of sigma_hat, and shows
the largest sampled |sigma_hat_lam| off the major arcs shrinking as lam grows.
"""
import argparse

import numpy as np

from spheredist import enumerate_sphere, representation_counts, sigma_hat, verify_keyu


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    counts = representation_counts(5, 12)
    print("lam  r_5(lam)")
    for lam, n in enumerate(counts):
        print(f"{lam:3d}  {int(n)}")

    half = np.full(5, 0.5)
    for lam in (7, 8):
        S = enumerate_sphere(5, lam)
        print(f"sigma_hat_{lam}(0) = {sigma_hat(S, np.zeros(5)).real:.3f}, at (1/2,...,1/2) = {sigma_hat(S, half).real:+.3f}")

    print("\nlam   max |sigma_hat| off arcs (q <= 4)   argmax")
    for lam in (100, 200, 400):
        r = verify_keyu(5, 0.5, lam, q_max=4, n_samples=args.samples, seed=args.seed)
        print(f"{lam:4d}  {r.max_abs:.4f}                            {np.round(r.argmax_xi, 3)}")


if __name__ == "__main__":
    main()
