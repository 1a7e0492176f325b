"""The congruence obstruction and how the density increment removes it.

A = (2Z)^5 contains no pair at odd squared distance, yet every point of A
sees A on a whole sphere once distances are scaled by 2.  The increment step
spots the dense residue class and rescales it to the full box.
"""
import argparse

from spheredist import density_increment, generate_set, pinned_check, uniformity_test, unpinned_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--side", type=int, default=12)
    args = ap.parse_args()

    A = generate_set("congruence:r=2", 5, args.side)
    print(f"|A| = {len(A)}, density {A.density:.5f}")
    print("lam  best ratio q=1  best ratio q=2")
    for lam in range(1, 7):
        r1 = unpinned_check(A, lam, 0.1, q=1).best_ratio
        r2 = unpinned_check(A, lam, 0.1, q=2).best_ratio
        print(f"{lam:3d}  {r1:14.3f}  {r2:14.3f}")
    p = pinned_check(A, 1, 6, 0.1, q=2)
    print(f"pinned point for lam in [1, 6] at scale 2: {p.pinned_x}")

    u = uniformity_test(A, 0.5)
    print(f"\nuniformity mod {u.q_eta_val}: worst class {u.worst_residue}, ratio {u.worst_ratio:.1f}, passed={u.passed}")
    trace = density_increment(A, 0.5)
    for i, step in enumerate(trace.steps):
        print(f"step {i}: side {step.set.side}, density {step.density:.5f}")
    print("status:", trace.status)


if __name__ == "__main__":
    main()
