"""Compare H_min, its sigma-optimized version and the von Neumann conditional entropy.

Samples random states for each dimension pair and prints the spread of
H(A|B) - H_min and H_min_up - H_min, plus how often the reduction criterion
fails (equivalently, how often H_min is negative).

    python3 scripts/min_entropy_gap.py --samples 50
"""

import argparse

import numpy as np

from condent.entropy import UMEGAKI, conditional_entropy, hmin, hmin_up, reduction_criterion
from condent.states import sample_random


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kind", default="ginibre", choices=["ginibre", "separable", "pure"])
    args = ap.parse_args()
    print(f"{'dims':>6} {'H-Hmin min':>11} {'H-Hmin mean':>12} {'up-Hmin max':>12} {'violations':>11}")
    for dims in ((2, 2), (2, 3), (3, 3)):
        gap_vn, gap_up, viol = [], [], 0
        for i in range(args.samples):
            rho = sample_random(dims, args.kind, args.seed * 100003 + i)
            h = hmin(rho).value
            gap_vn.append(conditional_entropy(UMEGAKI, rho).value - h)
            gap_up.append(hmin_up(rho).value - h)
            viol += not reduction_criterion(rho)[0]
        print(f"{dims[0]}x{dims[1]:<4} {min(gap_vn):11.4f} {np.mean(gap_vn):12.4f} {max(gap_up):12.4f} "
              f"{viol:6d}/{args.samples}")


if __name__ == "__main__":
    main()
