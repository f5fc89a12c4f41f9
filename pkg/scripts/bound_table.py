#!/usr/bin/env python3
"""Print every labeled error envelope on |kappa(n,r) - e^{-H_r}| at one point,
next to the high-precision truth when the exact table is affordable.

Usage:
    python3 scripts/bound_table.py [--n 10000] [--r 1000]
"""

import argparse
import math

from cycledens.asymptotics import kappa_error_bounds
from cycledens.exactcore import harmonic, kappa_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--r", type=int, default=1_000)
    args = ap.parse_args()
    n, r = args.n, args.r

    truth = None
    if n <= 200_000:
        kappa = kappa_table(n, r, cross_check=False)[n]
        truth = abs(kappa - math.exp(-harmonic(r).value))
        print(f"|kappa({n},{r}) - e^-H_r| = {truth:.6e}\n")

    print(f"{'regime':>18} {'log bound':>14} {'bound':>14} {'in range':>9}")
    for est in kappa_error_bounds(n, r):
        bound = math.exp(est.log_value) if est.log_value < 700 else math.inf
        print(f"{est.regime.value:>18} {est.log_value:>14.4f} "
              f"{bound:>14.6e} {str(est.valid):>9}")


if __name__ == "__main__":
    main()
