#!/usr/bin/env python3
"""Tabulate the saddle-point estimate of nu(n, r) against the exact DP value.

Holds r fixed and doubles n, printing the relative error at each step;
the error should shrink roughly in proportion to r/n.

Usage:
    python3 scripts/saddle_convergence.py [--r 100] [--n-start 1000] [--steps 5]
"""

import argparse
import math

from cycledens.asymptotics import nu_saddle
from cycledens.exactcore import nu_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, default=100)
    ap.add_argument("--n-start", type=int, default=1000)
    ap.add_argument("--steps", type=int, default=5)
    args = ap.parse_args()

    print(f"{'n':>8} {'u':>8} {'rel error':>12} {'shrink':>8}")
    prev = None
    n = args.n_start
    for _ in range(args.steps):
        exact = math.log(nu_table(n, args.r)[n])
        est = nu_saddle(n, args.r).log_value
        err = abs(math.exp(est - exact) - 1.0)
        shrink = f"{err / prev:8.3f}" if prev else " " * 8
        print(f"{n:>8} {n / args.r:>8.1f} {err:>12.3e} {shrink}")
        prev = err
        n *= 2


if __name__ == "__main__":
    main()
