#!/usr/bin/env python3
"""Compare the exact total variation distance with its scale-free limit H(u).

For each u, computes d_TV(u*r, r) for a geometric ladder of r and prints the
ratio to H(u); the ratio should approach 1 as r grows.

Usage:
    python3 scripts/dtv_study.py [--u 1 2 4] [--r 250 500 1000 2000]
"""

import argparse

from cycledens.dtv import dtv_exact, h_function
from cycledens.specialfns import build_buchstab_grid, build_dickman_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--u", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    ap.add_argument("--r", type=int, nargs="+",
                    default=[250, 500, 1000, 2000])
    args = ap.parse_args()

    v_max = max(max(args.u) + 2.0, 40.0)
    rho = build_dickman_grid(v_max)
    om = build_buchstab_grid(v_max)

    print(f"{'u':>6} {'r':>6} {'d_TV(u*r, r)':>14} {'H(u)':>14} {'ratio':>10}")
    for u in args.u:
        hu = h_function(u, rho, om)
        for r in args.r:
            d = dtv_exact(int(round(u * r)), r).exact
            print(f"{u:>6.2f} {r:>6} {d:>14.6e} {hu:>14.6e} {d / hu:>10.6f}")


if __name__ == "__main__":
    main()
