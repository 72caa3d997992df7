"""Multiplier of the expectation-floor problem by bisection, without the augmented Lagrangian.

Both functionals are linear, so for a multiplier lam the Lagrangian is minimised
by one standard solve with terminal cost x - lam exp(-x^2).  The constraint value
of that solve decreases in lam; its sign change brackets the multiplier.

    python3 scripts/multiplier_scan.py [--T 1.0] [--coarse]
"""

import argparse

import numpy as np

from lawopt.problems import COARSE_GRID, FULL_GRID, make_problem
from lawopt.lattice import Lattice


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--T", type=float, default=1.0)
    parser.add_argument("--coarse", action="store_true")
    args = parser.parse_args()
    grid = dict(COARSE_GRID if args.coarse else FULL_GRID, T=args.T)
    p = make_problem("expectation_floor", 0.4, Lattice.uniform(**grid))
    x = p.lattice.x

    def g(lam):
        return float(p.G(p.solve(x - lam * np.exp(-x * x)).m_T)[0])

    lo, hi = 0.0, 1.0
    while g(hi) > 0:
        lo, hi = hi, 2 * hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if g(mid) > 0 else (lo, mid)
    print(f"T={args.T}: G changes sign between lam={lo:.6f} (G={g(lo):.3e}) and lam={hi:.6f} (G={g(hi):.3e})")


if __name__ == "__main__":
    main()
