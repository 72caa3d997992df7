"""Delay-and-branch distance to the mixture for two opposing constant controls.

Runs both assignments of the controls to the Gaussian quantile cells: the lower
cell driving with -2 (the configured order) and the reverse.

    python3 scripts/convexity_demo.py [--paths 100000] [--seeds 0 1 2]
"""

import argparse

from lawopt.dp import ControlField
from lawopt.lattice import Dynamics, Lattice
from lawopt.problems import COARSE_GRID
from lawopt.simulate import branching_demo, fit_loglog_slope

EPSILONS = [0.04, 0.01, 0.0025]


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--paths", type=int, default=100_000)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    args = parser.parse_args()
    lat = Lattice.uniform(**COARSE_GRID)
    dyn = Dynamics.controlled_drift()
    down, up = ControlField.constant(lat, -2.0), ControlField.constant(lat, 2.0)
    for label, controls in (("lower cell -> -2", [down, up]), ("lower cell -> +2", [up, down])):
        for seed in args.seeds:
            d = [branching_demo(dyn, controls, [0.5, 0.5], e, args.paths, seed).distance for e in EPSILONS]
            print(f"{label}  seed={seed}  d1={['%.4f' % v for v in d]}  slope={fit_loglog_slope(EPSILONS, d):.3f}")


if __name__ == "__main__":
    main()
