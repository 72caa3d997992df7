"""Mean and variance of X_T under u = -2 sign(x - a) for a range of switching points a.

Independent of the optimiser: each row is one push-forward of a fixed feedback
on the full grid.

    python3 scripts/switch_scan.py
"""

import numpy as np

from lawopt.dp import ControlField, push_forward
from lawopt.lattice import Dynamics, Lattice, build_stencils
from lawopt.measure import dirac
from lawopt.problems import FULL_GRID


def main():
    lat = Lattice.uniform(**FULL_GRID)
    st = build_stencils(lat, Dynamics.controlled_drift())
    up, down = lat.control_index(2.0), lat.control_index(-2.0)
    print("a,mean,variance")
    for a in np.round(np.arange(-1.4, -2.25, -0.05), 2):
        row = np.where(lat.x < a, up, down)
        fb = ControlField(lat, np.tile(row, (lat.nt, 1)).astype(np.int64))
        m = push_forward(dirac(lat, 0.0), fb, st)[-1]
        print(f"{a},{m.mean():.5f},{m.variance():.5f}")


if __name__ == "__main__":
    main()
