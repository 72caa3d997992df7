"""Tolerance sweeps for both test cases on the full grid, one sweep.csv per case.

    python3 scripts/reproduce_tables.py [--out out/tables] [--coarse]
"""

import argparse
import logging
from dataclasses import replace
from pathlib import Path

from lawopt.cli import run_sweep
from lawopt.config import load_config

ROOT = Path(__file__).resolve().parent.parent
TOLERANCES = [1e-3, 1e-4, 1e-5, 1e-6]


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", default="out/tables")
    parser.add_argument("--coarse", action="store_true", help="keep the coarse grid of the configs")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for name in ("tc1", "tc2"):
        cfg = replace(load_config(ROOT / "configs" / f"{name}.cfg"), full_grid=not args.coarse)
        rows = run_sweep(cfg, TOLERANCES, Path(args.out) / name)
        print(name)
        for r in rows:
            print("  " + "  ".join(f"{k}={v}" for k, v in r.items()))


if __name__ == "__main__":
    main()
