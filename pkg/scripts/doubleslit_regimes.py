#!/usr/bin/env python3
"""Regime label of the two-slit screen pattern across slit-to-screen distances."""

import argparse

import numpy as np

from mzsim.diffraction import SlitGeometry
from mzsim.scenarios import run_doubleslit_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--zmin", type=float, default=2e-3)
    ap.add_argument("--zmax", type=float, default=5.0)
    ap.add_argument("--n", type=int, default=12, help="log-spaced distances")
    ap.add_argument("--grid-points", type=int, default=1001)
    args = ap.parse_args()

    geom = SlitGeometry()
    zs = np.geomspace(args.zmin, args.zmax, args.n)
    print(f"{'z (m)':>9} {'regime':>15} {'lobes':>6} {'maxima':>7} {'spacing/(lz/d)':>15}")
    for e in run_doubleslit_sweep(geom, zs, args.grid_points):
        ratio = "-" if e.spacing is None else f"{e.spacing / e.expected_spacing:.4f}"
        print(f"{e.z:9.4g} {e.regime.regime.value:>15} {e.regime.n_lobes:6d} {e.regime.n_maxima:7d} {ratio:>15}")


if __name__ == "__main__":
    main()
