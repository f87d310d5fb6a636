"""Sharpness maps: the linear-density cross-polytope and the shifted-exponential threshold."""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from paritybounds import LinearDensity, ShiftedExponential, feasibility


def cross_polytope(path: Path, k: int, grid: int) -> None:
    axis = -1.0 + 2.0 * np.arange(1, k + 1) / (k + 1.0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta1", "theta2", "theta3", "l1", "even", "odd"])
        for t in np.array(np.meshgrid(axis, axis, axis)).reshape(3, -1).T:
            ms = [LinearDensity(x) for x in t]
            w.writerow([*t, np.abs(t).sum(), feasibility(ms, "even", grid).sharp,
                        feasibility(ms, "odd", grid).sharp])


def exp_threshold(path: Path, lam: float, grid: int) -> float:
    a_grid = np.linspace(0.01, 2 * math.log(2) / (2 * lam), 200)
    flip = None
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "even_sharp", "even_worst_slack"])
        for a in a_grid:
            r = feasibility([ShiftedExponential(lam, a)] * 3, "even", grid)
            w.writerow([a, r.sharp, r.worst_slack])
            if flip is None and not r.sharp:
                flip = a
    return flip


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--k", type=int, default=21, help="theta points per axis")
    ap.add_argument("--grid", type=int, default=1025)
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cross_polytope(out / "cross_polytope.csv", args.k, args.grid)
    flip = exp_threshold(out / "shifted_exp_threshold.csv", args.lam, args.grid)
    print(f"first non-sharp a = {flip:.5f}; log 2 / (2 lambda) = {math.log(2) / (2 * args.lam):.5f}")
