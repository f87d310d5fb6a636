"""Quantized transport LP optimum against the universal bound as atoms increase."""

import argparse

from paritybounds import LinearDensity, ShiftedExponential, universal_bound
from paritybounds.verify import oracle_run

PROBLEMS = {
    "linear_max": ([LinearDensity(t) for t in (0.4, 0.2, -0.3)], "max"),
    "linear_min": ([LinearDensity(t) for t in (0.4, 0.2, -0.3)], "min"),
    "shifted_exp_min": ([ShiftedExponential(1.0, 0.3)] * 3, "min"),
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--atoms", type=int, nargs="+", default=[4, 6, 8, 12, 16, 20])
    args = ap.parse_args()
    print("problem,n_atoms,value,bound,gap")
    for name, (ms, target) in PROBLEMS.items():
        b = universal_bound(ms).value
        b = b if target == "max" else -b
        for n in args.atoms:
            r = oracle_run(ms, n, target, b)
            print(f"{name},{n},{r.value:.8f},{r.bound:.8f},{r.gap:.8f}")
