"""Reproduce every worked example into ``results/<name>/`` via the CLI."""

import argparse
import sys

from paritybounds.cli import EXAMPLES, main


def run(out: str, n: int | None) -> int:
    worst = 0
    for name in EXAMPLES:
        argv = ["example", name, "--out", f"{out}/{name}"]
        if n is not None:
            argv += ["--n", str(n)]
        worst = max(worst, main(argv))
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--n", type=int, default=None, help="rows per example")
    args = ap.parse_args()
    sys.exit(run(args.out, args.n))
