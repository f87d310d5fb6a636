"""Command-line interface: ``parity-bounds {bounds,sample,support,example,oracle}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from scipy.special import ndtri

from .bounds import DEFAULT_GRID, QuadratureError, feasibility, sharp_bounds, universal_bound
from .coupling import (
    CouplingSpec,
    InfeasibleSpec,
    sample,
    support_curves,
    write_support_csv,
)
from .marginal import (
    LinearDensity,
    Marginal,
    MarginalError,
    Normal,
    ShiftedExponential,
    marginal_from_json,
)
from .simplex import LPInfeasible, LPUnbounded
from .verify import mc_expected_product, oracle_run

EXIT_OK, EXIT_SPEC, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    marginals: tuple[Marginal, ...]
    target: str = "max"
    seed: int = 0
    grid: int = DEFAULT_GRID
    n_samples: int = 100_000

    @property
    def d(self) -> int:
        return len(self.marginals)

    def to_json(self) -> dict:
        return {"d": self.d, "marginals": [m.to_json() for m in self.marginals],
                "target": self.target, "seed": self.seed, "grid": self.grid,
                "n_samples": self.n_samples}

    @classmethod
    def from_json(cls, obj) -> "ProblemSpec":
        if not isinstance(obj, dict):
            raise SpecError("spec must be a JSON object")
        try:
            ms = tuple(marginal_from_json(m) for m in obj["marginals"])
        except KeyError as exc:
            raise SpecError(f"missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise SpecError(f"bad marginal: {exc}") from None
        d = obj.get("d", len(ms))
        if d != len(ms):
            raise SpecError(f"d={d} but {len(ms)} marginals given")
        if d < 2:
            raise SpecError("need d >= 2")
        target = obj.get("target", "max")
        if target not in ("max", "min"):
            raise SpecError("target must be 'max' or 'min'")
        try:
            seed = int(obj.get("seed", 0))
            grid = int(obj.get("grid", DEFAULT_GRID))
            n = int(obj.get("n_samples", 100_000))
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc)) from None
        if grid < 64 or n < 0 or seed < 0:
            raise SpecError("need grid >= 64, n_samples >= 0 and seed >= 0")
        return cls(ms, target, seed, grid, n)


def load_spec(path: str) -> ProblemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON in {path}: {exc}") from None
    return ProblemSpec.from_json(obj)


MU75 = float(ndtri(0.75))

EXAMPLES: dict[str, ProblemSpec] = {
    "linear": ProblemSpec(tuple(LinearDensity(t) for t in (0.4, 0.2, -0.3)), "max", 1),
    "shifted_exp": ProblemSpec((ShiftedExponential(1.0, 0.3),) * 3, "max", 2),
    "shifted_exp_hetero": ProblemSpec(
        tuple(ShiftedExponential(l, a) for l, a in zip((0.8, 1.0, 1.9), (0.15, 0.38, 0.20))),
        "max", 3),
    "normal_max": ProblemSpec((Normal(MU75, 1.0),) * 3, "max", 4),
    "normal_min": ProblemSpec((Normal(-MU75, 1.0),) * 3, "min", 5),
    "d4_normal": ProblemSpec((Normal(0.0, 1.0),) * 4, "max", 6),
}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _apply_overrides(spec: ProblemSpec, args) -> ProblemSpec:
    if getattr(args, "target", None):
        spec = replace(spec, target=args.target)
    if getattr(args, "seed", None) is not None:
        spec = replace(spec, seed=args.seed)
    if getattr(args, "grid", None) is not None:
        spec = replace(spec, grid=args.grid)
    if getattr(args, "n", None) is not None:
        spec = replace(spec, n_samples=args.n)
    return spec


def _coupling(spec: ProblemSpec, pivot: int | None = None) -> CouplingSpec:
    p = 0 if pivot is None else pivot - 1
    if not 0 <= p < spec.d:
        raise SpecError(f"--pivot must be in 1..{spec.d}")
    return CouplingSpec(spec.marginals, spec.target, seed=spec.seed, pivot=p)


def _sample_summary(batch, spec: ProblemSpec, bound: float) -> dict:
    out = {"n": batch.n, "target": spec.target,
           "bound": bound if spec.target == "max" else -bound}
    if batch.n >= 2:
        est = mc_expected_product(batch)
        out.update(mean=est.mean, stderr=est.stderr,
                   within_4_stderr=est.within(out["bound"], 4.0))
    return out


def cmd_bounds(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    print(_dump(sharp_bounds(spec.marginals, grid=spec.grid).to_json()))
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    cs = _coupling(spec, args.pivot)
    batch = sample(cs, spec.n_samples, grid=spec.grid)
    if args.out:
        batch.write_csv(args.out)
    summary = _sample_summary(batch, spec, universal_bound(spec.marginals).value)
    print(_dump(summary))
    return EXIT_OK


def cmd_support(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    if spec.d != 3:
        raise SpecError("support curves need d = 3")
    if args.points < 2:
        raise SpecError("--grid must be at least 2")
    report = feasibility(spec.marginals, "even" if spec.target == "max" else "odd", spec.grid)
    if not report.sharp:
        raise InfeasibleSpec(f"the {spec.target} bound is not attainable", report)
    curves = support_curves(spec.marginals, spec.target, args.points)
    if args.out:
        write_support_csv(curves, args.out)
    print(_dump({"legs": [str(c.pattern) for c in curves],
                 "junction": [m.zero_level for m in spec.marginals]}))
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _apply_overrides(load_spec(args.spec), args)
    bound = universal_bound(spec.marginals).value
    res = oracle_run(spec.marginals, args.atoms, spec.target,
                     bound if spec.target == "max" else -bound)
    print(_dump(res.to_json()))
    return EXIT_OK


def cmd_example(args) -> int:
    if args.name not in EXAMPLES:
        raise SpecError(f"unknown example {args.name!r}; choose from {sorted(EXAMPLES)}")
    spec = _apply_overrides(EXAMPLES[args.name], args)
    out = Path(args.out or f"example_{args.name}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "spec.json").write_text(_dump(spec.to_json()) + "\n")
    sb = sharp_bounds(spec.marginals, grid=spec.grid)
    report = sb.to_json()
    (out / "bounds.json").write_text(_dump({"upper": report["upper"], "lower": report["lower"],
                                            "abs_error_estimate": report["abs_error_estimate"]})
                                     + "\n")
    (out / "feasibility.json").write_text(_dump(report["feasibility"]) + "\n")
    batch = sample(_coupling(spec), spec.n_samples, grid=spec.grid)
    batch.write_csv(out / "samples.csv")
    summary = _sample_summary(batch, spec, sb.upper.value)
    (out / "summary.json").write_text(_dump(summary) + "\n")
    if spec.d == 3:
        write_support_csv(support_curves(spec.marginals, spec.target, args.points),
                          out / "support.csv")
    print(_dump({"example": args.name, "dir": str(out), **summary}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parity-bounds",
                                 description="Sharp bounds on E[X1...Xd] and extremal couplings.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, spec=True, grid=True):
        if spec:
            p.add_argument("--spec", required=True, help="problem spec JSON")
        if grid:
            p.add_argument("--grid", type=int, default=None, help="feasibility grid size")
        p.add_argument("--target", choices=("max", "min"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        return p

    p = common(sub.add_parser("bounds", help="universal bounds and sharpness"))
    p.set_defaults(func=cmd_bounds)
    p = common(sub.add_parser("sample", help="sample the extremal coupling to CSV"))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--pivot", type=int, default=None, help="1-based pivot coordinate")
    p.set_defaults(func=cmd_sample)
    p = common(sub.add_parser("support", help="trivariate support curves to CSV"), grid=False)
    p.add_argument("--grid", "--points", dest="points", type=int, default=1024,
                   help="levels per leg")
    p.set_defaults(func=cmd_support)
    p = common(sub.add_parser("oracle", help="discrete transport LP on a quantized problem"))
    p.add_argument("--atoms", "--n", dest="atoms", type=int, default=8)
    p.set_defaults(func=cmd_oracle)
    p = common(sub.add_parser("example", help="reproduce a worked example"), spec=False)
    p.add_argument("name")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--points", type=int, default=1024)
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InfeasibleSpec as exc:
        print(str(exc), file=sys.stderr)
        print(_dump(exc.report.to_json()))
        return EXIT_INFEASIBLE
    except (SpecError, MarginalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (QuadratureError, LPInfeasible, LPUnbounded, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
