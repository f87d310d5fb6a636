"""Universal product bounds and their sharpness.

The expected product of ``X_i ~ F_i`` is bounded above by the integral of
``prod_i G_i^{-1}(u)`` over ``(0, 1)`` (comonotone absolute values) and below
by its negative. The upper bound is attained exactly when the sign-bias
vector lies in the even parity polytope at almost every level, the lower
bound when it lies in the odd one; :func:`feasibility` scans for this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .marginal import Marginal
from .parity import Parity, diagonal_feasible, facet_slacks
from .quadrature import QuadratureError, QuadResult, integrate

SHARP_TOL = 1e-8
DEFAULT_GRID = 4097
REFINE_POINTS = 65

Shortcut = Literal["iid_threshold", "skew_obstruction", "none"]


@dataclass(frozen=True)
class BoundResult:
    value: float
    abs_error_estimate: float
    nodes_used: int

    def to_json(self):
        return {"value": self.value, "abs_error_estimate": self.abs_error_estimate,
                "nodes_used": self.nodes_used}


def _product_quantile(marginals: Sequence[Marginal], u: np.ndarray) -> np.ndarray:
    out = np.ones_like(u)
    for m in marginals:
        out = out * m._abs_quantile(u)
    return out


def _tail_integrand(marginals: Sequence[Marginal]):
    # u = 1 - exp(-t), du = exp(-t) dt, quantiles evaluated through exp(-t) directly
    def g(t):
        q = np.exp(-t)
        out = q.copy()
        for m in marginals:
            out = out * m._abs_isf(q)
        return out
    return g


def universal_bound(marginals: Sequence[Marginal], tol: float = 1e-9,
                    check: bool = True) -> BoundResult:
    """``int_0^1 prod_i G_i^{-1}(u) du``; the lower bound is its negative.

    Raises :class:`QuadratureError` (carrying the partial result) when the
    adaptive rule cannot reach ``tol``.
    """
    d = len(marginals)
    if d < 2:
        raise ValueError("need at least two marginals")
    if check:
        for m in marginals:
            m.check(d)
    cuts = sorted({m.branch_end for m in marginals if 0.0 < m.branch_end < 1.0})
    unbounded = any(not math.isfinite(max(abs(s) for s in m.support)) for m in marginals)
    f = lambda u: _product_quantile(marginals, u)  # noqa: E731
    if not unbounded:
        res = integrate(f, [0.0, *cuts, 1.0], tol=tol)
        return BoundResult(res.value, res.abs_error, res.nodes)

    u_last = max([0.5, *cuts])
    g = _tail_integrand(marginals)
    t0 = -math.log1p(-u_last)
    t_end = 40.0
    while t_end < 700.0 and g(np.array([t_end]))[0] * (1.0 + t_end) > 1e-3 * tol:
        t_end *= 1.5
    pieces, failed = [], False
    for fn, pts in ((f, [0.0, *[c for c in cuts if c < u_last], u_last]),
                    (g, [t0, min(t_end, 700.0)])):
        try:
            pieces.append(integrate(fn, pts, tol=0.5 * tol))
        except QuadratureError as exc:
            pieces.append(exc.partial)
            failed = True
    total = QuadResult(sum(r.value for r in pieces), sum(r.abs_error for r in pieces),
                       sum(r.nodes for r in pieces))
    if failed:
        raise QuadratureError(f"bound not resolved to tol={tol}", total)
    return BoundResult(total.value, total.abs_error, total.nodes)


@dataclass(frozen=True)
class FeasibilityReport:
    parity: Parity
    grid_size: int
    worst_slack: float
    violating_levels: tuple[float, ...]
    verdict: Literal["sharp", "not_sharp"]
    shortcut: Shortcut = "none"
    worst_level: float | None = None

    @property
    def sharp(self) -> bool:
        return self.verdict == "sharp"

    def to_json(self):
        lv = list(self.violating_levels)
        return {"parity": self.parity, "grid_size": self.grid_size,
                "worst_slack": self.worst_slack, "worst_level": self.worst_level,
                "violating_levels": lv[:64], "n_violating": len(lv),
                "verdict": self.verdict, "shortcut": self.shortcut}


def scan_levels(marginals: Sequence[Marginal], grid: int = DEFAULT_GRID) -> np.ndarray:
    """Magnitude levels: a uniform grid, refinements at breakpoints, and end probes."""
    base = np.arange(1, grid + 1) / (grid + 1.0)
    h = 2.0 / (grid + 1.0)
    parts = [base]
    for m in marginals:
        for b in (m.zero_level, m.branch_end):
            if 0.0 < b < 1.0:
                parts.append(b + np.linspace(-h, h, REFINE_POINTS))
    k = np.arange(4, 16)
    parts.append(10.0 ** -k)
    parts.append(1.0 - 10.0 ** -k)
    lv = np.unique(np.concatenate(parts))
    return lv[(lv > 0.0) & (lv < 1.0)]


def per_marginal(marginals: Sequence[Marginal], fn) -> np.ndarray:
    """Stack ``fn(m)`` column-wise, evaluating repeated marginals once."""
    seen: dict[Marginal, np.ndarray] = {}
    cols = []
    for m in marginals:
        if m not in seen:
            seen[m] = fn(m)
        cols.append(seen[m])
    return np.stack(cols, axis=1)


def magnitudes(marginals: Sequence[Marginal], levels: np.ndarray) -> np.ndarray:
    """``G_i^{-1}(level)`` for every marginal, shape ``(n, d)``."""
    return per_marginal(marginals, lambda m: m._abs_quantile(levels))


def bias_matrix(marginals: Sequence[Marginal], levels: np.ndarray) -> np.ndarray:
    """Sign biases ``p_i(level)``, shape ``(n, d)``."""
    return per_marginal(marginals, lambda m: m._bias_at_magnitude(m._abs_quantile(levels)))


def _identical(marginals: Sequence[Marginal]) -> bool:
    return all(m == marginals[0] for m in marginals[1:])


def feasibility(marginals: Sequence[Marginal], parity: Parity,
                grid: int = DEFAULT_GRID) -> FeasibilityReport:
    """Scan the sign-bias vector against the parity polytope over levels in (0, 1)."""
    if grid < 64:
        raise ValueError("grid must be at least 64")
    d = len(marginals)
    levels = scan_levels(marginals, grid)
    slack, _ = facet_slacks(bias_matrix(marginals, levels), parity)

    # limit at the top level catches violations in tails thinner than the grid
    tail = np.array([[m._tail_bias() for m in marginals]])
    tail_slack = float(facet_slacks(tail, parity)[0][0])
    top = float(np.nextafter(1.0, 0.0))
    if tail_slack < -SHARP_TOL and not np.any(slack[levels > 1 - 1e-4] < -SHARP_TOL):
        levels = np.append(levels, top)
        slack = np.append(slack, tail_slack)

    shortcut: Shortcut = "none"
    ends = [m.branch_end for m in marginals]
    if max(ends) < 1.0 and tail_slack < -SHARP_TOL:
        # above every branch end all signs are forced; a forced vector outside
        # the polytope rules out sharpness on a set of positive measure
        shortcut = "skew_obstruction"
        mid = 0.5 * (max(ends) + 1.0)
        if not np.any((levels > max(ends)) & (slack < -SHARP_TOL)):
            s_mid = float(facet_slacks(bias_matrix(marginals, np.array([mid])), parity)[0][0])
            levels = np.append(levels, mid)
            slack = np.append(slack, s_mid)
    elif _identical(marginals):
        shortcut = "iid_threshold"

    bad = slack < -SHARP_TOL
    i = int(np.argmin(slack))
    verdict = "not_sharp" if bad.any() else "sharp"
    return FeasibilityReport(parity=parity, grid_size=int(levels.size),
                             worst_slack=float(slack[i]),
                             violating_levels=tuple(float(x) for x in np.sort(levels[bad])),
                             verdict=verdict, shortcut=shortcut,
                             worst_level=float(levels[i]))


def iid_verdict(marginal: Marginal, d: int, parity: Parity,
                grid: int = DEFAULT_GRID) -> bool:
    """Closed-form threshold verdict for identical marginals on the scan levels."""
    levels = scan_levels([marginal], grid)
    p = marginal._bias_at_magnitude(marginal._abs_quantile(levels))
    ok = all(diagonal_feasible(d, float(x), parity) for x in p)
    tail = marginal._tail_bias()
    return ok and diagonal_feasible(d, tail, parity)


@dataclass(frozen=True)
class Bound:
    value: float
    sharp: bool


@dataclass(frozen=True)
class SharpBounds:
    upper: Bound
    lower: Bound
    even: FeasibilityReport
    odd: FeasibilityReport
    quadrature: BoundResult

    def to_json(self):
        return {"upper": {"value": self.upper.value, "sharp": self.upper.sharp},
                "lower": {"value": self.lower.value, "sharp": self.lower.sharp},
                "abs_error_estimate": self.quadrature.abs_error_estimate,
                "feasibility": {"even": self.even.to_json(), "odd": self.odd.to_json()}}


def sharp_bounds(marginals: Sequence[Marginal], grid: int = DEFAULT_GRID,
                 tol: float = 1e-9) -> SharpBounds:
    """Universal bounds with sharpness flags.

    When a flag is false the value is still a valid bound but not the optimum.
    """
    q = universal_bound(marginals, tol=tol)
    even = feasibility(marginals, "even", grid)
    odd = feasibility(marginals, "odd", grid)
    return SharpBounds(upper=Bound(q.value, even.sharp), lower=Bound(-q.value, odd.sharp),
                       even=even, odd=odd, quadrature=q)
