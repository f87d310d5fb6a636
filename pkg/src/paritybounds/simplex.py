"""Dense two-phase simplex for small equality-form linear programs.

Solves ``min c @ x  s.t.  A @ x = b, x >= 0`` on a full tableau. Pricing is
Dantzig (most negative reduced cost, lowest index on ties); after a run of
degenerate pivots the solver switches to Bland's rule, which cannot cycle.
Intended for problems with at most a few dozen rows and tens of thousands
of columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
_DEGENERATE_STREAK = 50


class LPInfeasible(ValueError):
    """Phase 1 ended with a positive artificial objective."""

    def __init__(self, message: str, phase1_objective: float):
        super().__init__(message)
        self.phase1_objective = phase1_objective


class LPUnbounded(ValueError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    basis: tuple[int, ...]
    phase1_objective: float
    iterations: int


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _choose_entering(cost_row: np.ndarray, bland: bool) -> int:
    neg = np.flatnonzero(cost_row < -FEAS_TOL * 1e-2)
    if neg.size == 0:
        return -1
    if bland:
        return int(neg[0])
    return int(neg[np.argmin(cost_row[neg])])


def _choose_leaving(T: np.ndarray, j: int, basis: list[int]) -> int:
    col = T[:-1, j]
    rhs = T[:-1, -1]
    ok = np.flatnonzero(col > PIVOT_TOL)
    if ok.size == 0:
        return -1
    ratios = rhs[ok] / col[ok]
    best = ratios.min()
    ties = ok[ratios <= best + 1e-12 * max(1.0, abs(best))]
    # lowest basic index among ties (Bland's leaving rule)
    return int(min(ties, key=lambda r: basis[r]))


def _iterate(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> int:
    """Run simplex pivots on the tableau whose last row holds reduced costs."""
    streak = 0
    for it in range(max_iter):
        j = _choose_entering(T[-1, :ncols], bland=streak >= _DEGENERATE_STREAK)
        if j < 0:
            return it
        r = _choose_leaving(T, j, basis)
        if r < 0:
            raise LPUnbounded(f"column {j} has no positive pivot")
        degenerate = T[r, -1] <= FEAS_TOL * 1e-3
        streak = streak + 1 if degenerate else 0
        _pivot(T, r, j)
        basis[r] = j
    raise RuntimeError(f"simplex did not terminate within {max_iter} pivots")


def solve(
    c: np.ndarray | None,
    A: np.ndarray,
    b: np.ndarray,
    *,
    maximize: bool = False,
    max_iter: int = 200_000,
) -> LPResult:
    """Solve an equality-form LP with nonnegative variables.

    With ``c=None`` only phase 1 runs and the first basic feasible solution
    found is returned (``value`` is then 0).

    Raises
    ------
    LPInfeasible
        If the phase-1 objective exceeds ``FEAS_TOL``.
    LPUnbounded
        If phase 2 finds an improving ray.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    # tableau: [A | I | b] with the phase-1 cost row at the bottom
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))

    iters = _iterate(T, basis, n, max_iter)
    phase1 = -T[-1, -1]
    if phase1 > FEAS_TOL:
        raise LPInfeasible(f"phase-1 objective {phase1:.3e} > {FEAS_TOL:g}", phase1)

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            nz = np.flatnonzero(np.abs(T[r, :n]) > 1e-9)
            if nz.size == 0:
                continue
            _pivot(T, r, int(nz[0]))
            basis[r] = int(nz[0])
        keep.append(r)
    T = np.vstack([T[keep][:, list(range(n)) + [-1]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]

    value = 0.0
    if c is not None:
        cost = -np.asarray(c, dtype=float) if maximize else np.asarray(c, dtype=float)
        T[-1, :n] = cost
        for r, j in enumerate(basis):
            T[-1] -= cost[j] * T[r]
        iters += _iterate(T, basis, n, max_iter)
        value = -T[-1, -1]
        if maximize:
            value = -value

    x = np.zeros(n)
    x[basis] = T[:-1, -1]
    x[x < 0] = 0.0
    if c is not None:
        value = float(np.dot(c, x))
    return LPResult(x=x, value=float(value), basis=tuple(basis),
                    phase1_objective=float(max(phase1, 0.0)), iterations=iters)
