"""Sign patterns, parity polytopes, and sign-weight selection.

A sign pattern ``s`` in ``{-1, +1}^d`` has indicator ``v(s)`` with a 1 wherever
``s_i = +1``. The even (odd) parity polytope is the convex hull of ``v(s)``
over patterns whose product is +1 (-1). Equivalently it is the hull of the
0/1 vectors whose weight is congruent to ``d`` (to ``d + 1``) mod 2, which
gives the facet description used by :func:`membership`:

    0 <= x <= 1,   sum_{A} x_i - sum_{not A} x_i <= |A| - 1

for every index set ``A`` whose size has the *other* parity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, NamedTuple, Sequence

import numpy as np

from . import simplex

Parity = Literal["even", "odd"]

INSIDE_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12
BIAS_TOL = 1e-10
CLIP_TOL = 1e-12
MAX_D = 20
MAX_LP_D = 14


class InfeasibleError(ValueError):
    """A sign-bias vector lies outside the requested parity polytope."""


def _check_parity(parity: str) -> int:
    if parity == "even":
        return 1
    if parity == "odd":
        return -1
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def opposite(parity: Parity) -> Parity:
    return "odd" if parity == "even" else "even"


@dataclass(frozen=True, order=True)
class SignPattern:
    signs: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("sign entries must be -1 or +1")

    @property
    def d(self) -> int:
        return len(self.signs)

    @property
    def product(self) -> int:
        return -1 if self.signs.count(-1) % 2 else 1

    @property
    def parity(self) -> Parity:
        return "even" if self.product == 1 else "odd"

    @property
    def indicator(self) -> tuple[int, ...]:
        return tuple(1 if s == 1 else 0 for s in self.signs)

    def __str__(self) -> str:
        return "".join("+" if s == 1 else "-" for s in self.signs)

    @classmethod
    def parse(cls, text: str) -> "SignPattern":
        table = {"+": 1, "-": -1}
        try:
            return cls(tuple(table[c] for c in text))
        except KeyError:
            raise ValueError(f"bad sign string {text!r}") from None


@lru_cache(maxsize=None)
def pattern_matrix(d: int, parity: Parity) -> np.ndarray:
    """All same-parity patterns as a read-only ``(2^(d-1), d)`` array of +-1.

    Rows follow lexicographic order with ``+`` before ``-``.
    """
    if not (2 <= d <= MAX_D):
        raise ValueError(f"d must satisfy 2 <= d <= {MAX_D}, got {d}")
    want = _check_parity(parity)
    # binary counting with bit 1 meaning '-' gives lexicographic order (+ < -)
    codes = np.arange(2**d, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(d - 1, -1, -1)) & 1
    signs = (1 - 2 * bits).astype(np.int8)
    keep = np.where(bits.sum(axis=1) % 2 == 0, 1, -1) == want
    out = signs[keep]
    out.setflags(write=False)
    return out


def enumerate_patterns(d: int, parity: Parity) -> list[SignPattern]:
    return [SignPattern(tuple(int(s) for s in row)) for row in pattern_matrix(d, parity)]


@dataclass(frozen=True)
class MembershipResult:
    inside: bool
    slack: float
    violating_facet: tuple[int, ...] | None = None


def _target_weight_parity(d: int, parity: str) -> int:
    # even-parity patterns have an even number of minus signs: weight = d mod 2
    return d % 2 if _check_parity(parity) == 1 else (d + 1) % 2


def facet_slacks(P: np.ndarray, parity: Parity) -> tuple[np.ndarray, np.ndarray]:
    """Minimum slack over all inequalities for each row of ``P``.

    Returns ``(slack, A_mask)`` where ``A_mask`` is the boolean index set of the
    most violated (least slack) parity facet per row.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    d = P.shape[1]
    # facets use |A| with parity opposite to the vertex weight parity
    need = 1 - _target_weight_parity(d, parity)
    A = P > 0.5
    wrong = (A.sum(axis=1) % 2) != need
    if np.any(wrong):
        k = np.argmin(np.abs(P - 0.5), axis=1)
        rows = np.flatnonzero(wrong)
        A[rows, k[rows]] = ~A[rows, k[rows]]
    # lhs - rhs = sum_A (2 x_i - 1) - sum x + 1
    excess = np.where(A, 2.0 * P - 1.0, 0.0).sum(axis=1) - P.sum(axis=1) + 1.0
    box = np.minimum(P, 1.0 - P).min(axis=1)
    return np.minimum(-excess, box), A


def membership(p: Sequence[float], parity: Parity) -> MembershipResult:
    """Decide whether ``p`` lies in the parity polytope, with a certificate."""
    P = np.asarray(p, dtype=float)
    if P.ndim != 1 or P.size < 2:
        raise ValueError("p must be a vector of length >= 2")
    slack, A = facet_slacks(P[None, :], parity)
    s = float(slack[0])
    inside = s >= -INSIDE_TOL
    facet = None if inside else tuple(int(i) for i in np.flatnonzero(A[0]))
    return MembershipResult(inside=inside, slack=s, violating_facet=facet)


def diagonal_feasible(d: int, p: float, parity: Parity) -> bool:
    """Whether ``(p, ..., p)`` lies in the parity polytope, in closed form."""
    _check_parity(parity)
    tol = INSIDE_TOL
    if d % 2 == 0:
        if parity == "even":
            return True
        return 1.0 / d - tol <= p <= (d - 1) / d + tol
    if parity == "even":
        return p >= 1.0 / d - tol
    return p <= (d - 1) / d + tol


@dataclass(frozen=True)
class WeightProfile:
    """Sparse distribution over same-parity sign patterns at one level."""

    u: float | None
    parity: Parity
    entries: tuple[tuple[SignPattern, float], ...]

    @property
    def d(self) -> int:
        return self.entries[0][0].d

    def biases(self) -> np.ndarray:
        S = np.array([pat.signs for pat, _ in self.entries])
        w = np.array([wt for _, wt in self.entries])
        return (S > 0).T.astype(float) @ w

    def weight_of(self, pattern: SignPattern) -> float:
        for pat, wt in self.entries:
            if pat == pattern:
                return wt
        return 0.0

    def dense(self) -> np.ndarray:
        """Weights over all ``2^(d-1)`` patterns in lexicographic order."""
        table = {pat.signs: wt for pat, wt in self.entries}
        return np.array([table.get(tuple(int(s) for s in row), 0.0)
                         for row in pattern_matrix(self.d, self.parity)])

    def validate(self, p: Sequence[float] | None = None) -> None:
        total = sum(wt for _, wt in self.entries)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise AssertionError(f"weights sum to {total!r}")
        if any(wt <= 0 for _, wt in self.entries):
            raise AssertionError("profile entries must carry positive weight")
        if any(pat.parity != self.parity for pat, _ in self.entries):
            raise AssertionError("pattern parity differs from profile parity")
        if p is not None and np.max(np.abs(self.biases() - np.asarray(p))) > BIAS_TOL:
            raise AssertionError("marginal sign sums do not match p")

    def to_json(self) -> dict:
        return {"u": self.u, "parity": self.parity,
                "entries": [{"signs": list(pat.signs), "w": wt} for pat, wt in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightProfile":
        entries = tuple((SignPattern(tuple(e["signs"])), float(e["w"])) for e in obj["entries"])
        return cls(u=obj.get("u"), parity=obj["parity"], entries=entries)


def profile_from_dense(w: np.ndarray, d: int, parity: Parity, u: float | None = None) -> WeightProfile:
    """Clip roundoff negatives, renormalize, and keep the positive entries."""
    w = np.asarray(w, dtype=float).copy()
    if np.any(w < -CLIP_TOL):
        raise InfeasibleError(f"negative weight {w.min():.3e}")
    w[w < 0] = 0.0
    w /= w.sum()
    rows = pattern_matrix(d, parity)
    entries = tuple((SignPattern(tuple(int(s) for s in rows[k])), float(w[k]))
                    for k in np.flatnonzero(w > 0))
    return WeightProfile(u=u, parity=parity, entries=entries)


def d3_dense(P: np.ndarray, parity: Parity) -> np.ndarray:
    """Closed-form barycentric weights for ``d = 3``; rows of ``P`` are bias vectors.

    Columns follow lexicographic pattern order: ``+++, +--, -+-, --+`` (even)
    and ``++-, +-+, -++, ---`` (odd).
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    p1, p2, p3 = P[:, 0], P[:, 1], P[:, 2]
    if _check_parity(parity) == 1:
        cols = (p1 + p2 + p3 - 1.0, 1.0 + p1 - p2 - p3, 1.0 - p1 + p2 - p3, 1.0 - p1 - p2 + p3)
    else:
        cols = (p1 + p2 - p3, p1 - p2 + p3, -p1 + p2 + p3, 2.0 - p1 - p2 - p3)
    return 0.5 * np.stack(cols, axis=1)


def d3_weights(p: Sequence[float], parity: Parity, u: float | None = None) -> WeightProfile:
    P = np.asarray(p, dtype=float)
    if P.shape != (3,):
        raise ValueError("d3_weights needs a length-3 bias vector")
    w = d3_dense(P, parity)[0]
    if np.any(w < -INSIDE_TOL):
        raise InfeasibleError(f"p={P.tolist()} is outside the {parity} polytope "
                              f"(weight {w.min():.3e})")
    w = np.where(w < 0, 0.0, w)
    return profile_from_dense(w, 3, parity, u)


def constraint_matrix(d: int, parity: Parity) -> np.ndarray:
    """Rows: total mass, then per-coordinate positive-sign mass."""
    S = pattern_matrix(d, parity)
    return np.vstack([np.ones(S.shape[0]), (S > 0).T.astype(float)])


class LPWeights(NamedTuple):
    w: np.ndarray
    basis: tuple[int, ...]
    phase1_objective: float


def solve_weights(p: Sequence[float], parity: Parity) -> LPWeights:
    """Phase-1 basic feasible solution over all same-parity patterns."""
    P = np.asarray(p, dtype=float)
    d = P.size
    if not (2 <= d <= MAX_LP_D):
        raise ValueError(f"weights_lp supports 2 <= d <= {MAX_LP_D}")
    A = constraint_matrix(d, parity)
    b = np.concatenate([[1.0], P])
    try:
        res = simplex.solve(None, A, b)
    except simplex.LPInfeasible as exc:
        raise InfeasibleError(f"p={P.tolist()} is outside the {parity} polytope "
                              f"(phase-1 objective {exc.phase1_objective:.3e})") from exc
    return LPWeights(res.x, res.basis, res.phase1_objective)


def weights_lp(p: Sequence[float], parity: Parity, u: float | None = None) -> WeightProfile:
    """Sparse weight profile (at most ``d + 1`` patterns) from the simplex method."""
    sol = solve_weights(p, parity)
    return profile_from_dense(sol.w, len(p), parity, u)


def lp_feasible(p: Sequence[float], parity: Parity) -> bool:
    try:
        solve_weights(p, parity)
    except InfeasibleError:
        return False
    return True


class PivotSplit(NamedTuple):
    p_pivot: float
    q_plus: np.ndarray | None
    q_minus: np.ndarray | None


def recursive_split(w: WeightProfile, pivot: int) -> PivotSplit:
    """Condition a profile on the sign of coordinate ``pivot`` (0-based).

    ``q_plus`` holds the conditional positive-sign probabilities of the other
    coordinates given a positive pivot, in the same-parity polytope of
    dimension ``d - 1``; ``q_minus`` those given a negative pivot, in the
    opposite-parity polytope. A branch with zero mass is returned as ``None``.
    """
    d = w.d
    if not 0 <= pivot < d:
        raise IndexError(f"pivot {pivot} out of range for d={d}")
    S = np.array([pat.signs for pat, _ in w.entries])
    wt = np.array([x for _, x in w.entries])
    rest = [j for j in range(d) if j != pivot]
    pos = S[:, pivot] > 0
    p1 = float(wt[pos].sum())
    R = (S[:, rest] > 0).astype(float)
    q_plus = R[pos].T @ wt[pos] / p1 if p1 > 0 else None
    q_minus = R[~pos].T @ wt[~pos] / (1.0 - p1) if p1 < 1 else None
    return PivotSplit(p1, q_plus, q_minus)


def branch_profile(w: WeightProfile, pivot: int, sign: int) -> WeightProfile | None:
    """Residual profile on the other coordinates given the pivot sign."""
    rest = [j for j in range(w.d) if j != pivot]
    sub = [(SignPattern(tuple(pat.signs[j] for j in rest)), x)
           for pat, x in w.entries if pat.signs[pivot] == sign]
    mass = sum(x for _, x in sub)
    if mass <= 0:
        return None
    parity = w.parity if sign == 1 else opposite(w.parity)
    return WeightProfile(u=w.u, parity=parity,
                         entries=tuple((pat, x / mass) for pat, x in sub))
