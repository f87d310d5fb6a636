"""Extremal couplings: construction, sampling and support curves.

Every coupling here keeps the magnitudes comonotone, ``|X_i| = G_i^{-1}(L)``
for one shared magnitude level ``L``, and draws a sign pattern of the
target parity (even for the maximizer, odd for the minimizer) whose
conditional law at level ``L`` matches the marginal sign biases.

Three strategies are available:

``lp_weights``
    ``L = U``; the pattern is read off a simplex basic solution at ``L``
    with the cumulative-sum selector driven by ``V``.
``closed_form_d3``
    The trivariate copula: ``U`` is the first copula coordinate, ``L`` its
    magnitude level, the first sign is ``1{U > F_1(0)}`` and a Bernoulli
    ``1{V <= s(U)}`` picks one of the two remaining legs.
``recursive_pivot``
    Same as above with an arbitrary pivot coordinate for ``d >= 4``; the
    residual signs come from the pivot-conditioned weight profile.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal, Sequence

import numpy as np

from .bounds import DEFAULT_GRID, FeasibilityReport, bias_matrix, feasibility, magnitudes
from .marginal import Marginal, Normal, ShiftedExponential
from .parity import (
    CLIP_TOL,
    MAX_LP_D,
    InfeasibleError,
    Parity,
    SignPattern,
    WeightProfile,
    constraint_matrix,
    d3_dense,
    opposite,
    pattern_matrix,
    solve_weights,
)

Target = Literal["max", "min"]
Strategy = Literal["closed_form_d3", "lp_weights", "recursive_pivot"]

TARGET_PARITY: dict[str, Parity] = {"max": "even", "min": "odd"}
CACHE_LEVELS = 4096
CHUNK_ROWS = 1 << 16
_RESIDUAL_TOL = 1e-10


class InfeasibleSpec(InfeasibleError):
    """The requested bound is not attainable; carries the feasibility report."""

    def __init__(self, message: str, report: FeasibilityReport):
        super().__init__(message)
        self.report = report


def _target_parity(target: str) -> Parity:
    try:
        return TARGET_PARITY[target]
    except KeyError:
        raise ValueError(f"target must be 'max' or 'min', got {target!r}") from None


def default_strategy(d: int) -> Strategy:
    if d == 3:
        return "closed_form_d3"
    return "recursive_pivot" if d >= 4 else "lp_weights"


@dataclass(frozen=True)
class CouplingSpec:
    """What to couple and how; ``pivot`` is 0-based."""

    marginals: tuple[Marginal, ...]
    target: Target = "max"
    strategy: Strategy | None = None
    seed: int = 0
    pivot: int = 0

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        d = len(self.marginals)
        if d < 2:
            raise ValueError("need at least two marginals")
        _target_parity(self.target)
        if self.strategy is None:
            object.__setattr__(self, "strategy", default_strategy(d))
        if self.strategy == "closed_form_d3" and d != 3:
            raise ValueError("closed_form_d3 requires d = 3")
        if self.strategy == "recursive_pivot" and d < 4:
            raise ValueError("recursive_pivot requires d >= 4")
        if self.strategy not in ("closed_form_d3", "lp_weights", "recursive_pivot"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy != "closed_form_d3" and d > MAX_LP_D:
            raise ValueError(f"weight LPs support d <= {MAX_LP_D}")
        if not 0 <= self.pivot < d:
            raise ValueError(f"pivot {self.pivot} out of range for d={d}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def d(self) -> int:
        return len(self.marginals)

    @property
    def parity(self) -> Parity:
        return _target_parity(self.target)


@dataclass(frozen=True)
class SampleBatch:
    """Joint draws with their driving uniforms.

    ``level`` is the shared magnitude level, so ``|x[:, i]| = G_i^{-1}(level)``
    holds exactly. It equals ``u`` for the ``lp_weights`` strategy and the
    pivot coordinate's magnitude level for the copula strategies.
    """

    u: np.ndarray
    v: np.ndarray
    level: np.ndarray
    signs: np.ndarray
    x: np.ndarray
    target: Target

    @property
    def n(self) -> int:
        return int(self.u.shape[0])

    @property
    def d(self) -> int:
        return int(self.x.shape[1])

    def products(self) -> np.ndarray:
        return np.prod(self.x, axis=1)

    def pattern_ids(self) -> np.ndarray:
        """Index of each row's pattern in the lexicographic order of its parity set."""
        bits = (self.signs < 0).astype(np.int64)
        code = np.zeros(self.n, dtype=np.int64)
        for i in range(self.d):
            code = code * 2 + bits[:, i]
        # same-parity patterns interleave pairwise in the full binary order
        return code // 2

    def patterns(self) -> list[str]:
        table = np.array(["+", "-"])
        chars = table[(self.signs < 0).astype(int)]
        return ["".join(row) for row in chars]

    def write_csv(self, path) -> None:
        d = self.d
        header = ",".join(["u", "v", "pattern"] + [f"x{i + 1}" for i in range(d)])
        pats = self.patterns()
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for k in range(self.n):
                fh.write(",".join([repr(float(self.u[k])), repr(float(self.v[k])), pats[k]]
                                  + [repr(float(x)) for x in self.x[k]]) + "\n")


def empty_batch(d: int, target: Target) -> SampleBatch:
    z = np.zeros(0)
    return SampleBatch(u=z, v=z.copy(), level=z.copy(), signs=np.zeros((0, d), dtype=np.int8),
                       x=np.zeros((0, d)), target=target)


# ----------------------------------------------------------------- randomness

def uniform_pairs(seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row ``k`` gets draws ``2k`` (U) and ``2k + 1`` (V) of a Philox stream.

    Each draw is a 53-bit integer mapped to the open interval (0, 1).
    """
    gen = np.random.Generator(np.random.Philox(int(seed)))
    raw = gen.integers(0, 2**53, size=2 * n, dtype=np.uint64)
    draws = (raw.astype(np.float64) + 0.5) / 2.0**53
    return draws[0::2].copy(), draws[1::2].copy()


def worker_count() -> int:
    env = os.environ.get("PARITY_BOUNDS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _map_rows(fn: Callable, n: int, *arrays):
    """Apply ``fn`` to disjoint row ranges and concatenate the tuple outputs in order."""
    starts = list(range(0, n, CHUNK_ROWS))
    pieces = [tuple(a[s:s + CHUNK_ROWS] for a in arrays) for s in starts]
    workers = min(worker_count(), len(pieces))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(lambda args: fn(*args), pieces))
    else:
        out = [fn(*args) for args in pieces]
    return tuple(np.concatenate([o[j] for o in out]) for j in range(len(out[0])))


# ------------------------------------------------------------ pattern choice

def select_index(W: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Column ``k`` with ``W_{k-1} < v <= W_k`` for cumulative row sums ``W``.

    ``v = 0`` maps to column 0; ``v`` above the (roundoff-short) total maps to
    the last column with positive weight.
    """
    cum = np.cumsum(W, axis=1)
    hit = v[:, None] <= cum
    k = np.argmax(hit, axis=1)
    none = ~hit.any(axis=1)
    if none.any():
        pos = W[none] > 0
        last = W.shape[1] - 1 - np.argmax(pos[:, ::-1], axis=1)
        k[none] = last
    return k


def _lex_key(p: SignPattern):
    return tuple(-s for s in p.signs)


def sign_selector(weights: WeightProfile | Callable[[float], WeightProfile],
                  u: float, v: float) -> SignPattern:
    """Pattern ``s^(k)`` whose cumulative interval ``(W_{k-1}, W_k]`` contains ``v``.

    Patterns are ordered lexicographically with ``+`` before ``-``.
    """
    prof = weights(u) if callable(weights) else weights
    entries = sorted(prof.entries, key=lambda e: _lex_key(e[0]))
    W = np.array([[w for _, w in entries]])
    k = int(select_index(W, np.array([float(v)]))[0])
    return entries[k][0]


# ------------------------------------------------------- level weight cache

class LevelWeights:
    """Simplex basic solutions at any magnitude level, cached by grid cell.

    Cell ``k`` covers ``[k/N, (k+1)/N)`` and stores the optimal basis of the
    phase-1 LP at its centre. A level in the cell is solved exactly on that
    basis; if the basis is not feasible there, a fresh LP is run.
    """

    def __init__(self, marginals: Sequence[Marginal], parity: Parity,
                 cells: int = CACHE_LEVELS):
        self.marginals = tuple(marginals)
        self.parity = parity
        self.d = len(self.marginals)
        self.cells = cells
        m = self.d + 1
        self.A = constraint_matrix(self.d, parity)
        self._centres = bias_matrix(self.marginals, (np.arange(cells) + 0.5) / cells)
        self._built = np.zeros(cells, dtype=bool)
        self._feasible = np.zeros(cells, dtype=bool)
        self._basis = np.zeros((cells, m), dtype=np.int64)
        self._w0 = np.zeros((cells, m))
        self._AB = np.zeros((cells, m, m))
        self._pinv = np.zeros((cells, m, m))

    @staticmethod
    def _pad(basis, w, m):
        cols = np.full(m, basis[-1], dtype=np.int64)
        cols[:basis.size] = basis
        wt = np.zeros(m)
        wt[:basis.size] = w
        return cols, wt

    def _build(self, k: int) -> None:
        m = self.d + 1
        try:
            sol = solve_weights(self._centres[k], self.parity)
        except InfeasibleError:
            self._built[k] = True
            return
        basis = np.array(sorted(sol.basis))
        cols, w = self._pad(basis, sol.w[basis], m)
        AB = np.zeros((m, m))
        AB[:, :basis.size] = self.A[:, basis]
        self._basis[k], self._w0[k], self._AB[k] = cols, w, AB
        self._pinv[k] = np.linalg.pinv(AB)
        self._feasible[k] = True
        self._built[k] = True

    def weights(self, levels: np.ndarray, P: np.ndarray | None = None):
        """Return ``(cols, W)``: pattern indices (ascending per row) and weights."""
        levels = np.asarray(levels, dtype=float)
        m = self.d + 1
        if P is None:
            P = bias_matrix(self.marginals, levels)
        cell = np.minimum((levels * self.cells).astype(np.int64), self.cells - 1)
        for k in np.unique(cell[~self._built[cell]]):
            self._build(int(k))
        B = np.concatenate([np.ones((levels.size, 1)), P], axis=1)
        X = np.einsum("nij,nj->ni", self._pinv[cell], B)
        resid = np.abs(np.einsum("nij,nj->ni", self._AB[cell], X) - B).max(axis=1)
        ok = self._feasible[cell] & (X.min(axis=1) >= -CLIP_TOL) & (resid <= _RESIDUAL_TOL)
        cols = self._basis[cell]
        W = np.where(ok[:, None], X, 0.0)
        for r in np.flatnonzero(~ok):
            try:
                sol = solve_weights(P[r], self.parity)
                basis = np.array(sorted(sol.basis))
                cols[r], W[r] = self._pad(basis, sol.w[basis], m)
            except InfeasibleError:
                # roundoff at a polytope boundary; reuse the cell's own solution
                if not self._feasible[cell[r]]:
                    raise
                cols[r], W[r] = self._basis[cell[r]], self._w0[cell[r]]
        W[W < 0] = 0.0
        W /= W.sum(axis=1, keepdims=True)
        return cols, W


@lru_cache(maxsize=32)
def level_weights(marginals: tuple[Marginal, ...], parity: Parity) -> LevelWeights:
    return LevelWeights(marginals, parity)


# ------------------------------------------------------------- trivariate

def _magnitude_level(m: Marginal, u: np.ndarray) -> np.ndarray:
    return np.clip(m._abs_cdf(np.abs(m._quantile(u))), 0.0, 1.0)


def _open_level(w: np.ndarray) -> np.ndarray:
    tiny = np.nextafter(0.0, 1.0)
    return np.clip(w, tiny, np.nextafter(1.0, 0.0))


def _trivariate_state(marginals: Sequence[Marginal], target: Target, u: np.ndarray):
    """Level ``w``, indicator ``I`` and mixing function ``s`` at copula coordinate ``u``."""
    parity = _target_parity(target)
    m1 = marginals[0]
    u = np.asarray(u, dtype=float)
    I = u > m1.zero_level
    w = _open_level(_magnitude_level(m1, u))
    P = bias_matrix(marginals, w)
    Wd = d3_dense(P, parity)
    p1 = P[:, 0]
    # the J = 1 leg is column 0 on the positive branch, column 2 on the negative
    num = np.where(I, Wd[:, 0], Wd[:, 2])
    den = np.where(I, p1, 1.0 - p1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(den > 0, num / den, 1.0)
    return w, I, np.clip(s, 0.0, 1.0)


def _trivariate_signs(target: Target, I: np.ndarray, J: np.ndarray) -> np.ndarray:
    s1 = np.where(I, 1, -1)
    s2 = np.where(J, 1, -1)
    same = I if target == "max" else ~I
    s3 = np.where(same, s2, -s2)
    return np.stack([s1, s2, s3], axis=1).astype(np.int8)


def branch_map(m: Marginal, sign, w: np.ndarray) -> np.ndarray:
    """``h^+(w) = F(G^{-1}(w))`` and ``h^-(w) = F(-G^{-1}(w))``."""
    y = m._abs_quantile(w)
    return m._cdf(np.where(np.asarray(sign) > 0, y, -y))


def mixing_function(marginals: Sequence[Marginal], target: Target, u) -> np.ndarray:
    """Trivariate mixing function ``s(u)``; equal to 1 on null branches."""
    if len(marginals) != 3:
        raise ValueError("mixing_function needs three marginals")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return _trivariate_state(marginals, target, u)[2]


def pattern_probabilities(marginals: Sequence[Marginal], target: Target, u) -> np.ndarray:
    """Conditional pattern law given ``U = u``, columns in lexicographic order."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    _, I, s = _trivariate_state(marginals, target, u)
    out = np.zeros((u.size, 4))
    # legs (I, J) -> lexicographic column: (1,1) 0, (1,0) 1, (0,1) 2, (0,0) 3
    out[:, 0] = np.where(I, s, 0.0)
    out[:, 1] = np.where(I, 1.0 - s, 0.0)
    out[:, 2] = np.where(I, 0.0, s)
    out[:, 3] = np.where(I, 0.0, 1.0 - s)
    return out


def _trivariate_parts(marginals, target, u, v):
    w, I, s = _trivariate_state(marginals, target, u)
    J = np.asarray(v) <= s
    return w, _trivariate_signs(target, I, J)


def trivariate_copula(marginals: Sequence[Marginal], target: Target, u, v):
    """Copula coordinates ``(U_1, U_2, U_3)`` of the trivariate extremal coupling.

    ``X_i = F_i^{-1}(U_i)`` then attains the universal upper (``max``) or
    lower (``min``) bound whenever the matching parity condition holds.
    """
    if len(marginals) != 3:
        raise ValueError("trivariate_copula needs three marginals")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    w, signs = _trivariate_parts(marginals, target, u, v)
    U2 = branch_map(marginals[1], signs[:, 1], w)
    U3 = branch_map(marginals[2], signs[:, 2], w)
    return u, U2, U3


# --------------------------------------------------------------- recursive

def _recursive_parts(marginals, target, pivot, u, v):
    marginals = tuple(marginals)
    d = len(marginals)
    parity = _target_parity(target)
    mp = marginals[pivot]
    I = u > mp.zero_level
    w = _open_level(_magnitude_level(mp, u))
    cols, W = level_weights(marginals, parity).weights(w)
    S = pattern_matrix(d, parity)
    rest = [j for j in range(d) if j != pivot]

    piv_pos = S[cols, pivot] > 0
    Wm = np.where(piv_pos == I[:, None], W, 0.0)
    mass = Wm.sum(axis=1)
    signs = np.empty((u.size, d), dtype=np.int8)
    signs[:, pivot] = np.where(I, 1, -1)

    for branch in (True, False):
        rows = np.flatnonzero(I == branch)
        if rows.size == 0:
            continue
        rp = parity if branch else opposite(parity)
        R = pattern_matrix(d - 1, rp)
        live = rows[mass[rows] > 0]
        dead = rows[mass[rows] <= 0]
        if dead.size:
            # measure-zero: the level has no mass on this pivot sign
            signs[np.ix_(dead, rest)] = R[0]
        if live.size == 0:
            continue
        Wl = Wm[live] / mass[live, None]
        if d - 1 == 3:
            q = np.einsum("nk,nkj->nj", Wl, (S[cols[live]][:, :, rest] > 0).astype(float))
            Wq = d3_dense(q, rp)
            Wq[Wq < 0] = 0.0
            Wq /= Wq.sum(axis=1, keepdims=True)
            k = select_index(Wq, v[live])
            signs[np.ix_(live, rest)] = R[k]
        else:
            k = select_index(Wl, v[live])
            full = S[cols[live, k]]
            signs[np.ix_(live, rest)] = full[:, rest]
    return w, signs


def recursive_coupling(marginals: Sequence[Marginal], target: Target, pivot: int, u, v):
    """Copula coordinates of the pivot-recursive coupling for ``d >= 4``.

    The pivot's sign is ``1{u > F_pivot(0)}``; ``v`` picks the residual
    pattern from the pivot-conditioned profile (for ``d = 4`` the residual
    triple uses the closed-form trivariate weights of ``q^+`` or ``q^-``).
    """
    d = len(marginals)
    if d < 4:
        raise ValueError("recursive_coupling needs d >= 4")
    if not 0 <= pivot < d:
        raise ValueError(f"pivot {pivot} out of range")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    w, signs = _recursive_parts(marginals, target, pivot, u, v)
    out = []
    for i, m in enumerate(marginals):
        out.append(u.copy() if i == pivot else branch_map(m, signs[:, i], w))
    return tuple(out)


# ---------------------------------------------------------------- sampling

def _lp_parts(marginals, target, u, v):
    parity = _target_parity(target)
    cols, W = level_weights(tuple(marginals), parity).weights(u)
    k = select_index(W, v)
    S = pattern_matrix(len(marginals), parity)
    return u, S[cols[np.arange(u.size), k]].astype(np.int8)


def check_feasible(spec: CouplingSpec, grid: int = DEFAULT_GRID) -> FeasibilityReport:
    report = feasibility(spec.marginals, spec.parity, grid)
    if not report.sharp:
        raise InfeasibleSpec(f"the {spec.target} bound is not attainable "
                             f"(worst slack {report.worst_slack:.3e} at u={report.worst_level})",
                             report)
    return report


def sample(spec: CouplingSpec, n: int, *, check: bool = True,
           grid: int = DEFAULT_GRID) -> SampleBatch:
    """Draw ``n`` rows of the extremal coupling described by ``spec``.

    Deterministic given ``(seed, n, strategy)``. Raises :class:`InfeasibleSpec`
    with the feasibility report attached when the target is not attainable.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if check:
        check_feasible(spec, grid)
    if n == 0:
        return empty_batch(spec.d, spec.target)
    u, v = uniform_pairs(spec.seed, n)
    ms = spec.marginals

    if spec.strategy == "lp_weights":
        part = lambda a, b: _lp_parts(ms, spec.target, a, b)  # noqa: E731
    elif spec.strategy == "closed_form_d3":
        part = lambda a, b: _trivariate_parts(ms, spec.target, a, b)  # noqa: E731
    else:
        level_weights(ms, spec.parity)  # build once before threads share it
        part = lambda a, b: _recursive_parts(ms, spec.target, spec.pivot, a, b)  # noqa: E731

    def run(a, b):
        lv, sg = part(a, b)
        return lv, sg, sg * magnitudes(ms, lv)

    level, signs, x = _map_rows(run, n, u, v)
    return SampleBatch(u=u, v=v, level=level, signs=signs.astype(np.int8), x=x,
                       target=spec.target)


# ---------------------------------------------------------- support curves

@dataclass(frozen=True)
class SupportCurve:
    pattern: SignPattern
    u_grid: np.ndarray
    points: np.ndarray


def junction(marginals: Sequence[Marginal]) -> tuple[float, ...]:
    return tuple(m.zero_level for m in marginals)


def support_curves(marginals: Sequence[Marginal], target: Target,
                   grid: int = 1024) -> list[SupportCurve]:
    """Trace the four trivariate legs over their active ranges.

    Each leg starts at ``u = F_1(0)``, where all legs meet at the junction
    ``(F_1(0), F_2(0), F_3(0))``, and keeps the levels where its pattern has
    positive weight.
    """
    if len(marginals) != 3:
        raise ValueError("support curves are defined for d = 3")
    parity = _target_parity(target)
    u0 = marginals[0].zero_level
    k = np.arange(grid)
    right = u0 + (1.0 - u0) * k / grid
    left = u0 - u0 * k / grid
    curves = []
    for I, J, u in ((True, True, right), (True, False, right),
                    (False, True, left), (False, False, left)):
        u = u[(u > 0.0) & (u < 1.0)]
        if u.size == 0:
            continue
        w, _, s = _trivariate_state(marginals, target, u)
        leg_prob = s if J else 1.0 - s
        at_junction = u == u0
        if I:
            active = (u > u0) & (leg_prob > 0)
        else:
            active = (u < u0) & (leg_prob > 0)
        keep = active | (at_junction & active.any())
        if not keep.any():
            continue
        u, w = u[keep], w[keep]
        signs = _trivariate_signs(target, np.full(u.size, I), np.full(u.size, J))
        U2 = branch_map(marginals[1], signs[:, 1], w)
        U3 = branch_map(marginals[2], signs[:, 2], w)
        pts = np.stack([u, U2, U3], axis=1)
        pts[at_junction[keep], 1] = marginals[1].zero_level
        pts[at_junction[keep], 2] = marginals[2].zero_level
        order = np.argsort(u)
        pat = SignPattern(tuple(int(x) for x in signs[0]))
        curves.append(SupportCurve(pat, u[order], pts[order]))
    return curves


def write_support_csv(curves: Sequence[SupportCurve], path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("pattern,u,U1,U2,U3\n")
        for c in curves:
            for u, row in zip(c.u_grid, c.points):
                fh.write(",".join([str(c.pattern), repr(float(u))]
                                  + [repr(float(x)) for x in row]) + "\n")


# -------------------------------------------------------- analytic fixtures

class FixtureUnavailable(LookupError):
    pass


@dataclass(frozen=True)
class MixingFixture:
    """Closed-form mixing function and sign flip for identical marginals.

    ``domain`` is the open level interval on which the fixture is valid.
    """

    s: Callable[[np.ndarray], np.ndarray]
    tau: Callable[[np.ndarray], np.ndarray]
    zero_level: float
    target: Target
    domain: tuple[float, float] = (0.0, 1.0)

    def pattern_probabilities(self, u) -> np.ndarray:
        """Conditional pattern law in lexicographic order of the parity set."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        s = self.s(u)
        I = u > self.zero_level
        out = np.zeros((u.size, 4))
        out[:, 0] = np.where(I, s, 0.0)
        out[:, 1] = np.where(I, 1.0 - s, 0.0)
        # on u <= u0 these displays keep U_2 = U when J = 1, a negative second sign
        out[:, 3] = np.where(I, 0.0, s)
        out[:, 2] = np.where(I, 0.0, 1.0 - s)
        return out


def analytic_mixing_fixtures(m: Marginal, target: Target = "max") -> MixingFixture:
    """Closed forms of ``s`` and ``tau`` for three copies of ``m``.

    Available for shifted exponentials (both targets; the minimizer only
    below ``u_a``, where it exists) and normals (``max`` for ``mu >= 0``,
    ``min`` for ``mu <= 0``).
    """
    _target_parity(target)
    if isinstance(m, ShiftedExponential):
        lam, a = m.lam, m.a
        u0 = -np.expm1(-lam * a)
        c = np.exp(-2.0 * lam * a)
        ua = 1.0 - c

        def tau(u):
            u = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore"):
                return np.where(u <= ua, 1.0 - c / (1.0 - u), u)

        if target == "max":
            def s(u):
                u = np.asarray(u, dtype=float)
                with np.errstate(divide="ignore"):
                    mid = 1.0 - c / (2.0 * (1.0 - u) ** 2)
                return np.where(u <= u0, 0.5, np.where(u <= ua, mid, 1.0))
            return MixingFixture(s, tau, u0, target)

        def s_min(u):
            u = np.asarray(u, dtype=float)
            with np.errstate(divide="ignore"):
                low = 1.0 - c / (2.0 * (1.0 - u) ** 2)
            return np.where(u <= u0, low, 0.5)
        return MixingFixture(s_min, tau, u0, target, domain=(0.0, ua))

    if isinstance(m, Normal):
        from scipy.special import ndtr, ndtri

        mu, sigma = m.mu, m.sigma
        u0 = float(ndtr(-mu / sigma))

        def r(u):
            return np.exp(-2.0 * mu * ndtri(u) / sigma - 2.0 * mu**2 / sigma**2)

        def tau(u):
            return ndtr(-ndtri(np.asarray(u, dtype=float)) - 2.0 * mu / sigma)

        if target == "max":
            if mu < 0:
                raise FixtureUnavailable("the normal maximizer needs mu >= 0")

            def s(u):
                u = np.asarray(u, dtype=float)
                return np.where(u <= u0, 0.5, 1.0 - 0.5 * r(u))
            return MixingFixture(s, tau, u0, target)
        if mu > 0:
            raise FixtureUnavailable("the normal minimizer needs mu <= 0")

        def s_min(u):
            u = np.asarray(u, dtype=float)
            return np.where(u <= u0, 1.0 - 0.5 * r(u), 0.5)
        return MixingFixture(s_min, tau, u0, target)

    raise FixtureUnavailable(f"no closed-form mixing function for {type(m).__name__}")
