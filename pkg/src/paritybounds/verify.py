"""Independent checks: Monte Carlo summaries, KS distance and a discrete LP oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import simplex
from .marginal import Marginal

MAX_JOINT_ATOMS = 20_000
PROB_TOL = 1e-12
KS_ALPHA01 = 1.63


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int

    def within(self, target: float, k: float = 4.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr


def mc_mean(values: np.ndarray) -> McEstimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        raise ValueError("need at least two samples")
    return McEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)), n)


def mc_expected_product(batch) -> McEstimate:
    """Sample mean and standard error of the row products of a batch."""
    return mc_mean(np.prod(batch.x, axis=1))


def ks_statistic(samples: Sequence[float], m: Marginal) -> float:
    """Sup distance between the empirical cdf of ``samples`` and ``m.cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    F = m.cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_critical(n: int, c: float = KS_ALPHA01) -> float:
    return c / math.sqrt(n)


def kendall_tau_is_one(cols: np.ndarray) -> bool:
    """True when every column induces the same ordering of the rows (ties allowed)."""
    cols = np.asarray(cols)
    order = np.lexsort(cols.T[::-1])
    s = cols[order]
    return bool(np.all(np.diff(s, axis=0) >= 0))


# ------------------------------------------------------------- discrete LP

@dataclass(frozen=True)
class DiscreteProblem:
    """Finite marginals ``atoms[i] = [(value, prob), ...]`` and a target."""

    atoms: tuple[tuple[tuple[float, float], ...], ...]
    target: Literal["max", "min"] = "max"

    def __post_init__(self):
        atoms = tuple(tuple((float(v), float(p)) for v, p in a) for a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if len(atoms) < 2:
            raise ValueError("need at least two margins")
        for a in atoms:
            if not a or any(p < 0 for _, p in a):
                raise ValueError("atom probabilities must be nonnegative")
            if abs(sum(p for _, p in a) - 1.0) > PROB_TOL:
                raise ValueError("atom probabilities must sum to 1")
        if self.target not in ("max", "min"):
            raise ValueError("target must be 'max' or 'min'")

    @property
    def d(self) -> int:
        return len(self.atoms)


def quantize(m: Marginal, n: int) -> tuple[tuple[float, float], ...]:
    """``n`` equal-mass atoms at ``F^{-1}((k - 1/2) / n)``."""
    u = (np.arange(1, n + 1) - 0.5) / n
    return tuple((float(x), 1.0 / n) for x in m.quantile(u))


@dataclass(frozen=True)
class OracleResult:
    n_atoms: int
    value: float
    bound: float | None = None

    @property
    def gap(self) -> float | None:
        return None if self.bound is None else self.value - self.bound

    def to_json(self):
        return {"n_atoms": self.n_atoms, "value": self.value, "bound": self.bound,
                "gap": self.gap}


def transport_lp(p: DiscreteProblem):
    """Objective, equality matrix and right-hand side over the product grid."""
    sizes = [len(a) for a in p.atoms]
    total = math.prod(sizes)
    if total > MAX_JOINT_ATOMS:
        raise ValueError(f"{total} joint atoms exceed the limit {MAX_JOINT_ATOMS}")
    idx = np.array(list(itertools.product(*[range(k) for k in sizes])))
    vals = [np.array([v for v, _ in a]) for a in p.atoms]
    c = np.ones(total)
    for i, v in enumerate(vals):
        c *= v[idx[:, i]]
    rows, rhs = [], []
    for i, a in enumerate(p.atoms):
        # the last atom of every margin but the first is implied by the total
        keep = len(a) if i == 0 else len(a) - 1
        for k in range(keep):
            rows.append((idx[:, i] == k).astype(float))
            rhs.append(a[k][1])
    return c, np.array(rows), np.array(rhs)


def discrete_oracle(p: DiscreteProblem) -> float:
    """Exact optimum of ``E[prod X_i]`` over couplings of the finite margins."""
    c, A, b = transport_lp(p)
    res = simplex.solve(c, A, b, maximize=(p.target == "max"))
    return res.value


def oracle_run(marginals: Sequence[Marginal], n: int, target: Literal["max", "min"],
               bound: float | None = None) -> OracleResult:
    prob = DiscreteProblem(tuple(quantize(m, n) for m in marginals), target)
    return OracleResult(n_atoms=n, value=discrete_oracle(prob), bound=bound)
