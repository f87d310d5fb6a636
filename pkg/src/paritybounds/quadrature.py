"""Adaptive 15-node Gauss-Legendre quadrature."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(15)


class QuadratureError(ArithmeticError):
    """Error estimate still above tolerance after the refinement budget."""

    def __init__(self, message: str, partial: "QuadResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error: float
    nodes: int


def _panel(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    return float(half * np.dot(_WEIGHTS, f(x)))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    tol: float = 1e-9,
    max_panels: int = 20_000,
) -> QuadResult:
    """Integrate vectorized ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    Each panel is compared against the sum of its two halves; a panel is
    bisected while that difference exceeds ``tol`` times its share of the
    total length. Interior breakpoints start as panel edges.
    """
    pts = sorted(set(float(p) for p in breakpoints))
    total_len = pts[-1] - pts[0]
    if total_len <= 0:
        return QuadResult(0.0, 0.0, 0)
    heap = []
    nodes = 0

    def push(a, b, whole=None):
        nonlocal nodes
        m = 0.5 * (a + b)
        if whole is None:
            whole = _panel(f, a, b)
            nodes += 15
        left, right = _panel(f, a, m), _panel(f, m, b)
        nodes += 30
        err = abs(left + right - whole)
        heapq.heappush(heap, (-(err / (b - a)), a, b, left, right, err))

    for a, b in zip(pts[:-1], pts[1:]):
        push(a, b)

    while True:
        density, a, b, left, right, err = heap[0]
        if -density <= tol / total_len or a == b:
            break
        if len(heap) >= max_panels:
            value = sum(h[3] + h[4] for h in heap)
            partial = QuadResult(value, sum(h[5] for h in heap), nodes)
            raise QuadratureError(f"no convergence within {max_panels} panels", partial)
        heapq.heappop(heap)
        m = 0.5 * (a + b)
        push(a, m, left)
        push(m, b, right)

    value = sum(h[3] + h[4] for h in heap)
    return QuadResult(value, sum(h[5] for h in heap), nodes)
