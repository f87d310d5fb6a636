"""Univariate absolutely continuous marginals.

Every marginal exposes its cdf ``F``, density ``f``, quantile ``F^{-1}``, the
law of its absolute value (cdf ``G(y) = F(y) - F(-y)``, quantile ``G^{-1}``)
and the sign bias

    p(u) = f(G^{-1}(u)) / (f(G^{-1}(u)) + f(-G^{-1}(u))),

the conditional probability of a nonnegative sign at magnitude level ``u``.
All evaluation methods are vectorized: scalars in, floats out; arrays in,
arrays out.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np
from scipy import integrate, special

ROOT_WIDTH = 1e-13
QUANTILE_CLIP = 1e-15


class MarginalError(ValueError):
    """Invalid marginal parameters or a violated regularity condition."""


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def _check_open_unit(u: np.ndarray, name: str = "u") -> None:
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise ValueError(f"{name} must lie in the open interval (0, 1)")


def invert_increasing(func, deriv, target, lo, hi, width=ROOT_WIDTH):
    """Solve ``func(x) = target`` for nondecreasing ``func`` on ``[lo, hi]``.

    Vectorized bisection down to ``width`` followed by one Newton step that is
    kept only if it stays inside the final bracket.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    while True:
        open_ = (hi - lo) > width
        if not open_.any():
            break
        mid = 0.5 * (lo + hi)
        below = func(mid) < target
        lo = np.where(open_ & below, mid, lo)
        hi = np.where(open_ & ~below, mid, hi)
    x = 0.5 * (lo + hi)
    if deriv is not None:
        slope = deriv(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (func(x) - target) / slope
        cand = x - step
        good = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        x = np.where(good, cand, x)
    return x


@dataclass(frozen=True)
class Marginal(ABC):
    """Base class; subclasses provide the family-specific formulas."""

    family: ClassVar[str] = ""

    # -- family primitives ------------------------------------------------
    @property
    @abstractmethod
    def support(self) -> tuple[float, float]: ...

    @abstractmethod
    def _cdf(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _logpdf(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _quantile(self, u: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def to_json(self) -> dict[str, Any]: ...

    def _sf(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self._cdf(x)

    def _abs_cdf(self, y: np.ndarray) -> np.ndarray:
        return self._cdf(y) - self._cdf(-y)

    def _abs_sf(self, y: np.ndarray) -> np.ndarray:
        return self._sf(y) + self._cdf(-y)

    def _abs_pdf(self, y: np.ndarray) -> np.ndarray:
        return np.exp(self._logpdf(y)) + np.exp(self._logpdf(-y))

    def _abs_upper(self) -> float:
        lo, hi = self.support
        top = max(abs(lo), abs(hi))
        if math.isfinite(top):
            return top
        q = self._quantile(np.array([QUANTILE_CLIP, 1.0 - QUANTILE_CLIP]))
        return float(np.max(np.abs(q)))

    def _abs_quantile(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        hi = self._abs_upper()
        if not math.isfinite(max(abs(s) for s in self.support)):
            while np.any(self._abs_cdf(np.array(hi)) < u):
                hi *= 2.0
        y = invert_increasing(self._abs_cdf, self._abs_pdf, u, 0.0, hi)
        return np.where(u <= 0.0, 0.0, y)

    def _abs_isf(self, q: np.ndarray) -> np.ndarray:
        """``G^{-1}(1 - q)``; families with infinite support override for small q."""
        return self._abs_quantile(1.0 - np.asarray(q, dtype=float))

    def _tail_bias(self) -> float:
        """Limit of the sign bias as the magnitude level tends to 1."""
        return float(self._bias_at_magnitude(np.array(self._abs_upper() * (1 - 1e-12))))

    def _bias_at_magnitude(self, y: np.ndarray) -> np.ndarray:
        lp, ln = self._logpdf(y), self._logpdf(-y)
        both_zero = np.isneginf(lp) & np.isneginf(ln)
        if np.any(both_zero):
            raise MarginalError(
                "both sign branches have zero density at an interior magnitude level"
            )
        with np.errstate(invalid="ignore"):
            return special.expit(lp - ln)

    # -- public evaluation --------------------------------------------------
    def cdf(self, x):
        x_ = np.asarray(x, dtype=float)
        return _out(self._cdf(x_), x)

    def pdf(self, x):
        x_ = np.asarray(x, dtype=float)
        return _out(np.exp(self._logpdf(x_)), x)

    def logpdf(self, x):
        x_ = np.asarray(x, dtype=float)
        return _out(self._logpdf(x_), x)

    def quantile(self, u):
        """Left-continuous quantile ``F^{-1}(u)`` for ``u`` in (0, 1)."""
        u_ = np.asarray(u, dtype=float)
        _check_open_unit(u_)
        return _out(self._quantile(u_), u)

    def abs_cdf(self, y):
        y_ = np.maximum(np.asarray(y, dtype=float), 0.0)
        return _out(self._abs_cdf(y_), y)

    def abs_pdf(self, y):
        y_ = np.asarray(y, dtype=float)
        return _out(np.where(y_ >= 0, self._abs_pdf(np.abs(y_)), 0.0), y)

    def abs_quantile(self, u):
        """Quantile ``G^{-1}(u)`` of ``|X|``."""
        u_ = np.asarray(u, dtype=float)
        _check_open_unit(u_)
        return _out(self._abs_quantile(u_), u)

    def sign_bias(self, u):
        """Sign bias ``p(u)`` at magnitude level ``u``.

        Equals 1 where the negative branch at ``G^{-1}(u)`` has zero density
        and 0 where the positive branch does. A zero sign (null event) counts
        as positive.
        """
        u_ = np.asarray(u, dtype=float)
        _check_open_unit(u_)
        return _out(self._bias_at_magnitude(self._abs_quantile(u_)), u)

    def sign_flip(self, u):
        """The level map ``tau(u) = F(-F^{-1}(u))``."""
        u_ = np.asarray(u, dtype=float)
        _check_open_unit(u_)
        return _out(self._cdf(-self._quantile(u_)), u)

    @property
    def zero_level(self) -> float:
        """``u0 = F(0)``, the probability of a negative draw."""
        return float(self._cdf(np.array(0.0)))

    @property
    def branch_end(self) -> float:
        """Magnitude level above which only one sign branch exists (may be 1)."""
        lo, hi = self.support
        if lo >= 0.0 or hi <= 0.0:
            return 0.0
        m = min(-lo, hi)
        return 1.0 if not math.isfinite(m) else float(self._abs_cdf(np.array(m)))

    def negate(self) -> "Marginal":
        """Law of ``-X``: cdf ``1 - F(-x)``."""
        return Negated(self)

    def check(self, d: int | None = None) -> None:
        """Numerically verify normalization and, optionally, ``E|X|^d < inf``."""
        lo, hi = self.support
        total, _ = integrate.quad(lambda t: math.exp(self._logpdf(np.array(t))),
                                  lo, hi, limit=200, epsabs=1e-12, epsrel=1e-12)
        if abs(total - 1.0) > 1e-8:
            raise MarginalError(f"density integrates to {total!r}, not 1")
        if d is None:
            return
        val, err = integrate.quad(
            lambda t: abs(t) ** d * math.exp(self._logpdf(np.array(t))),
            lo, hi, limit=200)
        if not math.isfinite(val):
            raise MarginalError(f"E|X|^{d} is not finite")
        if val > 0 and err / val > 1e-4:
            warnings.warn(f"E|X|^{d} quadrature relative error {err / val:.2e} > 1e-4",
                          RuntimeWarning, stacklevel=2)


@dataclass(frozen=True)
class ShiftedExponential(Marginal):
    """``X + a ~ Exp(lam)``, supported on ``[-a, inf)``."""

    lam: float
    a: float
    family: ClassVar[str] = "shifted_exponential"

    def __post_init__(self):
        if not (self.lam > 0 and self.a > 0):
            raise MarginalError("shifted_exponential requires lambda > 0 and a > 0")

    @property
    def support(self):
        return (-self.a, math.inf)

    def _cdf(self, x):
        return np.where(x >= -self.a, -np.expm1(-self.lam * np.maximum(x + self.a, 0.0)), 0.0)

    def _sf(self, x):
        return np.where(x >= -self.a, np.exp(-self.lam * np.maximum(x + self.a, 0.0)), 1.0)

    def _logpdf(self, x):
        with np.errstate(invalid="ignore"):
            return np.where(x >= -self.a, math.log(self.lam) - self.lam * (x + self.a), -np.inf)

    def _quantile(self, u):
        return -np.log1p(-u) / self.lam - self.a

    def _abs_cdf(self, y):
        lam, a = self.lam, self.a
        inner = 2.0 * math.exp(-lam * a) * np.sinh(lam * np.minimum(y, a))
        return np.where(y <= a, inner, -np.expm1(-lam * (y + a)))

    def _abs_quantile(self, u):
        lam, a = self.lam, self.a
        ua = self.branch_end
        low = np.arcsinh(0.5 * u * math.exp(lam * a)) / lam
        with np.errstate(divide="ignore", invalid="ignore"):
            high = -np.log1p(-u) / lam - a
        return np.where(u < ua, low, high)

    def _abs_isf(self, q):
        q = np.asarray(q, dtype=float)
        ua = self.branch_end
        with np.errstate(divide="ignore"):
            high = -np.log(q) / self.lam - self.a
        return np.where(q <= 1.0 - ua, high, self._abs_quantile(1.0 - q))

    @property
    def branch_end(self):
        return -math.expm1(-2.0 * self.lam * self.a)

    def _tail_bias(self):
        return 1.0

    def to_json(self):
        return {"family": self.family, "lambda": self.lam, "a": self.a}


@dataclass(frozen=True)
class LinearDensity(Marginal):
    """Density ``(1 + theta x) / 2`` on ``[-1, 1]``; ``|X|`` is U[0, 1] for every theta."""

    theta: float
    family: ClassVar[str] = "linear_density"

    def __post_init__(self):
        if not (-1.0 < self.theta < 1.0):
            raise MarginalError("linear_density requires theta in (-1, 1)")

    @property
    def support(self):
        return (-1.0, 1.0)

    def _cdf(self, x):
        x = np.clip(x, -1.0, 1.0)
        return 0.5 * (x + 1.0) + 0.25 * self.theta * (x * x - 1.0)

    def _logpdf(self, x):
        inside = (x >= -1.0) & (x <= 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(inside, np.log(0.5 * (1.0 + self.theta * x)), -np.inf)

    def _quantile(self, u):
        # root of theta/4 x^2 + x/2 + (1/2 - theta/4 - u) = 0 in cancellation-free form
        t = self.theta
        c = 0.5 - 0.25 * t - u
        disc = 0.25 * (1.0 - t) ** 2 + t * u
        return -2.0 * c / (0.5 + np.sqrt(np.maximum(disc, 0.0)))

    def _abs_cdf(self, y):
        return np.clip(y, 0.0, 1.0)

    def _abs_quantile(self, u):
        return np.asarray(u, dtype=float).copy()

    @property
    def branch_end(self):
        return 1.0

    def _tail_bias(self):
        return 0.5 * (1.0 + self.theta)

    def negate(self):
        return LinearDensity(-self.theta)

    def to_json(self):
        return {"family": self.family, "theta": self.theta}


@dataclass(frozen=True)
class Normal(Marginal):
    mu: float
    sigma: float = 1.0
    family: ClassVar[str] = "normal"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.mu)):
            raise MarginalError("normal requires finite mu and sigma > 0")

    @property
    def support(self):
        return (-math.inf, math.inf)

    def _cdf(self, x):
        return special.ndtr((x - self.mu) / self.sigma)

    def _sf(self, x):
        return special.ndtr(-(x - self.mu) / self.sigma)

    def _logpdf(self, x):
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma * math.sqrt(2.0 * math.pi))

    def _quantile(self, u):
        return self.mu + self.sigma * special.ndtri(u)

    def _abs_quantile(self, u):
        if self.mu == 0.0:
            return -self.sigma * special.ndtri(0.5 * (1.0 - np.asarray(u, dtype=float)))
        return super()._abs_quantile(u)

    def _abs_isf(self, q):
        q = np.asarray(q, dtype=float)
        if self.mu == 0.0:
            return -self.sigma * special.ndtri(0.5 * q)
        # solve log G-bar(y) = log q; G-bar(y) = Phi(-(y-mu)/s) + Phi(-(y+mu)/s)
        s, mu = self.sigma, self.mu

        def neg_log_sf(y):
            a = special.log_ndtr(-(y - mu) / s)
            b = special.log_ndtr(-(y + mu) / s)
            return -np.logaddexp(a, b)

        hi = abs(mu) + s * (np.sqrt(2.0 * np.maximum(-np.log(q), 1.0)) + 4.0)
        return invert_increasing(neg_log_sf, None, -np.log(q), 0.0, hi)

    def _tail_bias(self):
        return 1.0 if self.mu > 0 else (0.0 if self.mu < 0 else 0.5)

    @property
    def branch_end(self):
        return 1.0

    def negate(self):
        return Normal(-self.mu, self.sigma)

    def to_json(self):
        return {"family": self.family, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class Uniform(Marginal):
    lo: float
    hi: float
    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise MarginalError("uniform requires finite lo < hi")

    @property
    def support(self):
        return (self.lo, self.hi)

    def _cdf(self, x):
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def _logpdf(self, x):
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, -math.log(self.hi - self.lo), -np.inf)

    def _quantile(self, u):
        return self.lo + u * (self.hi - self.lo)

    def _abs_quantile(self, u):
        if self.lo >= 0.0:
            return self._quantile(np.asarray(u, dtype=float))
        if self.hi <= 0.0:
            return -self._quantile(1.0 - np.asarray(u, dtype=float))
        return super()._abs_quantile(u)

    def _tail_bias(self):
        if self.hi > -self.lo:
            return 1.0
        return 0.0 if self.hi < -self.lo else 0.5

    def negate(self):
        return Uniform(-self.hi, -self.lo)

    def to_json(self):
        return {"family": self.family, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Tabulated(Marginal):
    """Piecewise-linear density through ``(x, density)`` nodes, renormalized."""

    x: tuple[float, ...]
    density: tuple[float, ...]
    family: ClassVar[str] = "tabulated"

    def __post_init__(self):
        xs = np.asarray(self.x, dtype=float)
        fs = np.asarray(self.density, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != fs.shape:
            raise MarginalError("tabulated needs matching x/density arrays of length >= 2")
        if not np.all(np.diff(xs) > 0) or not np.all(np.isfinite(xs)):
            raise MarginalError("tabulated x grid must be finite and strictly increasing")
        if np.any(fs < 0) or not np.all(np.isfinite(fs)):
            raise MarginalError("tabulated density must be finite and nonnegative")
        if np.any((fs[:-1] == 0) & (fs[1:] == 0)):
            raise MarginalError("tabulated density vanishes on a segment (support not connected)")
        h = np.diff(xs)
        mass = 0.5 * h * (fs[:-1] + fs[1:])
        total = mass.sum()
        object.__setattr__(self, "x", tuple(map(float, xs)))
        object.__setattr__(self, "density", tuple(map(float, fs)))
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_fs", fs / total)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(mass / total)]))

    @property
    def support(self):
        return (self._xs[0], self._xs[-1])

    def _segment(self, x):
        k = np.searchsorted(self._xs, x, side="right") - 1
        return np.clip(k, 0, self._xs.size - 2)

    def _cdf(self, x):
        x = np.clip(x, self._xs[0], self._xs[-1])
        k = self._segment(x)
        t = x - self._xs[k]
        f0 = self._fs[k]
        slope = (self._fs[k + 1] - f0) / (self._xs[k + 1] - self._xs[k])
        return np.clip(self._cum[k] + f0 * t + 0.5 * slope * t * t, 0.0, 1.0)

    def _logpdf(self, x):
        inside = (x >= self._xs[0]) & (x <= self._xs[-1])
        with np.errstate(divide="ignore"):
            return np.where(inside, np.log(np.interp(x, self._xs, self._fs)), -np.inf)

    def _quantile(self, u):
        k = np.clip(np.searchsorted(self._cum, u, side="left") - 1, 0, self._xs.size - 2)
        r = u - self._cum[k]
        f0 = self._fs[k]
        slope = (self._fs[k + 1] - f0) / (self._xs[k + 1] - self._xs[k])
        root = np.sqrt(np.maximum(f0 * f0 + 2.0 * slope * r, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(f0 + root > 0, 2.0 * r / (f0 + root), 0.0)
        return np.minimum(self._xs[k] + t, self._xs[k + 1])

    def negate(self):
        return Tabulated(tuple(-v for v in reversed(self.x)), tuple(reversed(self.density)))

    def to_json(self):
        return {"family": self.family, "x": list(self.x), "density": list(self.density)}


@dataclass(frozen=True)
class Negated(Marginal):
    """Law of ``-X`` for an arbitrary base marginal."""

    base: Marginal
    family: ClassVar[str] = "negated"

    @property
    def support(self):
        lo, hi = self.base.support
        return (-hi, -lo)

    def _cdf(self, x):
        return self.base._sf(-x)

    def _sf(self, x):
        return self.base._cdf(-x)

    def _logpdf(self, x):
        return self.base._logpdf(-x)

    def _quantile(self, u):
        return -self.base._quantile(1.0 - u)

    def _abs_cdf(self, y):
        return self.base._abs_cdf(y)

    def _abs_sf(self, y):
        return self.base._abs_sf(y)

    def _abs_quantile(self, u):
        return self.base._abs_quantile(u)

    def _abs_isf(self, q):
        return self.base._abs_isf(q)

    def _tail_bias(self):
        return 1.0 - self.base._tail_bias()

    @property
    def branch_end(self):
        return self.base.branch_end

    def negate(self):
        return self.base

    def to_json(self):
        return {"family": self.family, "of": self.base.to_json()}


_FAMILIES = {
    "shifted_exponential": lambda d: ShiftedExponential(float(d["lambda"]), float(d["a"])),
    "linear_density": lambda d: LinearDensity(float(d["theta"])),
    "normal": lambda d: Normal(float(d["mu"]), float(d.get("sigma", 1.0))),
    "uniform": lambda d: Uniform(float(d["lo"]), float(d["hi"])),
    "tabulated": lambda d: Tabulated(tuple(d["x"]), tuple(d["density"])),
    "negated": lambda d: Negated(marginal_from_json(d["of"])),
}


def marginal_from_json(obj: dict[str, Any]) -> Marginal:
    """Build a marginal from its JSON encoding, e.g. ``{"family": "normal", "mu": 0}``."""
    try:
        build = _FAMILIES[obj["family"]]
    except (KeyError, TypeError):
        raise MarginalError(f"unknown or missing marginal family in {obj!r}") from None
    try:
        return build(obj)
    except KeyError as exc:
        raise MarginalError(f"{obj['family']}: missing parameter {exc}") from None
