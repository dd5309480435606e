"""Step functions, power weights, modulars and gauges."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentIntegral, NoFiniteGauge, ParseError
from .youngfn import YoungFunction

GAUGE_MAX_ITER = 200
GAUGE_RTOL = 1e-12


@dataclass(frozen=True)
class StepFunction:
    """Finitely many disjoint pieces (a, b, c); zero elsewhere."""

    pieces: tuple = ()
    domain: str = "r+"

    def __post_init__(self):
        pieces = tuple(sorted((float(a), float(b), float(c)) for a, b, c in self.pieces))
        for a, b, c in pieces:
            if not (a < b) or not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"bad piece ({a}, {b})")
            if self.domain == "r+" and a < 0:
                raise ValueError("piece leaves R+")
        for p, q in zip(pieces[:-1], pieces[1:]):
            if q[0] < p[1]:
                raise ValueError("pieces overlap")
        if self.domain not in ("r+", "r"):
            raise ValueError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "pieces", tuple(p for p in pieces if p[2] != 0.0))

    @classmethod
    def indicator(cls, a, b, c=1.0, domain="r+"):
        return cls(((a, b, c),), domain)

    @classmethod
    def from_json(cls, text: str, domain="r+"):
        try:
            data = json.loads(text)
            return cls(tuple((d["a"], d["b"], d["c"]) for d in data), domain)
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"bad step-function JSON: {exc}") from exc

    def to_json(self) -> list:
        return [{"a": a, "b": b, "c": c} for a, b, c in self.pieces]

    def is_zero(self):
        return not self.pieces

    @property
    def breakpoints(self):
        return sorted({x for a, b, _ in self.pieces for x in (a, b)})

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, c in self.pieces:
            out = np.where((x > a) & (x < b), c, out)
        return out

    def __abs__(self):
        return StepFunction(tuple((a, b, abs(c)) for a, b, c in self.pieces), self.domain)

    def scale(self, k):
        return StepFunction(tuple((a, b, k * c) for a, b, c in self.pieces), self.domain)

    def __add__(self, other: "StepFunction"):
        """Sum by breakpoint overlay."""
        pts = sorted(set(self.breakpoints) | set(other.breakpoints))
        out = []
        for a, b in zip(pts[:-1], pts[1:]):
            m = 0.5 * (a + b)
            c = float(self(m) + other(m))
            if c != 0.0:
                out.append((a, b, c))
        dom = "r" if "r" in (self.domain, other.domain) else "r+"
        return StepFunction(tuple(out), dom)

    def restrict(self, lo, hi):
        out = []
        for a, b, c in self.pieces:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 < b2:
                out.append((a2, b2, c))
        return StepFunction(tuple(out), self.domain)

    def mass(self):
        return sum((b - a) * c for a, b, c in self.pieces)


@dataclass(frozen=True)
class PowerWeight:
    """w(x) = coeff * |x|**gamma."""

    gamma: float = 0.0
    coeff: float = 1.0
    domain: str = "r+"

    def __post_init__(self):
        if not self.coeff > 0:
            raise ValueError("weight coefficient must be positive")

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            return self.coeff * x**self.gamma

    def _prim(self, x):
        # antiderivative of |x|^gamma, odd in x
        g = self.gamma
        if g == -1.0:
            return math.copysign(math.log(abs(x)), x) if x != 0 else -math.inf
        if x == 0:
            return 0.0 if g > -1 else -math.inf
        return math.copysign(abs(x) ** (g + 1.0) / (g + 1.0), x)

    def measure(self, a, b):
        """mu(a, b) = int_a^b coeff |x|^gamma dx; raises on divergence."""
        if not a < b:
            return 0.0
        if math.isinf(a) or math.isinf(b):
            raise DivergentIntegral("unbounded piece", "tail")
        if a < 0 < b:
            return self.measure(a, 0.0) + self.measure(0.0, b)
        if (a == 0 or b == 0) and self.gamma <= -1:
            raise DivergentIntegral(f"|x|^{self.gamma} is not integrable at 0", "zero")
        if b <= 0:
            a, b = -b, -a
        return self.coeff * (self._prim(b) - self._prim(a))

    def describe(self):
        return {"gamma": self.gamma, "coeff": self.coeff}


@dataclass
class GaugeResult:
    value: float
    bracket: tuple
    iterations: int
    residual: float

    def to_dict(self):
        return {
            "value": self.value,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "residual": self.residual,
        }


def _piece_data(f: StepFunction, w: PowerWeight):
    c = np.array([abs(p[2]) for p in f.pieces])
    mu = np.array([w.measure(a, b) for a, b, _ in f.pieces])
    return c, mu


def modular(Y: YoungFunction, f: StepFunction, w: PowerWeight, k: float = 1.0) -> float:
    """Sum over pieces of Phi(k |c|) * mu(piece)."""
    if f.is_zero():
        return 0.0
    c, mu = _piece_data(f, w)
    return float(np.dot(Y.Phi(k * c), mu))


def solve_decreasing(fn, target=1.0, max_iter=GAUGE_MAX_ITER, rtol=GAUGE_RTOL):
    """Smallest lam > 0 with fn(lam) <= target for a continuous decreasing fn.

    Brackets by doubling/halving from 1, then bisects in log-space.
    """
    lo = hi = 1.0
    it = 0
    if fn(1.0) > target:
        while fn(hi) > target:
            lo, hi = hi, hi * 2.0
            it += 1
            if it > 2100 or math.isinf(hi):
                raise NoFiniteGauge("modular stays above 1 for every lambda")
    else:
        while fn(lo) <= target:
            hi, lo = lo, lo / 2.0
            it += 1
            if lo == 0.0:
                return GaugeResult(0.0, (0.0, hi), it, 0.0)
    while it < max_iter and hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi) if hi / lo > 4 else 0.5 * (lo + hi)
        if fn(mid) > target:
            lo = mid
        else:
            hi = mid
        it += 1
    residual = abs(fn(hi) - target)
    return GaugeResult(hi, (lo, hi), it, residual)


def gauge(Y: YoungFunction, f: StepFunction, w: PowerWeight, eps: float = 1.0) -> GaugeResult:
    """inf{lam > 0 : int Phi(|f|/lam) (eps/lam) w <= 1}."""
    if f.is_zero():
        return GaugeResult(0.0, (0.0, 0.0), 0, 0.0)
    c, mu = _piece_data(f, w)
    return solve_decreasing(lambda lam: float(np.dot(Y.Phi(c / lam), mu)) * eps / lam)


def gauge_s(Y: YoungFunction, f: StepFunction, mu: PowerWeight, s: float) -> GaugeResult:
    """inf{lam > 0 : int Phi(|f| / lam**(1/s)) dmu <= 1}."""
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    if f.is_zero():
        return GaugeResult(0.0, (0.0, 0.0), 0, 0.0)
    c, m = _piece_data(f, mu)
    return solve_decreasing(lambda lam: float(np.dot(Y.Phi(c / lam ** (1.0 / s)), m)))


def dilate(f: StepFunction, lam: float) -> StepFunction:
    """y -> f(lam * y)."""
    if not lam > 0:
        raise ValueError("dilation factor must be positive")
    return StepFunction(tuple((a / lam, b / lam, c) for a, b, c in f.pieces), f.domain)
