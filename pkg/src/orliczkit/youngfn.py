"""Young functions and general nondecreasing densities.

A density is stored as contiguous segments ``(lo, hi]`` each carrying a
closed form (constant, shifted power, exponential, logarithm, the numeric
``plog`` family, or the inverse of another form).  Every form knows its
antiderivative and its inverse, so Phi, Psi and the generalized inverse of
phi are evaluated without quadrature.  The density is taken left-continuous,
matching intervals of the form (a, b].
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotMonotone, NotYoung, ParseError
from .grids import LogGrid

DELTA2_BLOWUP = 1e8


# ---------------------------------------------------------------- segment forms


class Form:
    """One closed-form piece of a density."""

    increasing = True  # strictly increasing on its domain
    name = "form"

    def value(self, t):
        raise NotImplementedError

    def antider(self, t):
        raise NotImplementedError

    def inverse(self, y):
        raise NotImplementedError

    def unbounded(self):
        return True

    def describe(self):
        return {"form": self.name}


class Const(Form):
    increasing = False
    name = "constant"

    def __init__(self, c):
        self.c = float(c)

    def value(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.c)

    def antider(self, t):
        return self.c * np.asarray(t, dtype=float)

    def unbounded(self):
        return False

    def describe(self):
        return {"form": self.name, "c": self.c}


class Power(Form):
    """``d + c * (A + B t)**e``; linear densities are e = 1."""

    name = "power"

    def __init__(self, c, e, A=0.0, B=1.0, d=0.0):
        if e == 0:
            raise ValueError("zero exponent: use Const")
        self.c, self.e, self.A, self.B, self.d = map(float, (c, e, A, B, d))
        self.increasing = self.c * self.e * self.B > 0

    def _base(self, t):
        return self.A + self.B * np.asarray(t, dtype=float)

    def value(self, t):
        with np.errstate(divide="ignore"):
            return self.d + self.c * self._base(t) ** self.e

    def antider(self, t):
        u = self._base(t)
        lin = self.d * np.asarray(t, dtype=float)
        if self.e == -1.0:
            with np.errstate(divide="ignore"):
                return lin + self.c * np.log(u) / self.B
        with np.errstate(divide="ignore"):
            return lin + self.c * u ** (self.e + 1.0) / (self.B * (self.e + 1.0))

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        r = np.maximum((y - self.d) / self.c, 0.0)
        with np.errstate(divide="ignore"):
            return (r ** (1.0 / self.e) - self.A) / self.B

    def unbounded(self):
        return self.e > 0 and self.c * self.B > 0

    def describe(self):
        return {"form": self.name, "c": self.c, "e": self.e, "A": self.A, "B": self.B, "d": self.d}


class Exp(Form):
    """``d + c * exp(k t)``."""

    name = "exponential"

    def __init__(self, c, k, d=0.0):
        self.c, self.k, self.d = float(c), float(k), float(d)
        self.increasing = self.c * self.k > 0

    def value(self, t):
        with np.errstate(over="ignore"):
            return self.d + self.c * np.exp(self.k * np.asarray(t, dtype=float))

    def antider(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return self.d * t + self.c * np.exp(self.k * t) / self.k

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log((y - self.d) / self.c) / self.k

    def describe(self):
        return {"form": self.name, "c": self.c, "k": self.k, "d": self.d}


class Log(Form):
    """``d + c * log(t)``, c > 0."""

    name = "logarithmic"

    def __init__(self, c, d=0.0):
        self.c, self.d = float(c), float(d)

    def value(self, t):
        with np.errstate(divide="ignore"):
            return self.d + self.c * np.log(np.asarray(t, dtype=float))

    def antider(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.d * t + self.c * (t * np.log(t) - t)
        return np.where(t == 0, 0.0, out)

    def inverse(self, y):
        with np.errstate(over="ignore"):
            return np.exp((np.asarray(y, dtype=float) - self.d) / self.c)

    def inverse_antider(self, y):
        # y x - antider(x) with y = d + c log x collapses to c x
        return self.c * self.inverse(y)

    def describe(self):
        return {"form": self.name, "c": self.c, "d": self.d}


_U_GX, _U_GW = np.polynomial.legendre.leggauss(8)
_U_EDGES = 2.0 ** -np.arange(61.0)[::-1]
_PLOG_ZMAX = 40.0
_PLOG_TABLE = 16001

_U_NODES = (
    _U_EDGES[:-1, None] + (_U_EDGES[1:] - _U_EDGES[:-1])[:, None] * 0.5 * (_U_GX + 1.0)
).ravel()
_U_WEIGHTS = ((_U_EDGES[1:] - _U_EDGES[:-1])[:, None] * 0.5 * _U_GW).ravel()


class Plog(Form):
    """``s**(r-1) * log(e + s)**a``; no elementary antiderivative, so it is
    integrated on a fixed geometric Gauss-Legendre rule in ``u = s/t``."""

    name = "plog"

    def __init__(self, r, a):
        self.r, self.a = float(r), float(a)
        if self.r < 1 or self.a < 0:
            raise NotMonotone(f"plog needs r >= 1 and a >= 0, got r={r}, a={a}")
        self.increasing = self.r > 1 or self.a > 0
        self._spline = None

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return t ** (self.r - 1.0) * np.log(math.e + t) ** self.a

    def _direct(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        for i in range(0, t.size, 2048):
            tt = t[i : i + 2048, None]
            inner = _U_NODES ** (self.r - 1.0) * np.log(math.e + tt * _U_NODES) ** self.a
            out[i : i + 2048] = tt[:, 0] ** self.r * (inner @ _U_WEIGHTS)
        return out

    def _ratio_table(self):
        # Phi(t) / (t^r log(e+t)^a / r) is smooth in log t; spline it once
        if self._spline is None:
            from scipy.interpolate import CubicSpline

            z = np.linspace(-_PLOG_ZMAX, _PLOG_ZMAX, _PLOG_TABLE)
            t = np.exp(z)
            ratio = self._direct(t) * self.r / (t**self.r * np.log(math.e + t) ** self.a)
            self._spline = CubicSpline(z, ratio)
        return self._spline

    def antider(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(t)
        pos = t > 0
        with np.errstate(divide="ignore"):
            z = np.log(np.where(pos, t, 1.0))
        inside = pos & (np.abs(z) <= _PLOG_ZMAX)
        outside = pos & ~inside
        if inside.any():
            ti = t[inside]
            base = ti**self.r * np.log(math.e + ti) ** self.a / self.r
            out[inside] = base * self._ratio_table()(z[inside])
        if outside.any():
            out[outside] = self._direct(t[outside])
        return out

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        lo = np.full(y.shape, -745.0)
        hi = np.full(y.shape, 710.0)
        with np.errstate(divide="ignore"):
            target = np.log(y)
        for _ in range(110):
            mid = 0.5 * (lo + hi)
            s = np.exp(mid)
            f = (self.r - 1.0) * mid + self.a * np.log(np.log(math.e + s))
            up = f < target
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
        return np.where(y <= 0, 0.0, np.exp(0.5 * (lo + hi)))

    def describe(self):
        return {"form": self.name, "r": self.r, "a": self.a}


class Inverse(Form):
    """The inverse function of a strictly increasing form."""

    name = "inverse"

    def __init__(self, base: Form):
        if not base.increasing:
            raise ValueError("only strictly increasing forms can be inverted")
        self.base = base

    def value(self, y):
        return self.base.inverse(y)

    def inverse(self, t):
        return self.base.value(t)

    def antider(self, y):
        # d/dy [y x(y) - G(x(y))] = x(y) because G'(x) = y
        y = np.asarray(y, dtype=float)
        if hasattr(self.base, "inverse_antider"):
            return self.base.inverse_antider(y)
        x = self.base.inverse(y)
        with np.errstate(invalid="ignore"):
            out = y * x - self.base.antider(x)
        out = np.where(np.isinf(x), np.inf, out)
        return np.where(y == 0, -self.base.antider(np.zeros_like(y)), out)

    def describe(self):
        return {"form": self.name, "of": self.base.describe()}


def invert(form: Form) -> Form:
    if isinstance(form, Inverse):
        return form.base
    return Inverse(form)


# ---------------------------------------------------------------- Young function


@dataclass(frozen=True)
class DensitySegment:
    lo: float
    hi: float
    form: Form

    def start(self):
        return float(self.form.value(np.array([self.lo]))[0])

    def end(self):
        if math.isinf(self.hi):
            return math.inf if self.form.unbounded() else float(self.form.value(np.array([1e300]))[0])
        return float(self.form.value(np.array([self.hi]))[0])


_TOL = 1e-12


class YoungFunction:
    """Phi(t) = int_0^t phi for a piecewise closed-form density phi.

    ``kind`` is ``"young"`` when phi is nondecreasing with phi(0+) = 0 and
    sup phi = infinity, ``"general"`` otherwise.  ``scales`` optionally lists
    characteristic arguments (used by checkers as extra probe points).
    """

    def __init__(self, segments, spec="custom", kind=None, monotone=True, scales=()):
        segs = [s if isinstance(s, DensitySegment) else DensitySegment(*s) for s in segments]
        if not segs:
            raise ParseError("empty density")
        if segs[0].lo != 0.0 or not math.isinf(segs[-1].hi):
            raise ParseError("segments must cover (0, inf)")
        for a, b in zip(segs[:-1], segs[1:]):
            if a.hi != b.lo or not a.lo < a.hi:
                raise ParseError("segments must be contiguous and ordered")
        self.segments = tuple(segs)
        self.spec = spec
        self.scales = tuple(float(s) for s in scales)
        self.monotone = monotone
        self._los = np.array([s.lo for s in segs])
        self._interior = self._los[1:]
        self._vlo = np.array([s.start() for s in segs])
        self._vhi = np.array([s.end() for s in segs])
        if np.any(self._vlo < -_TOL):
            raise NotMonotone("density must be nonnegative")
        if monotone:
            scale = np.maximum(1.0, np.abs(self._vhi[np.isfinite(self._vhi)]).max(initial=1.0))
            bad = self._vhi < self._vlo - _TOL * scale
            bad[:-1] |= self._vlo[1:] < self._vhi[:-1] - _TOL * scale
            for s in segs:
                if not isinstance(s.form, Const) and not s.form.increasing:
                    raise NotMonotone(f"segment on ({s.lo}, {s.hi}] decreases")
            if bad.any():
                raise NotMonotone("density decreases across a join")
        cum = [0.0]
        for s in segs[:-1]:
            piece = float(s.form.antider(np.array([s.hi]))[0] - s.form.antider(np.array([s.lo]))[0])
            cum.append(cum[-1] + piece)
        self._cum = np.array(cum)
        self._alo = np.array([float(s.form.antider(np.array([s.lo]))[0]) for s in segs])
        young = monotone and abs(self._vlo[0]) <= _TOL and math.isinf(self._vhi[-1])
        if kind is None:
            kind = "young" if young else "general"
        elif kind == "young" and not young:
            raise NotYoung(f"{spec}: need phi(0+)=0, phi nondecreasing and unbounded")
        self.kind = kind

    def __repr__(self):
        return f"YoungFunction({self.spec!r}, kind={self.kind!r})"

    # -- evaluation

    def _index(self, t):
        return np.searchsorted(self._interior, t, side="left")

    def _piecewise(self, t, fn):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        out = np.zeros_like(flat)
        idx = self._index(flat)
        for i in np.unique(idx):
            m = idx == i
            out[m] = fn(i, flat[m])
        return out.reshape(t.shape) if t.ndim else out[0]

    def Phi(self, t):
        """Young function value; exact piecewise antiderivative."""

        def piece(i, x):
            seg = self.segments[i].form
            return self._cum[i] + (seg.antider(x) - self._alo[i])

        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._piecewise(np.maximum(t, 0.0), piece)
        return np.where(t <= 0, 0.0, out)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        out = self._piecewise(np.maximum(t, 0.0), lambda i, x: self.segments[i].form.value(x))
        return np.where(t <= 0, 0.0, out)

    def phi_inv(self, y):
        """Generalized inverse sup{t >= 0 : phi(t) <= y}; +inf past sup phi."""
        if not self.monotone:
            raise NotMonotone(f"{self.spec}: phi^-1 needs a nondecreasing density")
        y = np.asarray(y, dtype=float)
        flat = np.atleast_1d(y).ravel()
        idx = np.searchsorted(self._vhi, flat, side="right")
        out = np.full_like(flat, math.inf)
        for i in np.unique(idx):
            if i >= len(self.segments):
                continue
            m = idx == i
            seg = self.segments[i]
            yy = flat[m]
            above = self._vlo[i] > yy
            res = np.empty_like(yy)
            res[above] = seg.lo
            if (~above).any():
                res[~above] = np.clip(seg.form.inverse(yy[~above]), seg.lo, seg.hi)
            out[m] = res
        out = np.where(flat < 0, 0.0, out)
        return out.reshape(y.shape) if y.ndim else out[0]

    # -- structure

    @property
    def arg_breaks(self):
        """Arguments where the density changes form."""
        return tuple(self._interior.tolist())

    @property
    def value_breaks(self):
        """Density values at segment ends: kinks and plateaus of phi^-1."""
        v = np.concatenate([self._vlo, self._vhi])
        v = v[np.isfinite(v) & (v > 0)]
        return tuple(np.unique(v).tolist())

    def complementary(self) -> "YoungFunction":
        # cached: checkers ask for Psi at every grid point
        if getattr(self, "_comp", None) is None:
            self._comp = complementary(self)
        return self._comp


# ---------------------------------------------------------------- operations


def eval_Phi(Y: YoungFunction, t):
    return Y.Phi(t)


def eval_phi_inv(Y: YoungFunction, s):
    return Y.phi_inv(s)


def complementary(Y: YoungFunction) -> YoungFunction:
    """Psi with density phi^-1, built segment by segment."""
    if Y.kind != "young":
        raise NotYoung(f"{Y.spec}: complementary function needs a Young function")
    out = []
    prev = 0.0
    for seg, vlo, vhi in zip(Y.segments, Y._vlo, Y._vhi):
        if vlo > prev:
            # a jump of phi is a plateau of phi^-1
            out.append(DensitySegment(prev, float(vlo), Const(seg.lo)))
        if seg.form.increasing and vhi > vlo:
            out.append(DensitySegment(float(max(vlo, prev)), float(vhi), invert(seg.form)))
        prev = max(prev, float(vhi))
    scales = ()
    return YoungFunction(out, spec=f"complementary({Y.spec})", kind="young", scales=scales)


@dataclass
class Delta2Report:
    status: str
    c_min: float | None = None
    witness_t: float | None = None
    grid: dict = field(default_factory=dict)
    ratio_max: float = math.nan
    threshold: float = DELTA2_BLOWUP

    def to_dict(self):
        return {
            "condition": "delta2",
            "status": self.status,
            "c_min": self.c_min,
            "witness": None if self.witness_t is None else {"t": self.witness_t},
            "ratio_max": self.ratio_max,
            "threshold": self.threshold,
            "grid": self.grid,
        }


def check_delta2(Y: YoungFunction, grid: LogGrid | None = None, threshold=DELTA2_BLOWUP) -> Delta2Report:
    """Phi(2t) <= C Phi(t) on the grid, with C the grid maximum of the ratio."""
    grid = grid or LogGrid()
    t = grid.values()
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = Y.Phi(2 * t) / Y.Phi(t)
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    i = int(np.argmax(ratio))
    rmax = float(ratio[i])
    if rmax <= threshold:
        return Delta2Report("holds", c_min=rmax, grid=grid.describe(), ratio_max=rmax, threshold=threshold)
    # first grid point past the threshold; later points may just be overflow
    j = int(np.argmax(ratio > threshold))
    return Delta2Report("fails", witness_t=float(t[j]), grid=grid.describe(), ratio_max=rmax, threshold=threshold)


@dataclass
class SConvexReport:
    status: str
    s: float
    worst_slack: float
    witness: dict | None
    samples: int


def check_s_convex(Y: YoungFunction, s: float, samples=None, rel_tol=1e-12) -> SConvexReport:
    """Phi(a x + b y) <= a^s Phi(x) + b^s Phi(y) whenever a^s + b^s = 1.

    ``samples`` is an iterable of (alpha, x, y); beta is derived from alpha.
    The default sample set is a deterministic product grid.
    """
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    if samples is None:
        alphas = np.linspace(0.02, 0.98, 17)
        xs = np.logspace(-4, 4, 17)
        A, X, Yv = np.meshgrid(alphas, xs, xs, indexing="ij")
        alpha, x, y = A.ravel(), X.ravel(), Yv.ravel()
    else:
        alpha, x, y = (np.asarray(v, dtype=float) for v in zip(*samples))
    beta = (1.0 - alpha**s) ** (1.0 / s)
    lhs = Y.Phi(alpha * x + beta * y)
    rhs = alpha**s * Y.Phi(x) + beta**s * Y.Phi(y)
    slack = rhs - lhs
    tol = rel_tol * np.maximum(np.abs(rhs), np.abs(lhs))
    i = int(np.argmin(slack + tol))
    ok = bool(np.all(slack >= -tol))
    return SConvexReport(
        "holds" if ok else "fails",
        s,
        float(slack[i]),
        None if ok else {"alpha": float(alpha[i]), "beta": float(beta[i]), "x": float(x[i]), "y": float(y[i])},
        int(alpha.size),
    )


# ---------------------------------------------------------------- factorial-scale family


def factorial_scales(kmax: int) -> list[int]:
    """a_0 = 1, a_k = (k+3)! as exact integers."""
    return [1] + [math.factorial(k + 3) for k in range(1, kmax + 1)]


def chi(t, kmax: int = 14):
    """The decreasing profile chi: log(e/t) on (0,1], then alternating ramps
    and plateaus on (a_k, a_k + 1] and (a_k + 1, a_{k+1}]."""
    a = np.array(factorial_scales(kmax + 1), dtype=float)
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    out = np.empty_like(flat)
    small = flat <= 1.0
    with np.errstate(divide="ignore"):
        out[small] = 1.0 - np.log(flat[small])
    big = ~small
    if big.any():
        k = np.searchsorted(a, flat[big], side="left") - 1
        if (k > kmax).any():
            raise ValueError(f"chi evaluated past a_{kmax + 1}")
        ak = a[k]
        ramp = flat[big] <= ak + 1.0
        val = np.where(ramp, 0.5**k * (1.0 - (flat[big] - ak) / 2.0), 0.5 ** (k + 1))
        out[big] = val
    return out.reshape(t.shape) if t.ndim else out[0]


def chi_integral_exact(t: Fraction | int, kmax: int = 14) -> Fraction:
    """int_0^t chi exactly for rational t >= 1 (the log piece integrates to 2)."""
    t = Fraction(t)
    if t < 1:
        raise ValueError("exact integral is available for t >= 1")
    a = factorial_scales(kmax + 1)
    total = Fraction(2)
    for k in range(kmax + 1):
        ak, ak1 = a[k], a[k + 1]
        if t <= ak:
            break
        h = Fraction(1, 2**k)
        ramp_end = min(t, Fraction(ak + 1))
        u = ramp_end - ak
        total += h * (u - u * u / 4)
        if t > ak + 1:
            total += h / 2 * (min(t, Fraction(ak1)) - (ak + 1))
    else:
        if t > a[kmax + 1]:
            raise ValueError(f"t past a_{kmax + 1}")
    return total


def appendix2_young(gamma: float, kmax: int = 14) -> YoungFunction:
    """Young function whose inverse density is phi^-1(y) = chi(y^(-1/gamma)).

    Built as the complement of the density y -> chi(y^(-1/gamma)).  Below
    y = a_kmax^(-gamma) the profile is replaced by a linear ramp to 0.
    """
    if gamma <= 0:
        raise ParseError("appendix2 needs gamma > 0")
    if kmax > 14:
        raise ParseError("appendix2 is exact for kmax <= 14 only")
    a = [float(v) for v in factorial_scales(kmax)]
    g = float(gamma)
    pieces = []
    bK = a[kmax] ** -g
    pieces.append(DensitySegment(0.0, bK, Power(0.5**kmax / bK, 1.0)))
    b_next = bK
    for k in range(kmax - 1, -1, -1):
        ramp = Power(-(0.5 ** (k + 1)), -1.0 / g, d=0.5**k * (1.0 + a[k] / 2.0))
        lo_v, hi_v = 0.5 ** (k + 1), 0.5**k
        # ramp ends placed by the ramp's own inverse, then the ramp refitted
        # through them so its end values are exact up to rounding
        c_k = float(ramp.inverse(lo_v))
        b_k = 1.0 if k == 0 else float(ramp.inverse(hi_v))
        pieces.append(DensitySegment(b_next, c_k, Const(lo_v)))
        if b_k > c_k:
            sc, sb = c_k ** (-1.0 / g), b_k ** (-1.0 / g)
            coef = (hi_v - lo_v) / (sb - sc)
            ramp = Power(coef, -1.0 / g, d=lo_v - coef * sc)
            ends = ramp.value(np.array([c_k, b_k]))
            if abs(ends[0] - lo_v) > 1e-13 or abs(ends[1] - hi_v) > 1e-13:
                # cancellation near huge a_k: fall back to the chord, which is
                # within a relative (gamma + 1) / a_k of the ramp
                ramp = Power((hi_v - lo_v) / (b_k - c_k), 1.0, A=-c_k, d=lo_v)
            pieces.append(DensitySegment(c_k, b_k, ramp))
        b_next = b_k
    pieces.append(DensitySegment(1.0, math.inf, Log(1.0 / g, 1.0)))
    inverse_density = YoungFunction(pieces, spec=f"appendix2-inverse:gamma={gamma}", kind="young")
    Y = complementary(inverse_density)
    return YoungFunction(
        Y.segments, spec=f"appendix2:gamma={gamma}", kind="young", scales=a[1:]
    )


# ---------------------------------------------------------------- parsing

_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+(?:\.\d*)?)?"


def _num(text: str) -> float:
    if "/" in text:
        p, q = text.split("/")
        return float(p) / float(q)
    return float(text)


def _params(body: str, allowed: set[str]) -> dict:
    out = {}
    for item in body.split(","):
        m = re.fullmatch(rf"\s*(\w+)\s*=\s*({_NUM})\s*", item)
        if not m or m.group(1) not in allowed:
            raise ParseError(f"bad parameter {item!r}")
        out[m.group(1)] = _num(m.group(2))
    return out


def parse_young_spec(spec: str, kind: str | None = None) -> YoungFunction:
    """Build a YoungFunction from the text grammar::

        power:r=<real> | plog:r=<real>,a=<real> | expm1
        | pwl-density:(t0,y0);(t1,y1);... | appendix2:gamma=<real>[,kmax=<int>]
    """
    spec = spec.strip()
    head, _, body = spec.partition(":")
    if head == "power":
        r = _params(body, {"r"}).get("r")
        if r is None or r <= 0:
            raise ParseError("power needs r > 0")
        if r == 1:
            segs = [(0.0, math.inf, Const(1.0))]
        else:
            segs = [(0.0, math.inf, Power(1.0, r - 1.0))]
        # r < 1 gives a concave Phi: a nondecreasing Phi with decreasing density
        return YoungFunction(segs, spec=spec, kind=kind, monotone=r >= 1)
    if head == "plog":
        p = _params(body, {"r", "a"})
        if set(p) != {"r", "a"}:
            raise ParseError("plog needs r and a")
        return YoungFunction([(0.0, math.inf, Plog(p["r"], p["a"]))], spec=spec, kind=kind)
    if head == "expm1" and not body:
        return YoungFunction([(0.0, math.inf, Exp(1.0, 1.0, -1.0))], spec=spec, kind=kind)
    if head == "appendix2":
        p = _params(body, {"gamma", "kmax"})
        if "gamma" not in p:
            raise ParseError("appendix2 needs gamma")
        Y = appendix2_young(p["gamma"], int(p.get("kmax", 14)))
        if kind == "general":
            Y.kind = "general"
        return Y
    if head == "pwl-density":
        pts = []
        for item in body.split(";"):
            m = re.fullmatch(rf"\s*\(\s*({_NUM})\s*,\s*({_NUM})\s*\)\s*", item)
            if not m:
                raise ParseError(f"bad point {item!r}")
            pts.append((_num(m.group(1)), _num(m.group(2))))
        return pwl_density(pts, spec=spec, kind=kind)
    raise ParseError(f"unknown Young spec {spec!r}")


def pwl_density(points, spec="pwl-density", kind=None) -> YoungFunction:
    """Piecewise-linear density through ``points``; constant before the first
    point, continued with the last slope after the final one."""
    pts = sorted((float(t), float(y)) for t, y in points)
    if len(pts) < 2:
        raise ParseError("pwl-density needs at least two points")
    ts = [p[0] for p in pts]
    if len(set(ts)) != len(ts) or ts[0] < 0:
        raise ParseError("pwl-density abscissae must be distinct and >= 0")
    segs = []
    if ts[0] > 0:
        segs.append((0.0, ts[0], Const(pts[0][1])))

    def linear(p, q, hi):
        slope = (q[1] - p[1]) / (q[0] - p[0])
        if slope == 0:
            return (p[0], hi, Const(p[1]))
        if slope < 0:
            raise NotMonotone(f"density decreases on ({p[0]}, {q[0]}]")
        return (p[0], hi, Power(slope, 1.0, d=p[1] - slope * p[0]))

    for p, q in zip(pts[:-2], pts[1:-1]):
        segs.append(linear(p, q, q[0]))
    segs.append(linear(pts[-2], pts[-1], math.inf))
    return YoungFunction(segs, spec=spec, kind=kind)
