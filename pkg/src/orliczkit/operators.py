"""Closed-form action of P_p, Q_q, I, M and H on step functions."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DivergentIntegral, NoFiniteGauge, ParseError, UnsupportedOperator
from .funcspace import GaugeResult, PowerWeight, StepFunction, dilate, solve_decreasing
from .quad import Rule
from .youngfn import YoungFunction


@dataclass(frozen=True)
class Term:
    """``c``, ``c * x**a`` or ``c * log|x - b|``."""

    kind: str
    c: float
    param: float = 0.0

    def __call__(self, x):
        if self.kind == "const":
            return np.full_like(x, self.c)
        if self.kind == "pow":
            with np.errstate(divide="ignore"):
                return self.c * np.abs(x) ** self.param
        with np.errstate(divide="ignore"):
            return self.c * np.log(np.abs(x - self.param))

    def describe(self):
        return {"kind": self.kind, "c": self.c, "param": self.param}


class PiecewiseClosedForm:
    """Sum of power and log terms on each interval between ``edges``."""

    def __init__(self, edges, term_lists, domain, label=""):
        self.edges = np.asarray(edges, dtype=float)
        self.terms = [tuple(t) for t in term_lists]
        if len(self.terms) != len(self.edges) - 1:
            raise ValueError("one term list per interval")
        self.domain = domain
        self.label = label

    @property
    def breakpoints(self):
        return [float(e) for e in self.edges if math.isfinite(e)]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros_like(flat)
        idx = np.clip(np.searchsorted(self.edges, flat, side="right") - 1, 0, len(self.terms) - 1)
        for i in np.unique(idx):
            m = idx == i
            xs = flat[m]
            val = np.zeros_like(xs)
            for term in self.terms[i]:
                val = val + term(xs)
            out[m] = val
        if self.domain == "r+":
            out = np.where(flat <= 0, 0.0, out)
        return out.reshape(x.shape) if x.ndim else out[0]

    def describe(self):
        return {
            "label": self.label,
            "domain": self.domain,
            "pieces": [
                {"lo": float(a), "hi": float(b), "terms": [t.describe() for t in ts]}
                for a, b, ts in zip(self.edges[:-1], self.edges[1:], self.terms)
            ],
        }


def _edges_r_plus(f: StepFunction):
    return [0.0] + [b for b in f.breakpoints if b > 0] + [math.inf]


def hardy_P(p: float, f: StepFunction) -> PiecewiseClosedForm:
    """(P_p f)(t) = t^(-1/p) int_0^t f(s) s^(1/p - 1) ds."""
    if p == 0:
        raise ValueError("p must be nonzero")
    k = 1.0 / p
    edges = _edges_r_plus(f)
    lists = []
    for u, v in zip(edges[:-1], edges[1:]):
        terms = []
        for a, b, c in f.pieces:
            if a == 0 and k <= 0:
                raise DivergentIntegral("s^(1/p-1) is not integrable at 0", "zero")
            if v <= a:
                continue
            if u >= b:
                terms.append(Term("pow", c * p * (b**k - a**k), -k))
            else:
                terms.append(Term("const", c * p))
                if a > 0:
                    terms.append(Term("pow", -c * p * a**k, -k))
        lists.append(terms)
    return PiecewiseClosedForm(edges, lists, "r+", f"P:p={p}")


def hardy_Q(q: float, f: StepFunction) -> PiecewiseClosedForm:
    """(Q_q f)(t) = t^(-1/q) int_t^inf f(s) s^(1/q - 1) ds."""
    if q == 0:
        raise ValueError("q must be nonzero")
    k = 1.0 / q
    edges = _edges_r_plus(f)
    lists = []
    for u, v in zip(edges[:-1], edges[1:]):
        terms = []
        for a, b, c in f.pieces:
            if u >= b:
                continue
            if v <= a:
                terms.append(Term("pow", c * q * (b**k - a**k), -k))
            else:
                terms.append(Term("pow", c * q * b**k, -k))
                terms.append(Term("const", -c * q))
        lists.append(terms)
    return PiecewiseClosedForm(edges, lists, "r+", f"Q:q={q}")


class IntegralOutput(PiecewiseClosedForm):
    def level_set(self, lam: float):
        """{If > lam} as (x_lam, inf), or None when empty."""
        total = float(self(np.array([self.edges[-2] + 1.0]))[0]) if len(self.edges) > 2 else 0.0
        if lam >= total:
            return None
        if lam < 0:
            return (0.0, math.inf)
        for (u, v), terms in zip(zip(self.edges[:-1], self.edges[1:]), self.terms):
            hi_val = float(self(np.array([v]))[0]) if math.isfinite(v) else total
            if hi_val > lam:
                slope = sum(t.c for t in terms if t.kind == "pow")
                base = sum(t.c for t in terms if t.kind == "const")
                return ((lam - base) / slope if slope > 0 else u, math.inf)
        return None


def integral_I(f: StepFunction) -> IntegralOutput:
    """(If)(x) = int_0^x f; piecewise linear and nondecreasing for f >= 0."""
    edges = _edges_r_plus(f)
    lists = []
    for u, v in zip(edges[:-1], edges[1:]):
        mass = 0.0
        terms = []
        for a, b, c in f.pieces:
            if u >= b:
                mass += c * (b - a)
            elif v > a:
                terms += [Term("pow", c, 1.0), Term("const", -c * a)]
        if mass:
            terms.append(Term("const", mass))
        lists.append(terms)
    return IntegralOutput(edges, lists, "r+", "I")


def hilbert(f: StepFunction) -> PiecewiseClosedForm:
    """(Hf)(x) = (1/pi) sum c_i log(|x - a_i| / |x - b_i|); +-inf at breakpoints."""
    terms = []
    for a, b, c in f.pieces:
        terms += [Term("log", c / math.pi, a), Term("log", -c / math.pi, b)]
    edges = [-math.inf] + f.breakpoints + [math.inf]
    return PiecewiseClosedForm(edges, [terms] * (len(edges) - 1), "r", "H")


class MaximalOutput:
    """Exact Hardy-Littlewood maximal function of a step function.

    For fixed v the average over [u, v] is a monotone Mobius function of u
    while u crosses a constancy interval of f, so the supremum is attained
    with both endpoints in breakpoints(f) or at x itself.
    """

    domain = "r"
    label = "M"

    def __init__(self, f: StepFunction):
        self.f = abs(f)
        self._b = np.array(self.f.breakpoints, dtype=float)
        cum = [0.0]
        for x0, x1 in zip(self._b[:-1], self._b[1:]):
            cum.append(cum[-1] + float(self.f(np.array([0.5 * (x0 + x1)]))[0]) * (x1 - x0))
        self._F = np.array(cum)

    @property
    def breakpoints(self):
        return self._b.tolist()

    def _prim(self, x):
        if self._b.size == 0:
            return np.zeros_like(x)
        return np.interp(x, self._b, self._F)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros_like(flat)
        if self._b.size:
            for i in range(0, flat.size, 4096):
                out[i : i + 4096] = self._eval(flat[i : i + 4096])
        return out.reshape(x.shape) if x.ndim else out[0]

    def _eval(self, x):
        b = self._b
        # candidate endpoints: every breakpoint plus x itself
        cand = np.concatenate([np.broadcast_to(b, (x.size, b.size)), x[:, None]], axis=1)
        Fc = np.concatenate([np.broadcast_to(self._F, (x.size, b.size)), self._prim(x)[:, None]], axis=1)
        u_ok = cand <= x[:, None]
        v_ok = cand >= x[:, None]
        du = cand[:, :, None]
        dv = cand[:, None, :]
        width = dv - du
        ok = u_ok[:, :, None] & v_ok[:, None, :] & (width > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            avg = (Fc[:, None, :] - Fc[:, :, None]) / width
        avg = np.where(ok, avg, 0.0)
        return avg.reshape(x.size, -1).max(axis=1)

    def describe(self):
        return {"label": self.label, "domain": self.domain, "breakpoints": self.breakpoints}


def maximal(f: StepFunction) -> MaximalOutput:
    return MaximalOutput(f)


# ---------------------------------------------------------------- dispatch

_OP_RE = re.compile(r"^(P|Q)(?::(?:p|q)=([-+0-9.eE/]+))?$|^(I|M|H)$")


def parse_operator(tag: str):
    """'P:p=1' -> ('P', 1.0); 'H' -> ('H', None)."""
    m = _OP_RE.match(tag.strip())
    if not m:
        raise ParseError(f"bad operator {tag!r}")
    if m.group(1):
        if m.group(2) is None:
            raise ParseError(f"{tag}: missing exponent")
        text = m.group(2)
        val = float(text.split("/")[0]) / float(text.split("/")[1]) if "/" in text else float(text)
        return (m.group(1), val)
    return (m.group(3), None)


def apply_operator(op, f: StepFunction):
    name, param = parse_operator(op) if isinstance(op, str) else op
    if name == "P":
        return hardy_P(param, f)
    if name == "Q":
        return hardy_Q(param, f)
    if name == "I":
        return integral_I(f)
    if name == "M":
        return maximal(f)
    if name == "H":
        return hilbert(f)
    raise ParseError(f"unknown operator {name!r}")


def check_dilation_commute(op, f: StepFunction, lam: float, probes=None) -> float:
    """max over probes of |(Tf)(lam t) - T(f(lam .))(t)|."""
    name, _ = parse_operator(op) if isinstance(op, str) else op
    if name == "I":
        raise UnsupportedOperator("I does not commute with dilations")
    if probes is None:
        probes = np.logspace(-3, 3, 61)
        if name in ("M", "H"):
            probes = np.concatenate([-probes[::-1], probes])
    probes = np.asarray(probes, dtype=float)
    bad = np.zeros(probes.shape, dtype=bool)
    for b in f.breakpoints:
        bad |= np.isclose(lam * probes, b, rtol=1e-12, atol=0)
    probes = probes[~bad]
    lhs = apply_operator(op, f)(lam * probes)
    rhs = apply_operator(op, dilate(f, lam))(probes)
    return float(np.max(np.abs(lhs - rhs))) if probes.size else 0.0


# ---------------------------------------------------------------- modulars of outputs


class OutputSample:
    """|g| and the weight sampled on a quadrature rule adapted to g."""

    def __init__(self, g, w: PowerWeight, window=None):
        if window is None:
            lo = 0.0 if g.domain == "r+" else -math.inf
            hi = math.inf
        else:
            lo, hi = window
        breaks = list(g.breakpoints)
        if g.domain == "r":
            breaks.append(0.0)
        self.rule = Rule(lo, hi, breaks)
        x = self.rule.nodes
        self.absg = np.abs(g(x))
        self.w = w(x)

    def modular(self, Y: YoungFunction, k: float = 1.0) -> float:
        with np.errstate(invalid="ignore", over="ignore"):
            vals = Y.Phi(k * self.absg) * self.w
        vals = np.where(self.absg == 0, 0.0, vals)
        return self.rule.integrate_values(vals)


def modular_of_output(Y: YoungFunction, g, w: PowerWeight, k: float = 1.0, window=None) -> float:
    """int Phi(k |g|) w over the domain of g (or a finite window)."""
    return OutputSample(g, w, window).modular(Y, k)


def gauge_of_output(Y: YoungFunction, g, w: PowerWeight, eps: float = 1.0, sample=None):
    sample = sample or OutputSample(g, w)
    if not np.any(sample.absg):
        return GaugeResult(0.0, (0.0, 0.0), 0, 0.0)

    def fn(lam):
        try:
            return sample.modular(Y, 1.0 / lam) * eps / lam
        except DivergentIntegral:
            return math.inf

    # far-out lambdas underflow Phi to 0, so rule out divergence at every scale first
    if all(math.isinf(fn(lam)) for lam in (1.0, 1e3, 1e6, 1e9)):
        raise NoFiniteGauge("modular of the output diverges at every tested scale")
    return solve_decreasing(fn)
