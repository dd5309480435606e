"""Fixed-node composite Gauss-Legendre quadrature with geometric grading.

Every finite piece between consecutive breakpoints is split at its midpoint
and each half is cut into octave panels shrinking toward the endpoint, so
power-law and logarithmic endpoint singularities are integrated to near
machine precision.  Infinite tails are cut into octave panels growing away
from the last breakpoint.  What lies beyond the deepest panel is
extrapolated from a local power-law fit ``h ~ K d**s``; ``s <= -1`` at an
endpoint (or ``s >= -1`` in a tail) means the integral diverges.

The node set only depends on the breakpoints, so a single ``Rule`` can be
reused for many integrands (e.g. every step of a gauge bisection).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DivergentIntegral

ORDER = 8
DEPTH = 40

_GX, _GW = np.polynomial.legendre.leggauss(ORDER)
_GX = 0.5 * (_GX + 1.0)
_GW = 0.5 * _GW

# divergence threshold on the fitted local exponent
_SLOPE_EPS = 1e-9
_MASS_FRAC = 1e-6


def _panel_nodes(edges):
    edges = np.asarray(edges, dtype=float)
    lo = edges[:-1, None]
    width = (edges[1:] - edges[:-1])[:, None]
    x = lo + width * _GX[None, :]
    w = width * _GW[None, :]
    return x.ravel(), w.ravel()


class Rule:
    """Nodes, weights and end-extrapolation data for one integration domain."""

    def __init__(self, lo, hi, breaks=(), depth=DEPTH):
        if not lo < hi:
            raise ValueError(f"empty interval ({lo}, {hi})")
        self.lo, self.hi = float(lo), float(hi)
        pts = sorted({float(b) for b in breaks if lo < b < hi and math.isfinite(b)})
        finite = [p for p in (self.lo, self.hi) if math.isfinite(p)]
        pts = sorted(set(pts) | set(finite))
        if not pts:
            pts = [0.0]
        # graded buffer piece between the outermost breakpoint and each tail
        span = max(pts[-1] - pts[0], abs(pts[0]), abs(pts[-1])) or 1.0
        if math.isinf(self.hi):
            pts.append(pts[-1] + max(abs(pts[-1]), span))
        if math.isinf(self.lo):
            pts.insert(0, pts[0] - max(abs(pts[0]), span))
        xs, ws = [], []
        # (probe_near, probe_far, anchor, kind) where kind is "end" or "tail"
        self._ends = []
        probes = []

        def add_probe(x):
            probes.append(x)
            return len(probes) - 1

        for a, b in zip(pts[:-1], pts[1:]):
            m = 0.5 * (a + b)
            half = m - a
            k = np.arange(depth + 1)
            # toward a: edges a + half*2^-k, reversed to ascend
            ea = (a + half * 2.0 ** (-k))[::-1]
            eb = b - half * 2.0 ** (-k)
            for edges in (ea, eb):
                x, w = _panel_nodes(edges)
                xs.append(x)
                ws.append(w)
            d = half * 2.0 ** (-depth)
            self._ends.append((add_probe(a + d), add_probe(a + 0.5 * d), d, "end"))
            self._ends.append((add_probe(b - d), add_probe(b - 0.5 * d), d, "end"))

        k = np.arange(depth + 1)
        if math.isinf(self.hi):
            x0 = pts[-1]
            s = max(abs(x0), span)
            edges = x0 + s * (2.0 ** k - 1.0)
            x, w = _panel_nodes(edges)
            xs.append(x)
            ws.append(w)
            far = edges[-1]
            self._ends.append((add_probe(far), add_probe(2.0 * far - x0), far, "tail+"))
        if math.isinf(self.lo):
            x0 = pts[0]
            s = max(abs(x0), span)
            edges = (x0 - s * (2.0 ** k - 1.0))[::-1]
            x, w = _panel_nodes(edges)
            xs.append(x)
            ws.append(w)
            far = edges[0]
            self._ends.append((add_probe(far), add_probe(2.0 * far - x0), far, "tail-"))

        self.x = np.concatenate(xs)
        self.w = np.concatenate(ws)
        self.probes = np.asarray(probes, dtype=float)

    @property
    def nodes(self):
        return np.concatenate([self.x, self.probes])

    def integrate_values(self, values):
        """Integrate given samples at ``self.nodes`` (main nodes then probes)."""
        values = np.asarray(values, dtype=float)
        n = self.x.size
        hv, pv = values[:n], values[n:]
        if np.isnan(hv).any() or np.isnan(pv).any():
            raise ValueError("integrand produced NaN")
        if np.isinf(hv).any():
            raise DivergentIntegral("integrand is infinite at a quadrature node", "breakpoint")
        body = float(np.dot(self.w, hv))
        total = body
        for i_near, i_far, d, kind in self._ends:
            total += self._remainder(pv[i_near], pv[i_far], d, kind, body)
        return total

    def integrate(self, h):
        return self.integrate_values(h(self.nodes))

    @staticmethod
    def _remainder(h1, h2, d, kind, body):
        # h1 at the innermost edge, h2 one octave further out
        if h1 == 0.0 and h2 == 0.0:
            return 0.0
        if np.isinf(h1) or np.isinf(h2):
            raise DivergentIntegral("integrand blows up", "breakpoint" if kind == "end" else "tail")
        if h1 == 0.0 or h2 == 0.0 or (h1 < 0) != (h2 < 0):
            return 0.0
        if kind == "end":
            # h2 sits at half the distance of h1
            s = math.log(h2 / h1) / math.log(0.5)
            if s <= -1.0 + _SLOPE_EPS:
                if not _carries_mass(h1, d, body):
                    return 0.0
                raise DivergentIntegral("non-integrable singularity at a breakpoint", "breakpoint")
            return d * h1 / (s + 1.0)
        s = math.log(h2 / h1) / math.log(2.0)
        if s >= -1.0 - _SLOPE_EPS:
            if not _carries_mass(h1, d, body):
                return 0.0
            raise DivergentIntegral("integrand tail decays too slowly", "tail")
        return -abs(d) * h1 / (s + 1.0)


def _carries_mass(h1, d, body):
    # a divergent end puts at least ~body/DEPTH into each octave, so h1*d is
    # comparable to the body; a steep ratio with negligible h1*d is rounding
    # noise in the integrand right next to a breakpoint
    return abs(h1 * d) > _MASS_FRAC * abs(body)


def integrate(h, lo, hi, breaks=(), depth=DEPTH):
    """Integrate a vectorized ``h`` over (lo, hi); raises DivergentIntegral."""
    return Rule(lo, hi, breaks, depth).integrate(h)
