"""Independent reference computations used by the test-suite.

None of these call into the code paths they check: the Legendre transform is a
brute-force supremum, modulars of operator outputs use scipy's QAGS, and the
Hardy ratio is derived by hand.
"""

import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar


def legendre(Phi, t, xlo=1e-9, xhi=1e9, n=200_001):
    """sup_x (t x - Phi(x)) by a log-grid scan refined with a bounded Brent search."""
    xs = np.logspace(math.log10(xlo), math.log10(xhi), n)
    Px = Phi(xs)
    out = []
    for ti in np.atleast_1d(t):
        vals = ti * xs - Px
        i = int(np.argmax(vals))
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
        res = minimize_scalar(
            lambda x: -(ti * x - float(Phi(np.array([x]))[0])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14 * hi},
        )
        out.append(max(vals[i], -res.fun, 0.0))
    return np.array(out)


def quad_modular(Phi, g, w, lo, hi, singular=()):
    """int_lo^hi Phi(|g|) w by scipy's QAGS, split at the singular points."""
    pts = [lo] + sorted(b for b in singular if lo < b < hi) + [hi]

    def h(x):
        return float(Phi(np.abs(g(np.array([x]))))[0] * w(np.array([x]))[0])

    return sum(quad(h, a, b, limit=500, epsabs=1e-13, epsrel=1e-12)[0] for a, b in zip(pts[:-1], pts[1:]))


def hilbert_indicator(a, b, x):
    """(1/pi) log|x - a| / |x - b| for chi_(a, b)."""
    x = np.asarray(x, dtype=float)
    return np.log(np.abs(x - a) / np.abs(x - b)) / math.pi


def maximal_indicator_01(x):
    """M chi_(0,1): 1 inside, 1/x to the right, 1/(1-x) to the left."""
    x = np.asarray(x, dtype=float)
    return np.where((x > 0) & (x < 1), 1.0, np.where(x >= 1, 1.0 / np.maximum(x, 1e-300), 1.0 / (1.0 - x)))
