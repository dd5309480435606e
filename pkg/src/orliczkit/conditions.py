"""Grid checkers for the integral conditions behind weighted modular inequalities.

Every checker returns a :class:`ConditionReport`.  "holds" always means
"holds on the recorded grid"; the minimal constant is searched on
``[C_FLOOR, C_CAP]`` and a predicate that still fails at the cap yields
``fails`` with the worst grid point as witness.  Side integrals that must be
finite (alpha, beta) produce ``divergent`` instead.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DivergentAlpha,
    DivergentBeta,
    DivergentIntegral,
    IncompatibleForms,
    NotYoung,
    RegimeUnsupported,
)
from .funcspace import PowerWeight
from .grids import LogGrid
from .quad import Rule
from .youngfn import YoungFunction, check_delta2

C_FLOOR = 1e-6
C_CAP = 1e8
C_RTOL = 1e-6
GROWTH_RUN = 10
GROWTH_MIN_RUN = 5

DEFAULT_TOLERANCES = {"c_floor": C_FLOOR, "c_cap": C_CAP, "c_rtol": C_RTOL}
# active search tolerances; the CLI may override them for a run
TOLERANCES = dict(DEFAULT_TOLERANCES)


def set_tolerances(**overrides):
    """Override the C search tolerances; no arguments restores the defaults."""
    new = dict(DEFAULT_TOLERANCES)
    for key, val in overrides.items():
        if key not in new:
            raise KeyError(f"unknown tolerance {key!r}")
        new[key] = float(val)
    if not 0 < new["c_floor"] < new["c_cap"] or not 0 < new["c_rtol"] < 1:
        raise ValueError(f"bad tolerances {new}")
    TOLERANCES.clear()
    TOLERANCES.update(new)


# ---------------------------------------------------------------- reports


def jsonable(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


@dataclass
class ConditionReport:
    condition: str
    params: dict
    status: str
    c_min: float | None = None
    witness: dict | None = None
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    values: dict = field(default_factory=dict)
    subreports: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    def to_dict(self) -> dict:
        out = {
            "condition": self.condition,
            "params": self.params,
            "status": self.status,
            "c_min": self.c_min,
            "witness": self.witness,
            "grid": self.grid,
            "tolerances": self.tolerances,
            "values": self.values,
        }
        if self.subreports:
            out["subreports"] = [s.to_dict() for s in self.subreports]
        if self.notes:
            out["notes"] = list(self.notes)
        return jsonable(out)


@dataclass(frozen=True)
class FourWeights:
    t: PowerWeight
    u: PowerWeight
    v: PowerWeight
    w: PowerWeight

    def describe(self):
        return {k: getattr(self, k).describe() for k in "tuvw"}


# ---------------------------------------------------------------- parallel map

_threads: int | None = None


def set_threads(n: int | None):
    global _threads
    _threads = n


def thread_count() -> int:
    if _threads is not None:
        return max(1, int(_threads))
    return max(1, int(os.environ.get("ORLICZKIT_THREADS", "1") or 1))


def pmap(fn, items):
    """Ordered map; results never depend on the worker count."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- constant search


def _log_ratio(lhs, rhs):
    if lhs <= 0:
        return -math.inf
    if not math.isfinite(lhs) or rhs <= 0:
        return math.inf
    return math.log(lhs) - math.log(rhs)


def _bounds(lo, hi, rtol):
    return (
        TOLERANCES["c_floor"] if lo is None else lo,
        TOLERANCES["c_cap"] if hi is None else hi,
        TOLERANCES["c_rtol"] if rtol is None else rtol,
    )


def minimal_constant(excess, lo=None, hi=None, rtol=None):
    """Smallest C in [lo, hi] with excess(C) <= 0, for excess nonincreasing in C.

    Returns None when the predicate is false at the cap.  The root is
    bracketed on log C and refined with Brent's method.
    """
    lo, hi, rtol = _bounds(lo, hi, rtol)
    if excess(hi) > 0:
        return None
    if excess(lo) <= 0:
        return lo

    def f(z):
        v = excess(math.exp(z))
        return min(max(v, -1e300), 1e300)

    z = brentq(f, math.log(lo), math.log(hi), xtol=rtol / 4)
    c = math.exp(z)
    # land on the true side of the threshold
    for _ in range(64):
        if excess(c) <= 0:
            return c
        c = min(hi, c * (1.0 + rtol / 4))
    return hi


def vector_minimal_constant(excess_vec, n, lo=None, hi=None, rtol=None):
    """Bisection on log C for n independent predicates at once; nan = fails."""
    lo, hi, rtol = _bounds(lo, hi, rtol)
    zlo = np.full(n, math.log(lo))
    zhi = np.full(n, math.log(hi))
    fail = excess_vec(np.exp(zhi)) > 0
    floor = excess_vec(np.exp(zlo)) <= 0
    while np.max(zhi - zlo) > rtol / 2:
        mid = 0.5 * (zlo + zhi)
        ok = excess_vec(np.exp(mid)) <= 0
        zhi = np.where(ok, mid, zhi)
        zlo = np.where(ok, zlo, mid)
    c = np.exp(zhi)
    c[floor] = lo
    c[fail] = np.nan
    return c


def diagnose_growth(seq, run=GROWTH_RUN, min_run=GROWTH_MIN_RUN):
    """Flag a sequence of minimal constants along scales as unbounded.

    Looks at the last ``run`` values (fewer when the sequence is short, but
    never fewer than ``min_run``).  Fires when they increase strictly, their
    total rise is at least a tenth of the starting value, and the increments do not
    shrink by more than a factor 4 (geometric decay would sum to a finite
    limit).
    """
    s = [x for x in seq if x is not None and math.isfinite(x)]
    run = min(run, len(s) - 1)
    if run < min_run:
        return False
    tail = np.asarray(s[-run:], dtype=float)
    d = np.diff(tail)
    if np.any(d <= 0):
        return False
    return bool(tail[-1] >= 1.1 * tail[0] and d[-1] >= 0.25 * d[0])


def _grid_report(condition, params, points, describe, excess_for, grid, extra=None):
    """Per-point minimal constants, aggregated into one report."""

    def one(pt):
        ex = excess_for(pt)
        c = minimal_constant(ex)
        return c, (ex(TOLERANCES["c_cap"]) if c is None else None)

    results = pmap(one, points)
    cs = [r[0] for r in results]
    values = {"c_point": cs}
    values.update(extra or {})
    failing = [i for i, c in enumerate(cs) if c is None]
    if failing:
        i = max(failing, key=lambda j: (results[j][1], -j))
        wit = describe(points[i])
        wit["excess_at_cap"] = results[i][1]
        if math.isinf(results[i][1]):
            wit["reason"] = "lhs_infinite"
        return ConditionReport(condition, params, "fails", witness=wit, grid=grid, values=values)
    i = int(np.argmax(cs))
    c_min = cs[i]
    values["monotone_spot_check"] = bool(excess_for(points[i])(2 * c_min) <= 0)
    values["argmax"] = describe(points[i])
    return ConditionReport(condition, params, "holds", c_min=c_min, grid=grid, values=values)


# ---------------------------------------------------------------- integrals


def _pure_power(Y: YoungFunction):
    """r when Y is ``power:r=...`` with r >= 1, i.e. Phi(t) = t^r / r."""
    spec = Y.spec.replace(" ", "")
    if not spec.startswith("power:r="):
        return None
    r = float(Fraction(spec[len("power:r=") :]))
    return r if r >= 1 else None


def _clean(vals):
    return np.where(np.isnan(vals), np.inf, vals)


def power_integral(F, fbreaks, coef, expo, wexp, t, lo=0.0):
    """int_lo^t F(coef * s^-expo) * s^wexp ds; breaks placed where the argument crosses fbreaks."""
    breaks = []
    if expo != 0 and coef > 0:
        for b in fbreaks:
            if b > 0:
                s = (coef / b) ** (1.0 / expo)
                if lo < s < t:
                    breaks.append(s)
    rule = Rule(lo, t, breaks)
    s = rule.nodes
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        fv = F(coef * s ** (-expo))
        vals = np.where(fv == 0, 0.0, fv * s**wexp)
    return rule.integrate_values(_clean(vals))


def _safe(fn):
    try:
        return fn()
    except DivergentIntegral:
        return math.inf


def _require_young(*Ys):
    for Y in Ys:
        if Y.kind != "young":
            raise NotYoung(f"{Y.spec} is not a Young function")


def alpha_Pp(Phi1: YoungFunction, p: float, gamma: float, t: float) -> float:
    """alpha(t) = int_t^inf Phi1(s^(-1/p)) s^gamma ds."""
    r = _pure_power(Phi1)
    if r is not None:
        e = gamma - r / p
        if e >= -1:
            raise DivergentAlpha(f"alpha: integrand ~ s^{e:g} at infinity", "tail")
        return t ** (e + 1) / (r * (-e - 1))
    try:
        return power_integral(Phi1.Phi, Phi1.arg_breaks, 1.0, 1.0 / p, gamma, math.inf, lo=t)
    except DivergentIntegral as exc:
        raise DivergentAlpha(f"alpha diverges: {exc}", exc.region) from exc


def beta_Qq(Phi2: YoungFunction, q: float, gamma: float, t: float) -> float:
    """beta(t) = int_t^inf Psi2(s^(1/q - 1 - gamma)) s^gamma ds."""
    e0 = 1.0 / q - 1.0 - gamma
    r = _pure_power(Phi2)
    if r is not None and r > 1:
        rc = r / (r - 1.0)
        e = e0 * rc + gamma
        if e >= -1:
            raise DivergentBeta(f"beta: integrand ~ s^{e:g} at infinity", "tail")
        return t ** (e + 1) / (rc * (-e - 1))
    Psi2 = Phi2.complementary()
    try:
        return power_integral(Psi2.Phi, Psi2.arg_breaks, 1.0, -e0, gamma, math.inf, lo=t)
    except DivergentIntegral as exc:
        raise DivergentBeta(f"beta diverges: {exc}", exc.region) from exc


def _side_values(fn, ts, exc_type):
    """Evaluate alpha/beta on the grid; return (values, None) or (None, witness)."""

    def one(t):
        try:
            return fn(t)
        except exc_type as exc:
            return exc

    vals = pmap(one, ts)
    for t, v in zip(ts, vals):
        if isinstance(v, Exception):
            return None, {"t": float(t), "region": v.region, "message": str(v)}
    return vals, None


# ---------------------------------------------------------------- Hardy operators


def _params(**kw):
    return {k: (v.spec if isinstance(v, YoungFunction) else v) for k, v in kw.items()}


def check_bk_Pp(Phi1, Phi2, p, gamma, grid: LogGrid | None = None) -> ConditionReport:
    """Integral (BK) condition for P_p, in its Psi2 form and its phi2^-1 form.

    Both forms are solved for their own minimal constant; the report carries
    the primary constant as ``c_min`` and the other as ``values.c_min_alt``.
    The two must agree on holds/fails at every grid point.
    """
    if gamma == -1:
        raise ValueError("gamma = -1 is excluded")
    grid = grid or LogGrid()
    ts = [float(t) for t in grid.values()]
    params = _params(condition="bk-p", phi1=Phi1, phi2=Phi2, p=p, gamma=gamma)
    kappa = 1.0 - 1.0 / p + gamma
    notes = []
    if kappa == 0:
        notes.append("1 - 1/p + gamma = 0: outside the general regime; check_bk_Pp_remark handles this case")
    alphas, wit = _side_values(lambda t: alpha_Pp(Phi1, p, gamma, t), ts, DivergentAlpha)
    if wit is not None:
        return ConditionReport("bk-p", params, "divergent", witness=wit, grid=grid.describe(), notes=notes)
    # a divergent alpha is reported before Psi2 is needed
    _require_young(Phi2)
    Psi2 = Phi2.complementary()
    pts = list(zip(ts, alphas))

    def primary(pt):
        t, a = pt
        return lambda C: _log_ratio(
            _safe(lambda: power_integral(Psi2.Phi, Psi2.arg_breaks, a / C, kappa, gamma, t)), a
        )

    def alt(pt):
        t, a = pt
        return lambda C: _log_ratio(
            _safe(lambda: power_integral(Phi2.phi_inv, Phi2.value_breaks, a / C, kappa, 1.0 / p - 1.0, t)), C
        )

    def describe(pt):
        return {"t": pt[0], "alpha": pt[1]}

    rep = _grid_report("bk-p", params, pts, describe, primary, grid.describe(), {"t": ts, "alpha": alphas})
    rep_alt = _grid_report("bk-p", params, pts, describe, alt, grid.describe())
    _cross_validate(rep, rep_alt, ts)
    rep.values["c_min_alt"] = rep_alt.c_min
    rep.notes = notes
    return rep


def _cross_validate(rep, rep_alt, labels):
    a = [c is None for c in rep.values["c_point"]]
    b = [c is None for c in rep_alt.values["c_point"]]
    bad = [lab for lab, x, y in zip(labels, a, b) if x != y]
    if bad:
        raise IncompatibleForms(f"{rep.condition}: primary and inverse forms disagree at {bad[:5]}")
    rep.values["c_point_alt"] = rep_alt.values["c_point"]
    rep.values["forms_agree"] = True


def check_bk_Pp_remark(Phi1, Phi2, p, gamma, grid: LogGrid | None = None) -> ConditionReport:
    """The P_p condition after substituting y = alpha / s^kappa.

    kappa = 0 (p > 0):   p phi2^-1(alpha/C) <= C t^(-1/p)
    kappa > 0, p > 0:    int_lam^inf phi2^-1(y/C) y^(-(1+gamma)/kappa) dy <= kappa C alpha^(-1/(p kappa))
    kappa < 0, p < 0:    int_0^lam  (same integrand)                     <= -kappa C alpha^(-1/(p kappa))
    with lam = alpha / t^kappa and alpha rewritten as an integral in y = s^(-1/p).
    """
    _require_young(Phi2)
    kappa = 1.0 - 1.0 / p + gamma
    if kappa == 0 and p > 0:
        case = "kappa=0"
    elif kappa > 0 and p > 0:
        case = "kappa>0"
    elif kappa < 0 and p < 0:
        case = "kappa<0"
    else:
        raise RegimeUnsupported(f"p={p}, gamma={gamma}: no substitution regime applies")
    grid = grid or LogGrid()
    ts = [float(t) for t in grid.values()]
    params = _params(condition="bk-p-remark", phi1=Phi1, phi2=Phi2, p=p, gamma=gamma, case=case)
    ex = -(gamma + 1.0) * p - 1.0
    breaks = [b for b in Phi1.arg_breaks if b > 0]

    def alpha_sub(t):
        y0 = t ** (-1.0 / p)
        try:
            if p > 0:
                v = p * Rule(0.0, y0, breaks).integrate(lambda y: _clean(Phi1.Phi(y) * y**ex))
            else:
                v = -p * Rule(y0, math.inf, breaks).integrate(lambda y: _clean(Phi1.Phi(y) * y**ex))
        except DivergentIntegral as exc:
            # both ends of the y-range that can diverge correspond to s -> inf
            raise DivergentAlpha(f"alpha diverges: {exc}", "tail") from exc
        return v

    alphas, wit = _side_values(alpha_sub, ts, DivergentAlpha)
    if wit is not None:
        return ConditionReport("bk-p-remark", params, "divergent", witness=wit, grid=grid.describe())
    yexp = -(1.0 + gamma) / kappa if kappa else 0.0

    def integral(lam, C):
        vb = [C * b for b in Phi2.value_breaks]
        h = lambda y: _clean(np.where(Phi2.phi_inv(y / C) == 0, 0.0, Phi2.phi_inv(y / C) * y**yexp))  # noqa: E731
        if kappa > 0:
            return Rule(lam, math.inf, vb).integrate(h)
        return Rule(0.0, lam, vb).integrate(h)

    def excess_for(pt):
        t, a = pt
        if case == "kappa=0":
            return lambda C: _log_ratio(p * float(Phi2.phi_inv(a / C)), C * t ** (-1.0 / p))
        lam = a / t**kappa
        rhs = abs(kappa) * a ** (-1.0 / (p * kappa))
        return lambda C: _log_ratio(_safe(lambda: integral(lam, C)), C * rhs)

    rep = _grid_report(
        "bk-p-remark",
        params,
        list(zip(ts, alphas)),
        lambda pt: {"t": pt[0], "alpha": pt[1]},
        excess_for,
        grid.describe(),
        {"t": ts, "alpha": alphas},
    )
    return rep


def check_bk_Qq(Phi1, Phi2, q, gamma, grid: LogGrid | None = None) -> ConditionReport:
    """Integral (BK) condition for Q_q, primary form with Phi1 and phi1 form."""
    _require_young(Phi1, Phi2)
    grid = grid or LogGrid()
    ts = [float(t) for t in grid.values()]
    params = _params(condition="bk-q", phi1=Phi1, phi2=Phi2, q=q, gamma=gamma)
    betas, wit = _side_values(lambda t: beta_Qq(Phi2, q, gamma, t), ts, DivergentBeta)
    if wit is not None:
        return ConditionReport("bk-q", params, "divergent", witness=wit, grid=grid.describe())
    e = 1.0 / q
    pts = list(zip(ts, betas))

    def primary(pt):
        t, b = pt
        return lambda C: _log_ratio(_safe(lambda: power_integral(Phi1.Phi, Phi1.arg_breaks, b / C, e, gamma, t)), b)

    def alt(pt):
        t, b = pt
        return lambda C: _log_ratio(
            _safe(lambda: power_integral(Phi1.phi, Phi1.arg_breaks, b / C, e, gamma - e, t)), C
        )

    def describe(pt):
        return {"t": pt[0], "beta": pt[1]}

    rep = _grid_report("bk-q", params, pts, describe, primary, grid.describe(), {"t": ts, "beta": betas})
    rep_alt = _grid_report("bk-q", params, pts, describe, alt, grid.describe())
    _cross_validate(rep, rep_alt, ts)
    rep.values["c_min_alt"] = rep_alt.c_min
    return rep


def dual_exponent(q, gamma):
    """r with 1/r = 1 - 1/q + gamma; None when 1/r = 0."""
    inv = 1.0 - 1.0 / q + gamma
    return None if inv == 0 else 1.0 / inv


# ---------------------------------------------------------------- M and H


def avg_inverse(Y: YoungFunction, gamma: float, t: float) -> float:
    """(1/t) int_0^t phi^-1(s^-gamma) ds; inf when divergent."""
    return _safe(lambda: power_integral(Y.phi_inv, Y.value_breaks, 1.0, gamma, 0.0, t)) / t


def _averaged_inverse_clause(Y, gamma, grid, with_factor, name):
    ts = grid.values()
    L = np.array(pmap(lambda t: avg_inverse(Y, gamma, float(t)), ts))

    def excess(C):
        rhs = Y.phi_inv(C * ts**-gamma) * (C if with_factor else 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(L) - np.log(rhs)
        return np.where(np.isinf(L), np.inf, np.nan_to_num(out, nan=np.inf))

    cs = vector_minimal_constant(excess, ts.size)
    params = {"condition": name, "phi": Y.spec, "gamma": gamma}
    values = {"t": ts, "avg_inverse": L, "c_point": [None if np.isnan(c) else float(c) for c in cs]}
    if np.isnan(cs).any():
        bad = np.where(np.isnan(cs))[0]
        ex = excess(np.full(ts.size, TOLERANCES["c_cap"]))
        i = int(bad[np.argmax(ex[bad])])
        wit = {"t": float(ts[i]), "avg_inverse": float(L[i])}
        if math.isinf(L[i]):
            wit["reason"] = "lhs_infinite"
        return ConditionReport(name, params, "fails", witness=wit, grid=grid.describe(), values=values)
    i = int(np.argmax(cs))
    values["monotone_spot_check"] = bool(excess(np.full(ts.size, 2 * cs[i]))[i] <= 0)
    return ConditionReport(name, params, "holds", c_min=float(cs[i]), grid=grid.describe(), values=values)


def _delta2_sub(Y, grid, label):
    d = check_delta2(Y, grid)
    wit = None if d.witness_t is None else {"t": d.witness_t, "ratio": d.ratio_max}
    return ConditionReport(
        label,
        {"condition": label, "phi": Y.spec},
        d.status,
        c_min=d.c_min,
        witness=wit,
        grid=d.grid,
        values={"ratio_max": d.ratio_max, "threshold": d.threshold},
    )


def _conjunction(name, params, subs, grid):
    for s in subs:
        if s.status != "holds":
            wit = dict(s.witness or {})
            wit["clause"] = s.condition
            return ConditionReport(name, params, s.status, witness=wit, grid=grid.describe(), subreports=subs)
    c = max(s.c_min for s in subs if s.c_min is not None)
    return ConditionReport(name, params, "holds", c_min=c, grid=grid.describe(), subreports=subs)


def check_maximal_condition(Phi: YoungFunction, gamma: float, grid: LogGrid | None = None) -> ConditionReport:
    """Delta2 for Psi and, for gamma >= 0, the averaged-inverse bound with C inside and outside."""
    _require_young(Phi)
    if gamma <= -1:
        raise ValueError("gamma must exceed -1")
    grid = grid or LogGrid()
    subs = [_delta2_sub(Phi.complementary(), grid, "delta2-psi")]
    if gamma >= 0:
        subs.append(_averaged_inverse_clause(Phi, gamma, grid, True, "avg-inverse"))
    params = {"condition": "maximal", "phi": Phi.spec, "gamma": gamma}
    rep = _conjunction("maximal", params, subs, grid)
    if gamma < 0:
        rep.notes.append("-1 < gamma < 0: averaged-inverse clause holds without checking")
    return rep


def check_hilbert_condition(Phi: YoungFunction, gamma: float, grid: LogGrid | None = None) -> ConditionReport:
    """Delta2 for Phi and Psi, plus the averaged-inverse bound (C inside only) when gamma > 0."""
    _require_young(Phi)
    if gamma <= -1:
        raise ValueError("gamma must exceed -1")
    grid = grid or LogGrid()
    subs = [_delta2_sub(Phi, grid, "delta2-phi"), _delta2_sub(Phi.complementary(), grid, "delta2-psi")]
    if gamma > 0:
        subs.append(_averaged_inverse_clause(Phi, gamma, grid, False, "avg-inverse"))
    params = {"condition": "hilbert", "phi": Phi.spec, "gamma": gamma}
    rep = _conjunction("hilbert", params, subs, grid)
    if gamma <= 0:
        rep.notes.append("gamma <= 0: averaged-inverse clause holds without checking")
    return rep


def weight_ratio(gamma: float, a: float, b: float) -> float:
    """mu_gamma(a, b) / |b - a| divided by max(|a|, |b|)^gamma."""
    w = PowerWeight(gamma, domain="r")
    return w.measure(a, b) / (b - a) / max(abs(a), abs(b)) ** gamma


# ---------------------------------------------------------------- A_phi and BK on the line


def default_pair_grid(Y: YoungFunction, points=25):
    ts = sorted(set(np.logspace(-3, 3, points).tolist()) | set(Y.scales))
    return [(0.0, t2) for t2 in ts] + [(t1, t2) for t2 in ts for t1 in ts if t1 <= t2]


def _scale_growth(Y, cs_by_scale):
    seq = [cs_by_scale.get(a) for a in Y.scales]
    return diagnose_growth(seq), seq


def check_aphi_power(Phi: YoungFunction, gamma: float, pairs=None) -> ConditionReport:
    """(I(t1) + I(t2)) / (t1 + t2) <= phi^-1(C t2^-gamma), I(t) = int_0^t phi^-1(s^-gamma) ds."""
    _require_young(Phi)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    pairs = list(pairs) if pairs is not None else default_pair_grid(Phi)
    ts = sorted({t for pr in pairs for t in pr if t > 0})
    I = dict(zip(ts, pmap(lambda t: t * avg_inverse(Phi, gamma, t), ts)))
    I[0.0] = 0.0
    t1 = np.array([p[0] for p in pairs])
    t2 = np.array([p[1] for p in pairs])
    lhs = np.array([I[a] + I[b] for a, b in pairs]) / (t1 + t2)

    def excess(C):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(lhs) - np.log(Phi.phi_inv(C * t2**-gamma))
        return np.where(np.isinf(lhs), np.inf, np.nan_to_num(out, nan=np.inf))

    cs = vector_minimal_constant(excess, len(pairs))
    params = {"condition": "aphi", "phi": Phi.spec, "gamma": gamma}
    grid = {"kind": "pairs", "count": len(pairs), "t": ts}
    values = {"c_point": [None if np.isnan(c) else float(c) for c in cs]}
    diag_map = {a: (None if np.isnan(c) else float(c)) for (a, b), c in zip(pairs, cs) if a == b}
    grows, seq = _scale_growth(Phi, diag_map)
    if Phi.scales:
        values["c_along_scales"] = seq
    if np.isnan(cs).any():
        bad = np.where(np.isnan(cs))[0]
        ex = excess(np.full(len(pairs), TOLERANCES["c_cap"]))
        i = int(bad[np.argmax(ex[bad])])
        wit = {"t1": float(t1[i]), "t2": float(t2[i])}
        if math.isinf(lhs[i]):
            wit["reason"] = "lhs_infinite"
        return ConditionReport("aphi", params, "fails", witness=wit, grid=grid, values=values)
    if grows:
        a = Phi.scales[-1]
        wit = {"t1": a, "t2": a, "reason": "unbounded_growth"}
        return ConditionReport("aphi", params, "fails", witness=wit, grid=grid, values=values)
    i = int(np.argmax(cs))
    values["monotone_spot_check"] = bool(excess(np.full(len(pairs), 2 * cs[i]))[i] <= 0)
    return ConditionReport("aphi", params, "holds", c_min=float(cs[i]), grid=grid, values=values)


def default_intervals(Y: YoungFunction, points=7):
    out = []
    for b in np.logspace(-2, 2, points):
        b = float(b)
        out += [(0.0, b), (-b, b), (-0.5 * b, b), (b, 2.0 * b)]
    out += [(0.0, float(a)) for a in Y.scales]
    return out


def _line_breaks(w: PowerWeight, level, vals, a, b):
    """Points x in (a, b) with level / w(x) equal to some value in vals."""
    out = [0.0]
    if w.gamma != 0:
        for v in vals:
            if v > 0 and level > 0:
                try:
                    x = (level / (w.coeff * v)) ** (1.0 / w.gamma)
                except OverflowError:
                    continue
                out += [x, -x]
    return [x for x in out if a < x < b]


def _inverse_average(Y, w, level, a, b):
    """(1/|Q|) int_Q phi^-1(level / w(x)) dx."""
    rule = Rule(a, b, _line_breaks(w, level, Y.value_breaks, a, b))
    x = rule.nodes
    with np.errstate(divide="ignore", over="ignore"):
        vals = _clean(Y.phi_inv(level / w(x)))
    avg = rule.integrate_values(vals) / (b - a)
    # a mean lies within the sampled range; the clamp keeps rounding from
    # pushing a constant average across a jump of phi
    return float(np.clip(avg, vals.min(), vals.max()))


def aphi_value(Phi, w: PowerWeight, eps, a, b):
    """eps w(Q)/|Q| * phi((1/|Q|) int_Q phi^-1(1/(eps w)))."""
    inner = _safe(lambda: _inverse_average(Phi, w, 1.0 / eps, a, b))
    if math.isinf(inner):
        return math.inf
    return eps * w.measure(a, b) / (b - a) * float(Phi.phi(inner))


def check_aphi_general(Phi: YoungFunction, w: PowerWeight, intervals=None, eps_grid=None) -> ConditionReport:
    """A_phi on intervals of the line.  The predicate is 'value <= C', so the
    minimal constant is the grid maximum itself."""
    _require_young(Phi)
    if w.gamma <= -1:
        raise DivergentIntegral("w(Q) is infinite for intervals touching 0", "zero")
    intervals = list(intervals) if intervals is not None else default_intervals(Phi)
    notes = []
    values = {}
    if eps_grid is None:
        if w.gamma != 0:
            eps_grid = [1.0]
            notes.append("power weight: dilation reduces every eps to eps = 1")
            values["reduction_deviation"] = _reduction_deviation(Phi, w, intervals)
        else:
            eps_grid = np.logspace(-3, 3, 7).tolist()
    pts = [(q, e) for q in intervals for e in eps_grid]
    vals = pmap(lambda pt: aphi_value(Phi, w, pt[1], *pt[0]), pts)
    params = {"condition": "aphi-general", "phi": Phi.spec, "weight": w.describe()}
    grid = {"intervals": [list(q) for q in intervals], "eps": list(eps_grid)}
    values["value"] = vals
    by_scale = {q[1]: v for (q, e), v in zip(pts, vals) if q[0] == 0.0 and e == 1.0}
    grows, seq = _scale_growth(Phi, by_scale)
    if Phi.scales:
        values["c_along_scales"] = seq
    i = int(np.argmax(vals))
    (a, b), e = pts[i]
    wit = {"interval": [a, b], "eps": e}
    if vals[i] > TOLERANCES["c_cap"]:
        if math.isinf(vals[i]):
            wit["reason"] = "lhs_infinite"
        return ConditionReport("aphi-general", params, "fails", witness=wit, grid=grid, values=values, notes=notes)
    if grows:
        wit = {"interval": [0.0, Phi.scales[-1]], "eps": 1.0, "reason": "unbounded_growth"}
        return ConditionReport("aphi-general", params, "fails", witness=wit, grid=grid, values=values, notes=notes)
    values["argmax"] = wit
    return ConditionReport(
        "aphi-general", params, "holds", c_min=max(vals[i], TOLERANCES["c_floor"]), grid=grid, values=values, notes=notes
    )


def _reduction_deviation(Phi, w, intervals, eps_samples=(0.125, 8.0)):
    """max relative gap between A_phi(eps, Q) and A_phi(1, eps^(1/gamma) Q)."""
    dev = 0.0
    for a, b in intervals[:6]:
        for e in eps_samples:
            d = e ** (1.0 / w.gamma)
            x = aphi_value(Phi, w, e, a, b)
            y = aphi_value(Phi, w, 1.0, d * a, d * b)
            if math.isfinite(x) and math.isfinite(y) and max(x, y) > 0:
                dev = max(dev, abs(x - y) / max(x, y))
    return dev


def check_bk_general(Phi: YoungFunction, w: PowerWeight, intervals=None, lambda_grid=None) -> ConditionReport:
    """BK on the line: (1/|Q|) int_Q phi^-1(phi(lam) w(Q)/(C |Q| w(x))) dx <= C lam."""
    _require_young(Phi)
    if w.gamma <= -1:
        raise DivergentIntegral("w(Q) is infinite for intervals touching 0", "zero")
    intervals = list(intervals) if intervals is not None else default_intervals(Phi)
    lams = list(lambda_grid) if lambda_grid is not None else np.logspace(-3, 3, 9).tolist()
    pts = []
    skipped = 0
    for q in intervals:
        ratio = w.measure(*q) / (q[1] - q[0])
        for lam in lams:
            ph = float(Phi.phi(lam))
            if not math.isfinite(ph * ratio):
                skipped += 1
                continue
            pts.append((q, lam, ph * ratio))

    def excess_for(pt):
        (a, b), lam, level = pt
        return lambda C: _log_ratio(_safe(lambda: _inverse_average(Phi, w, level / C, a, b)), C * lam)

    params = {"condition": "bk-general", "phi": Phi.spec, "weight": w.describe()}
    grid = {"intervals": [list(q) for q in intervals], "lambda": lams, "skipped_overflow": skipped}
    rep = _grid_report(
        "bk-general", params, pts, lambda pt: {"interval": list(pt[0]), "lambda": pt[1]}, excess_for, grid
    )
    if rep.holds and Phi.scales:
        best = {}
        for (q, lam, _), c in zip(pts, rep.values["c_point"]):
            if q[0] == 0.0:
                best[q[1]] = max(best.get(q[1], 0.0), c)
        grows, seq = _scale_growth(Phi, best)
        rep.values["c_along_scales"] = seq
        if grows:
            rep.status = "fails"
            rep.witness = {"interval": [0.0, Phi.scales[-1]], "reason": "unbounded_growth"}
            rep.c_min = None
    return rep


# ---------------------------------------------------------------- four weights


def check_fourweight_condition(Phi1, Phi2, W: FourWeights, lambdas=None, xs=None) -> ConditionReport:
    """int_0^x Psi2(alpha/(C lam u v)) v <= alpha with alpha(lam, x) = int_x^inf Phi1(lam w) t.

    Cross-checked against int_0^x phi2^-1(alpha/(C lam u v)) dy/u <= C lam,
    which follows from Psi(z) <= z phi^-1(z) <= Psi(2z) applied with z v = alpha/(C lam u).
    """
    _require_young(Phi2)
    lambdas = list(lambdas) if lambdas is not None else np.logspace(-2, 2, 9).tolist()
    xs = list(xs) if xs is not None else np.logspace(-2, 2, 9).tolist()
    params = {"condition": "fourweight", "phi1": Phi1.spec, "phi2": Phi2.spec, "weights": W.describe()}
    grid = {"lambda": lambdas, "x": xs}

    def alpha(pt):
        lam, x = pt
        try:
            return power_integral(
                Phi1.Phi, Phi1.arg_breaks, lam * W.w.coeff, -W.w.gamma, W.t.gamma, math.inf, lo=x
            ) * W.t.coeff
        except DivergentIntegral as exc:
            return DivergentAlpha(f"alpha diverges: {exc}", exc.region)

    grid_pts = [(lam, x) for lam in lambdas for x in xs]
    alphas = pmap(alpha, grid_pts)
    for (lam, x), a in zip(grid_pts, alphas):
        if isinstance(a, Exception):
            wit = {"lambda": lam, "x": x, "region": a.region}
            return ConditionReport("fourweight", params, "divergent", witness=wit, grid=grid)
    Psi2 = Phi2.complementary()
    expo = W.u.gamma + W.v.gamma
    cuv = W.u.coeff * W.v.coeff
    pts = [(lam, x, a) for (lam, x), a in zip(grid_pts, alphas)]

    def primary(pt):
        lam, x, a = pt
        return lambda C: _log_ratio(
            _safe(lambda: W.v.coeff * power_integral(Psi2.Phi, Psi2.arg_breaks, a / (C * lam * cuv), expo, W.v.gamma, x)),
            a,
        )

    def alt(pt):
        lam, x, a = pt
        return lambda C: _log_ratio(
            _safe(
                lambda: power_integral(Phi2.phi_inv, Phi2.value_breaks, a / (C * lam * cuv), expo, -W.u.gamma, x)
                / W.u.coeff
            ),
            C * lam,
        )

    def describe(pt):
        return {"lambda": pt[0], "x": pt[1], "alpha": pt[2]}

    rep = _grid_report("fourweight", params, pts, describe, primary, grid, {"alpha": alphas})
    rep_alt = _grid_report("fourweight", params, pts, describe, alt, grid)
    _cross_validate(rep, rep_alt, grid_pts)
    rep.values["c_min_alt"] = rep_alt.c_min
    return rep
