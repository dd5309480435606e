"""Empirical checks of the modular/gauge equivalences on step-function corpora,
and an exact audit of the factorial-scale counterexample."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import conditions as cond
from .errors import DivergentIntegral, NoFiniteGauge, RangeError
from .funcspace import PowerWeight, StepFunction, dilate, gauge, modular
from .grids import LogGrid
from .operators import (
    OutputSample,
    apply_operator,
    gauge_of_output,
    integral_I,
    modular_of_output,
    parse_operator,
)
from .quad import Rule
from .youngfn import YoungFunction, appendix2_young, chi, chi_integral_exact, factorial_scales

EPS_FAMILY = tuple(2.0**k for k in range(-3, 4))
COLLAPSE_TOL = 1e-6
WITNESS_STEPS = 11


@dataclass(frozen=True)
class Corpus:
    """Reproducible random step functions."""

    seed: int = 0
    count: int = 100
    max_pieces: int = 8
    support: tuple = (1e-3, 1e3)
    values: tuple = (0.0, 10.0)
    domain: str = "r+"

    def members(self) -> list[StepFunction]:
        rng = np.random.default_rng(self.seed)
        lo, hi = (math.log(x) for x in self.support)
        out = []
        for _ in range(self.count):
            n = int(rng.integers(1, self.max_pieces + 1))
            pts = np.sort(np.exp(rng.uniform(lo, hi, 2 * n)))
            vals = rng.uniform(*self.values, n)
            signs = rng.choice([-1.0, 1.0], n) if self.domain == "r" else np.ones(n)
            pieces = []
            for j in range(n):
                a, b = float(pts[2 * j]), float(pts[2 * j + 1])
                if not a < b:
                    continue
                if signs[j] < 0:
                    a, b = -b, -a
                pieces.append((a, b, float(vals[j])))
            out.append(StepFunction(tuple(pieces), self.domain))
        return out

    def describe(self):
        return {
            "seed": self.seed,
            "count": self.count,
            "max_pieces": self.max_pieces,
            "support": list(self.support),
            "values": list(self.values),
            "domain": self.domain,
        }


@dataclass
class EquivalenceReport:
    direction: str
    status: str
    worst_ratio: float | None = None
    constant: float | None = None
    corpus: dict = field(default_factory=dict)
    failing_member: list | None = None
    skipped: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "passes"

    def to_dict(self):
        return cond.jsonable(
            {
                "direction": self.direction,
                "status": self.status,
                "worst_ratio": self.worst_ratio,
                "constant": self.constant,
                "corpus": self.corpus,
                "failing_member": self.failing_member,
                "skipped": self.skipped,
                "details": self.details,
            }
        )


# ---------------------------------------------------------------- helpers


def smallest_increasing(fn, target, rtol=1e-9, hi_cap=1e12):
    """Smallest K > 0 with fn(K) >= target for nondecreasing fn: doubling, then bisection."""
    lo, hi = 0.0, 1.0
    while fn(hi) < target:
        lo, hi = hi, hi * 2.0
        if hi > hi_cap:
            return math.inf
    if lo == 0.0:
        lo = hi / 2.0
        while lo > 1e-300 and fn(lo) >= target:
            hi, lo = lo, lo / 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if fn(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _weight_domain(op):
    return "r" if parse_operator(op)[0] in ("M", "H") else "r+"


def _monotone_growth(ratios, steps=10):
    r = [x for x in ratios if math.isfinite(x)]
    if len(r) < steps + 1:
        return False
    tail = r[-(steps + 1) :]
    return all(b > a for a, b in zip(tail[:-1], tail[1:]))


def witness_family(op, Phi1, Phi2, gamma, steps=WITNESS_STEPS):
    """f_n = chi_(1/n, 1), n = 2^j, with the output modular taken over the window |x| < n.

    A finite modular constant would bound every ratio; steady growth as the
    support edge moves toward 0 shows that none exists.
    """
    dom = _weight_domain(op)
    w = PowerWeight(gamma, domain=dom)
    rows = []
    for j in range(1, steps + 1):
        n = 2.0**j
        f = StepFunction.indicator(1.0 / n, 1.0, domain=dom)
        window = (0.0, n) if dom == "r+" else (-n, n)
        lhs = modular_of_output(Phi1, apply_operator(op, f), w, window=window)
        rhs = modular(Phi2, f, w)
        rows.append({"n": n, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs})
    return rows


# ---------------------------------------------------------------- gauge versus modular


def verify_gauge_modular_equiv(
    Phi1: YoungFunction, Phi2: YoungFunction, op, gamma: float, corpus: Corpus
) -> EquivalenceReport:
    """Empirical K for the modular inequality, empirical C for the gauge
    inequality, and the eps-collapse of the gauge family by dilation."""
    if gamma == -1:
        raise ValueError("gamma = -1 is excluded")
    name = parse_operator(op)[0] if isinstance(op, str) else op[0]
    if name == "I":
        raise ValueError("I does not commute with dilations")
    dom = _weight_domain(op)
    w = PowerWeight(gamma, domain=dom)
    delta = 1.0 / (1.0 + gamma)
    K = 0.0
    C = 0.0
    worst_collapse = 0.0
    eps_ratio_max = 0.0
    skipped = []
    used = 0
    for i, f in enumerate(corpus.members()):
        if f.is_zero():
            skipped.append({"index": i, "reason": "zero"})
            continue
        try:
            sample = OutputSample(apply_operator(op, f), w)
            m1 = sample.modular(Phi1)
            Kf = smallest_increasing(lambda k: k * modular(Phi2, f, w, k), m1)
            g_out = gauge_of_output(Phi1, None, w, sample=sample).value
            g_in = gauge(Phi2, f, w).value
            ratios = []
            for eps in EPS_FAMILY:
                direct = gauge_of_output(Phi1, None, w, eps=eps, sample=sample).value
                fd = dilate(f, eps ** (-delta))
                via = gauge_of_output(Phi1, apply_operator(op, fd), w).value
                worst_collapse = max(worst_collapse, abs(direct - via) / max(abs(via), 1e-300))
                ratios.append(direct / gauge(Phi2, f, w, eps).value)
                # the dilated member belongs to the family the constant is taken over
                ratios.append(via / gauge(Phi2, fd, w).value)
        except (DivergentIntegral, NoFiniteGauge) as exc:
            skipped.append({"index": i, "reason": type(exc).__name__, "region": getattr(exc, "region", None)})
            continue
        used += 1
        K = max(K, Kf)
        C = max(C, g_out / g_in, *ratios)
        eps_ratio_max = max(eps_ratio_max, *ratios)
    details = {
        "operator": op if isinstance(op, str) else list(op),
        "phi1": Phi1.spec,
        "phi2": Phi2.spec,
        "gamma": gamma,
        "members_used": used,
        "K": K if used else None,
        "C": C if used else None,
        "eps_family": list(EPS_FAMILY),
        "collapse_deviation": worst_collapse,
        "eps_ratio_max": eps_ratio_max,
    }
    if used == 0:
        rows = witness_family(op, Phi1, Phi2, gamma)
        grows = _monotone_growth([r["ratio"] for r in rows])
        details["witness_family"] = rows
        status = "unbounded" if grows else "inconclusive"
        return EquivalenceReport("G<=>M", status, corpus=corpus.describe(), skipped=skipped, details=details)
    ok = worst_collapse <= COLLAPSE_TOL and eps_ratio_max <= C * (1 + COLLAPSE_TOL)
    return EquivalenceReport(
        "G<=>M",
        "passes" if ok else "fails",
        worst_ratio=C,
        constant=K,
        corpus=corpus.describe(),
        skipped=skipped,
        details=details,
    )


# ---------------------------------------------------------------- weak and strong type


class _WeightedIntegral:
    """x -> w(x) * (If)(x), exposed like an operator output."""

    domain = "r+"

    def __init__(self, f, w):
        self.If = integral_I(f)
        self.w = w
        self.breakpoints = self.If.breakpoints

    def __call__(self, x):
        return self.w(x) * self.If(x)


def _tail_modular(Y, lam, w, t, x0, x1=math.inf):
    """int_x0^x1 Phi(lam w(x)) t(x) dx."""
    if not x0 < x1:
        return 0.0
    rule = Rule(x0, x1, [])
    x = rule.nodes
    with np.errstate(over="ignore", divide="ignore"):
        vals = Y.Phi(lam * w(x)) * t(x)
    return rule.integrate_values(np.where(np.isnan(vals), np.inf, vals))


class _PieceModular:
    """K -> int Phi(K u g) v for a step function g, on a fixed node set."""

    def __init__(self, Y, g, u, v):
        self.Y = Y
        xs, ws, cs = [], [], []
        for a, b, c in g.pieces:
            rule = Rule(a, b, [])
            xs.append(rule.x)
            ws.append(rule.w)
            cs.append(np.full(rule.x.size, abs(c)))
        self.x = np.concatenate(xs) if xs else np.zeros(0)
        self.w = np.concatenate(ws) if ws else np.zeros(0)
        self.cu = (np.concatenate(cs) if cs else np.zeros(0)) * u(self.x)
        self.v = v(self.x)

    def __call__(self, K):
        return float(np.dot(self.w, self.Y.Phi(K * self.cu) * self.v))


def _level_point(If, lam):
    ls = If.level_set(lam)
    return None if ls is None else ls[0]


def verify_weak_strong(
    Phi1: YoungFunction,
    Phi2: YoungFunction,
    W: cond.FourWeights,
    corpus: Corpus,
    lambda_grid: LogGrid | None = None,
    depth: int = 40,
) -> EquivalenceReport:
    """Weak side <= strong side per member, and the dyadic decomposition bound.

    With x_k chosen so that If(x_k) = 2^k and I_k = [x_{k-1}, x_k):
      (1) strong <= sum_k int_{I_k} Phi1(2^k w) t           (If <= 2^k on I_k)
      (2) I_k lies inside {I(8 f_{k-1}) > 2^k}               (f_k = f on I_k)
      (3) strong <= int Phi2(8 K u f) v + lump                K = empirical weak constant
    Levels more than ``depth`` octaves below the top are merged into one lump.
    """
    lambda_grid = lambda_grid or LogGrid(25, 1e-3, 1e3)
    lams = lambda_grid.values()
    worst_weak = 0.0
    worst_dyadic = 0.0
    K = 0.0
    skipped = []
    rows = []
    failing = None
    for i, f in enumerate(corpus.members()):
        f = abs(f)
        if f.is_zero():
            rows.append({"index": i, "strong": 0.0, "weak": 0.0})
            continue
        try:
            row = _weak_strong_member(Phi1, Phi2, W, f, lams, depth)
        except DivergentIntegral as exc:
            skipped.append({"index": i, "reason": "DivergentIntegral", "region": exc.region})
            continue
        rows.append({"index": i, **row})
        K = max(K, row["K_weak"])
        if row["strong"] > 0:
            worst_weak = max(worst_weak, row["weak"] / row["strong"])
        if not (row["step1"] and row["step2"]) and failing is None:
            failing = f.to_json()
    # step (3) needs the corpus-wide weak constant, so it runs after the sweep
    step3_ok = True
    for i, f in enumerate(corpus.members()):
        r = next((r for r in rows if r.get("index") == i and "strong" in r and "lump" in r), None)
        if r is None:
            continue
        rhs = _PieceModular(Phi2, abs(f), W.u, W.v)(8.0 * K)
        ratio = r["strong"] / (rhs + r["lump"]) if rhs + r["lump"] > 0 else 0.0
        worst_dyadic = max(worst_dyadic, ratio)
        if ratio > 1 + 1e-9:
            step3_ok = False
            failing = failing or abs(f).to_json()
    ok = worst_weak <= 1 + 1e-9 and step3_ok and failing is None
    return EquivalenceReport(
        "WM<=>M",
        "passes" if ok else "fails",
        worst_ratio=worst_weak,
        constant=K,
        corpus=corpus.describe(),
        failing_member=failing,
        skipped=skipped,
        details={
            "phi1": Phi1.spec,
            "phi2": Phi2.spec,
            "weights": W.describe(),
            "lambda_grid": lambda_grid.describe(),
            "depth": depth,
            "worst_dyadic_ratio": worst_dyadic,
            "members": rows,
        },
    )


def _weak_strong_member(Phi1, Phi2, W, f, lams, depth):
    If = integral_I(f)
    mass = f.mass()
    strong = modular_of_output(Phi1, _WeightedIntegral(f, W.w), W.t)
    weak = 0.0
    for lam in lams:
        x = _level_point(If, lam)
        if x is not None:
            weak = max(weak, _tail_modular(Phi1, lam, W.w, W.t, x))
    # x_k with If(x_k) = 2^k for kmin <= k < ktop; x_ktop = inf
    ktop = math.ceil(math.log2(mass))
    kmin = ktop - depth
    xs = {k: _level_point(If, 2.0**k) for k in range(kmin, ktop)}
    xs[ktop] = math.inf
    start = _level_point(If, 0.0)  # If = 0 before this point

    def piece(k):
        # int over I_k = [x_{k-1}, x_k) of Phi1(2^k w) t
        return _tail_modular(Phi1, 2.0**k, W.w, W.t, xs[k - 1], xs[k])

    # levels too deep to carry an f_{k-1} are merged into one lump
    lump = _tail_modular(Phi1, 2.0**kmin, W.w, W.t, start, xs[kmin]) + piece(kmin + 1)
    dyadic = 0.0
    step2 = True
    Kw = 0.0
    for k in range(kmin + 2, ktop + 1):
        dyadic += piece(k)
        g = f.restrict(xs[k - 2], xs[k - 1]).scale(8.0)
        x_in = _level_point(integral_I(g), 2.0**k)
        step2 = step2 and x_in is not None and x_in <= xs[k - 1]
        lhs = _tail_modular(Phi1, 2.0**k, W.w, W.t, x_in) if x_in is not None else 0.0
        if lhs > 0:
            Kw = max(Kw, smallest_increasing(_PieceModular(Phi2, g, W.u, W.v), lhs))
    bound = lump + dyadic
    return {
        "strong": strong,
        "weak": weak,
        "dyadic_bound": bound,
        "lump": lump,
        "step1": bool(strong <= bound * (1 + 1e-9)),
        "step2": bool(step2),
        "K_weak": Kw,
    }


# ---------------------------------------------------------------- condition vs corpus


def _checker_for(op, Phi1, Phi2, p_or_q, gamma, grid):
    name = parse_operator(op)[0] if isinstance(op, str) else op[0]
    if name == "P":
        return cond.check_bk_Pp(Phi1, Phi2, p_or_q, gamma, grid)
    if name == "Q":
        return cond.check_bk_Qq(Phi1, Phi2, p_or_q, gamma, grid)
    if name == "M":
        return cond.check_maximal_condition(Phi1, gamma, grid)
    if name == "H":
        return cond.check_hilbert_condition(Phi1, gamma, grid)
    raise ValueError(f"no condition for operator {op!r}")


def verify_condition_predicts(
    op, Phi1: YoungFunction, Phi2: YoungFunction, p_or_q, gamma: float, corpus: Corpus, grid=None, slack=8.0
) -> EquivalenceReport:
    """If the checker says holds, the corpus must satisfy the modular inequality
    with K = slack * c_min; otherwise the witness family must show ratio growth."""
    if isinstance(op, str) and op in ("P", "Q"):
        op = f"{op}:{op.lower()}={p_or_q}"
    rep = _checker_for(op, Phi1, Phi2, p_or_q, gamma, grid)
    details = {"operator": op, "condition": rep.to_dict(), "slack_factor": slack}
    if rep.holds:
        K = slack * rep.c_min
        w = PowerWeight(gamma, domain=_weight_domain(op))
        worst = 0.0
        failing = None
        skipped = []
        for i, f in enumerate(corpus.members()):
            if f.is_zero():
                continue
            try:
                lhs = modular_of_output(Phi1, apply_operator(op, f), w)
            except DivergentIntegral as exc:
                failing = failing or f.to_json()
                skipped.append({"index": i, "reason": "DivergentIntegral", "region": exc.region})
                continue
            rhs = K * modular(Phi2, f, w, K)
            worst = max(worst, lhs / rhs)
            if lhs > rhs and failing is None:
                failing = f.to_json()
        details["K"] = K
        details["min_slack"] = (1.0 / worst) if worst > 0 else math.inf
        status = "passes" if failing is None else "fails"
        return EquivalenceReport(
            "condition<=>empirical",
            status,
            worst_ratio=worst,
            constant=K,
            corpus=corpus.describe(),
            failing_member=failing,
            skipped=skipped,
            details=details,
        )
    rows = witness_family(op, Phi1, Phi2, gamma)
    grows = _monotone_growth([r["ratio"] for r in rows])
    details["witness_family"] = rows
    return EquivalenceReport(
        "condition<=>empirical",
        "passes" if grows else "fails",
        worst_ratio=rows[-1]["ratio"],
        corpus=corpus.describe(),
        details=details,
    )


def hardy_l1_ratio_oracle(n: float) -> float:
    """Closed form of the windowed ratio for Phi = t, P_1 and f = chi_(1/n, 1)."""
    return ((1 - 1 / n) * (1 + math.log(n)) - math.log(n) / n) / (1 - 1 / n)


# ---------------------------------------------------------------- factorial-scale counterexample


def _chi_integral(t: float, kmax: int) -> float:
    if t <= 1.0:
        return t * (2.0 - math.log(t)) if t > 0 else 0.0
    return float(chi_integral_exact(Fraction(t), kmax))


def counterexample_report(gamma: float, kmax: int = 8, grid: LogGrid | None = None) -> dict:
    """Audit of the factorial-scale profile chi and the Young function built from it.

    (i)   (1/a_k) int_0^{a_k} chi > 2^-k = chi(a_k / k), with margin >= 0.1/(k+3)
    (ii)  (1/t) int_0^t chi <= 4 chi(t / 4^(1/gamma)) on a log grid
    (iii) (1/a_k) int_0^{a_k} chi <= 2 chi(a_k), checked exactly
    (iv)  A_phi fails and BK holds for the Young function with phi^-1(y) = chi(y^(-1/gamma))
    """
    if kmax > 14:
        raise RangeError("kmax > 14 leaves the exact factorial range")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    a = factorial_scales(kmax)
    clause1 = []
    clause3 = []
    for k in range(1, kmax + 1):
        mean = chi_integral_exact(a[k], kmax) / a[k]
        target = Fraction(1, 2**k)
        chi_at = Fraction(float(chi(a[k] / k, kmax))) if k > 1 else Fraction(1, 2)
        margin = mean / target - 1
        clause1.append(
            {
                "k": k,
                "a_k": a[k],
                "mean": mean,
                "chi_a_k_over_k": chi_at,
                "margin": margin,
                "ok": bool(mean > target and chi_at == target and margin >= Fraction(1, 10 * (k + 3))),
            }
        )
        clause3.append({"k": k, "mean": mean, "bound": 2 * target, "ok": bool(mean <= 2 * target)})
    grid = grid or LogGrid(121, 1e-3, float(a[kmax]))
    scale = 4.0 ** (1.0 / gamma)
    worst = 0.0
    ok2 = True
    for t in grid.values():
        t = float(t)
        lhs = _chi_integral(t, kmax) / t
        rhs = 4.0 * float(chi(t / scale, kmax))
        worst = max(worst, lhs / rhs)
        ok2 = ok2 and lhs <= rhs * (1 + 1e-12)
    Y = appendix2_young(gamma, kmax)
    aphi = cond.check_aphi_power(Y, gamma)
    bk = cond.check_bk_general(Y, PowerWeight(gamma, domain="r"))
    clauses = {
        "i": {"ok": all(r["ok"] for r in clause1), "rows": clause1},
        "ii": {"ok": ok2, "worst_ratio": worst, "grid": grid.describe()},
        "iii": {"ok": all(r["ok"] for r in clause3), "rows": clause3},
        "iv": {
            "ok": aphi.status == "fails" and bk.status == "holds",
            "aphi": aphi.status,
            "aphi_witness": aphi.witness,
            "bk": bk.status,
            "bk_c_min": bk.c_min,
        },
    }
    return {
        "gamma": gamma,
        "kmax": kmax,
        "scales": a,
        "passes": all(c["ok"] for c in clauses.values()),
        "clauses": _fractions_to_text(clauses),
    }


def _fractions_to_text(obj):
    if isinstance(obj, dict):
        return {k: _fractions_to_text(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_fractions_to_text(v) for v in obj]
    if isinstance(obj, Fraction):
        return {"exact": str(obj), "float": float(obj)}
    return obj
