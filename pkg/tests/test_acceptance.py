"""Acceptance criteria 1-10.

Each criterion is a plain function returning (ok, detail).  Under pytest every
criterion prints one ``criterion N: PASS|FAIL`` line and then asserts;
``python tests/test_acceptance.py`` prints the ten lines without pytest.
"""

import json
import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import hilbert_indicator, legendre, maximal_indicator_01  # noqa: E402
from orliczkit.conditions import (  # noqa: E402
    FourWeights,
    check_aphi_power,
    check_bk_general,
    check_bk_Pp,
    check_bk_Qq,
    check_fourweight_condition,
    check_maximal_condition,
    dual_exponent,
)
from orliczkit.errors import DivergentIntegral  # noqa: E402
from orliczkit.funcspace import PowerWeight, StepFunction, dilate, gauge  # noqa: E402
from orliczkit.grids import LogGrid  # noqa: E402
from orliczkit.operators import check_dilation_commute, hardy_P, hardy_Q, hilbert, maximal  # noqa: E402
from orliczkit.verify import (  # noqa: E402
    Corpus,
    counterexample_report,
    verify_condition_predicts,
    verify_weak_strong,
    witness_family,
)
from orliczkit.youngfn import parse_young_spec  # noqa: E402


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def criterion_1():
    with Timer() as tm:
        t = np.logspace(-3, 3, 25)
        grid = np.logspace(-3, 3, 241)
        worst = 0.0
        sandwich = True
        for spec in ("power:r=1.5", "power:r=2", "power:r=3", "plog:r=2,a=1"):
            Y = parse_young_spec(spec)
            Psi = Y.complementary()
            ref = legendre(Y.Phi, t)
            worst = max(worst, float(np.max(np.abs(Psi.Phi(t) / ref - 1))))
            P = Psi.Phi(grid)
            sandwich &= bool(np.all((grid / 2) * Y.phi_inv(grid / 2) <= P) and np.all(P <= grid * Y.phi_inv(grid)))
    ok = worst <= 1e-6 and sandwich and tm.elapsed < 5
    return ok, f"legendre rel err {worst:.1e}, sandwich {sandwich}, {tm.elapsed:.1f}s"


def criterion_2():
    LIN, SQ = parse_young_spec("power:r=1"), parse_young_spec("power:r=2")
    with Timer() as tm:
        members = Corpus(seed=11, count=200).members()
        props = True
        for gamma in (-0.5, 0.0, 1.0):
            w = PowerWeight(gamma)
            for f, g in zip(members[::2], members[1::2]):
                rf, rg = gauge(SQ, f, w).value, gauge(SQ, g, w).value
                props &= rf > 0 and gauge(SQ, f.scale(-1.0), w).value == pytest.approx(rf, rel=1e-12)
                props &= gauge(SQ, f.scale(0.5), w).value <= rf * (1 + 1e-12)
                props &= gauge(SQ, f + g, w).value <= (rf + rg) * (1 + 1e-9)
                cuts = [gauge(SQ, f.restrict(0.0, n), w).value for n in (1e-2, 1.0, 10.0, 1e3)]
                props &= all(a <= b * (1 + 1e-12) for a, b in zip(cuts, cuts[1:]))
                props &= math.isfinite(gauge(SQ, StepFunction.indicator(*f.pieces[0][:2]), w).value)
        example = gauge(LIN, StepFunction.indicator(0.0, 1.0), PowerWeight(1.0)).value
        collapse = 0.0
        for gamma in (-0.5, 0.0, 1.0, 2.0):
            w = PowerWeight(gamma)
            delta = 1.0 / (1.0 + gamma)
            for eps in (1 / 8, 1 / 4, 1 / 2, 1.0, 2.0, 4.0, 8.0):
                for f in members[:10]:
                    for Y in (SQ, LIN):
                        d = gauge(Y, f, w, eps).value
                        m = gauge(Y, dilate(f, eps**-delta), w).value
                        collapse = max(collapse, abs(d - m) / (1 + d))
    ok = props and abs(example - 2**-0.5) <= 1e-9 and collapse <= 1e-9 and tm.elapsed < 30
    return ok, f"properties {props}, gauge err {abs(example - 2**-0.5):.1e}, collapse {collapse:.1e}, {tm.elapsed:.1f}s"


def criterion_3():
    unit = StepFunction.indicator(0.0, 1.0)
    x = np.concatenate([np.logspace(-2, 2, 46), [0.3, 0.7, 1.5, 3.0]])
    xl = np.concatenate([-x[::2], x[1::2]])
    xl = xl[np.abs(np.abs(xl) - 1) > 1e-9]
    errs = {
        "P": np.max(np.abs(hardy_P(1.0, unit)(x) - np.minimum(x, 1.0) / x)),
        "Q": np.max(np.abs(hardy_Q(1.0, unit)(x) - np.where(x < 1, (1 - x) / x, 0.0))),
        "M": np.max(np.abs(maximal(StepFunction.indicator(0.0, 1.0, domain="r"))(xl) - maximal_indicator_01(xl))),
        "H": np.max(np.abs(hilbert(StepFunction.indicator(-1.0, 1.0, domain="r"))(xl) - hilbert_indicator(-1, 1, xl))),
    }
    dil = 0.0
    for op in ("P:p=1", "Q:q=1", "M", "H"):
        dom = "r" if op in ("M", "H") else "r+"
        f = StepFunction(((0.2, 0.9, 1.5), (1.3, 4.0, 0.5)), dom)
        for lam in (1 / 3, 2.0, 5.0):
            dil = max(dil, check_dilation_commute(op, f, lam))
    worst = max(errs.values())
    ok = worst <= 1e-10 and dil <= 1e-10 and x.size == 50 and xl.size == 50
    return ok, f"closed-form err {worst:.1e}, dilation dev {dil:.1e}"


def criterion_4():
    R1, R2 = parse_young_spec("power:r=1"), parse_young_spec("power:r=2")
    with Timer() as tm:
        sq = check_bk_Pp(R2, R2, 1.0, 0.0)
        pred = verify_condition_predicts("P", R2, R2, 1.0, 0.0, Corpus(seed=0, count=100))
        lin = check_bk_Pp(R1, R1, 1.0, 0.0)
        ratios = [r["ratio"] for r in witness_family("P:p=1", R1, R1, 0.0)]
        grows = len(ratios) >= 11 and all(b > a for a, b in zip(ratios[-11:-1], ratios[-10:]))
    ok = (
        sq.status == "holds"
        and math.isfinite(sq.c_min)
        and pred.status == "passes"
        and pred.constant == pytest.approx(8 * sq.c_min)
        and lin.status == "divergent"
        and grows
        and tm.elapsed < 60
    )
    return ok, f"c_min {sq.c_min:.6g}, predicts {pred.status}, r=1 {lin.status}, growth {grows}, {tm.elapsed:.1f}s"


def criterion_5():
    R2 = parse_young_spec("power:r=2")
    below = {g: check_maximal_condition(R2, g).status for g in (0.0, 0.5, 0.9)}
    above = {g: check_maximal_condition(R2, g).status for g in (1.0, 1.5)}
    ok = all(s == "holds" for s in below.values()) and all(s in ("fails", "divergent") for s in above.values())
    return ok, f"{below} {above}"


def criterion_6():
    rng = np.random.default_rng(6)
    specs = ["power:r=1.5", "power:r=2", "power:r=3", "plog:r=2,a=1"]
    grid = LogGrid(61, 1e-4, 1e4)
    agree = 0
    tuples = 0
    while tuples < 20:
        s1, s2 = rng.choice(specs, 2)
        q = float(rng.choice([-2.0, -1.0, 2.0, 3.0, 4.0]))
        gamma = float(rng.choice([-0.25, 0.0, 0.25, 0.5]))
        if abs(1 - 1 / q + gamma) < 1e-12:
            continue
        tuples += 1
        Y1, Y2 = parse_young_spec(s1), parse_young_spec(s2)
        r = dual_exponent(q, gamma)
        a = check_bk_Qq(Y1, Y2, q, gamma, grid)
        b = check_bk_Pp(Y2.complementary(), Y1.complementary(), r, gamma, grid)
        agree += a.status == b.status
    return agree == 20, f"{agree}/20 verdicts agree"


def criterion_7():
    with Timer() as tm:
        rep = counterexample_report(1.0, 8)
        mean = Fraction(rep["clauses"]["i"]["rows"][0]["mean"]["exact"])
        aphi = check_aphi_power(parse_young_spec("appendix2:gamma=1"), 1.0).status
        bk = check_bk_general(parse_young_spec("appendix2:gamma=1"), PowerWeight(1.0, domain="r")).status
    ok = rep["passes"] and mean == Fraction(55, 96) and mean > Fraction(1, 2) and aphi == "fails"
    ok = ok and bk == "holds" and tm.elapsed < 10
    return ok, f"clauses {rep['passes']}, mean {mean}, A_phi {aphi}, BK {bk}, {tm.elapsed:.1f}s"


def criterion_8():
    R2 = parse_young_spec("power:r=2")
    W = FourWeights(*(PowerWeight(g) for g in (0.0, 0.0, 0.0, -1.0)))
    rep = verify_weak_strong(R2, R2, W, Corpus(seed=0, count=100))
    fw_ok = True
    for gamma in (0.0, 0.5):
        y = PowerWeight(gamma)
        fw = check_fourweight_condition(R2, R2, FourWeights(y, PowerWeight(0.0), y, PowerWeight(-1.0)))
        fw_ok &= fw.status == "holds" and fw.values["forms_agree"] is True
    ok = rep.status == "passes" and fw_ok
    return ok, f"weak/strong {rep.status} (worst {rep.worst_ratio:.3g}), fourweight forms agree {fw_ok}"


C9_FAMILY = [
    "power:r=1.5",
    "power:r=2",
    "power:r=3",
    "plog:r=2,a=1",
    "expm1",
    "pwl-density:(0,0);(1,1);(2,4)",
    "appendix2:gamma=1",
]


def criterion_9():
    counter = []
    holds = 0
    for gamma in (0.25, 0.5, 1.0, 2.0):
        specs = C9_FAMILY + ([f"appendix2:gamma={gamma}"] if gamma != 1.0 else [])
        for spec in specs:
            Y = parse_young_spec(spec)
            if check_aphi_power(Y, gamma).status != "holds":
                continue
            holds += 1
            if check_bk_general(Y, PowerWeight(gamma, domain="r")).status != "holds":
                counter.append((spec, gamma))
    return not counter and holds > 0, f"{holds} A_phi instances hold, counterexamples {counter}"


def criterion_10():
    base = [sys.executable, "-m", "orliczkit.cli"]
    runs = [
        ["verify", "predicts", "--op", "P", "--exponent", "1", "--phi1", "power:r=2", "--phi2", "power:r=2",
         "--gamma", "0", "--seed", "7", "--count", "30"],
        ["check", "bk-p", "--phi1", "power:r=2", "--phi2", "power:r=2", "--p", "1", "--gamma", "0"],
    ]
    same = True
    for args in runs:
        outs = [subprocess.run(base + args + ["--threads", n], capture_output=True, check=False).stdout
                for n in ("1", "4", "1")]
        same &= outs[0] == outs[1] == outs[2] and bool(json.loads(outs[0]))
    return same, "serial and 4-thread JSON byte-identical" if same else "outputs differ"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    try:
        ok, detail = CRITERIA[n - 1]()
    except (DivergentIntegral, ArithmeticError, ValueError) as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    bad = 0
    for n, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        bad += not ok
        print(_line(n, ok, detail), flush=True)
    sys.exit(1 if bad else 0)
