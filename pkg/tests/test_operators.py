import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from oracles import hilbert_indicator, maximal_indicator_01, quad_modular
from orliczkit.errors import DivergentIntegral, NoFiniteGauge, ParseError, UnsupportedOperator
from orliczkit.funcspace import PowerWeight, StepFunction
from orliczkit.operators import (
    apply_operator,
    check_dilation_commute,
    gauge_of_output,
    hardy_P,
    hardy_Q,
    hilbert,
    integral_I,
    maximal,
    modular_of_output,
    parse_operator,
)
from orliczkit.youngfn import parse_young_spec

UNIT = StepFunction.indicator(0.0, 1.0)
SYM = StepFunction.indicator(-1.0, 1.0, domain="r")
LINE_UNIT = StepFunction.indicator(0.0, 1.0, domain="r")
PROBES = np.concatenate([np.logspace(-2, 2, 25), [0.3, 0.7, 1.5, 3.0]])


@st.composite
def step_functions(draw, domain="r+"):
    n = draw(st.integers(1, 4))
    lo = -1e2 if domain == "r" else 1e-2
    pts = sorted(draw(st.lists(st.floats(lo, 1e2), min_size=2 * n, max_size=2 * n, unique=True)))
    vals = draw(st.lists(st.floats(0.1, 10.0), min_size=n, max_size=n))
    pieces = tuple((pts[2 * i], pts[2 * i + 1], vals[i]) for i in range(n) if pts[2 * i + 1] - pts[2 * i] > 1e-6)
    return StepFunction(pieces or ((1.0, 2.0, 1.0),), domain)


def test_parse_operator():
    assert parse_operator("P:p=1") == ("P", 1.0)
    assert parse_operator("Q:q=1/2") == ("Q", 0.5)
    assert parse_operator("H") == ("H", None)
    for bad in ("P", "X", "P:p=", "M:p=1"):
        with pytest.raises(ParseError):
            parse_operator(bad)


def test_hardy_P_examples():
    g = hardy_P(1.0, UNIT)
    assert g(np.array([2.0, 0.5])) == pytest.approx([0.5, 1.0], abs=1e-15)
    assert hardy_P(2.0, UNIT)(np.array([4.0]))[0] == pytest.approx(1.0, abs=1e-15)
    assert hardy_P(1.0, StepFunction())(np.array([1.0]))[0] == 0.0
    np.testing.assert_allclose(g(PROBES), np.minimum(PROBES, 1.0) / PROBES, atol=1e-12)


def test_hardy_P_divergent_kernel():
    with pytest.raises(DivergentIntegral):
        hardy_P(-1.0, UNIT)
    # support away from 0 is fine for negative p
    f = StepFunction.indicator(1.0, 2.0)
    t = 3.0
    assert hardy_P(-1.0, f)(np.array([t]))[0] == pytest.approx(t * quad(lambda s: s**-2, 1, 2)[0])


def test_hardy_Q_examples():
    g = hardy_Q(1.0, UNIT)
    assert g(np.array([0.5]))[0] == pytest.approx(1.0)
    assert np.all(g(np.array([1.0, 2.0, 5.0])) == 0.0)
    assert hardy_Q(2.0, StepFunction.indicator(1.0, 4.0))(np.array([1.0]))[0] == pytest.approx(2.0)
    inside = PROBES[PROBES < 1]
    np.testing.assert_allclose(g(inside), (1 - inside) / inside, rtol=1e-12)


def test_integral_examples():
    g = integral_I(UNIT)
    assert g(np.array([3.0, 0.5])) == pytest.approx([1.0, 0.5])
    assert integral_I(UNIT.scale(2.0)).level_set(1.0) == (0.5, math.inf)
    assert g.level_set(1.0) is None


def test_maximal_examples():
    m = maximal(LINE_UNIT)
    assert m(np.array([2.0, 0.5, -1.0])) == pytest.approx([0.5, 1.0, 0.5], abs=1e-15)
    x = np.concatenate([-PROBES, PROBES])
    x = x[np.abs(np.abs(x) - 1) > 1e-9]
    np.testing.assert_allclose(m(x), maximal_indicator_01(x), rtol=1e-12)
    assert maximal(StepFunction(domain="r"))(np.array([1.0]))[0] == 0.0


def test_hilbert_examples():
    h = hilbert(SYM)
    assert h(np.array([2.0]))[0] == pytest.approx(math.log(3) / math.pi, abs=1e-14)
    x = np.concatenate([-PROBES, PROBES])
    x = x[np.abs(np.abs(x) - 1) > 1e-9]
    np.testing.assert_allclose(h(x), hilbert_indicator(-1, 1, x), atol=1e-12)
    assert hilbert(StepFunction(domain="r"))(np.array([1.0]))[0] == 0.0


def test_hilbert_antisymmetry():
    a, b = 0.5, 2.0
    x = np.array([-3.0, -1.0, 0.1, 1.0, 4.0])
    lhs = hilbert(StepFunction.indicator(-b, -a, domain="r"))(-x)
    rhs = -hilbert(StepFunction.indicator(a, b, domain="r"))(x)
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_hilbert_lower_bound_left_of_ball():
    # for f = chi_B with B = (x - r, x + r) and y left of B: -Hf(y) >= (1/pi) r / |x - y|
    x, r = 0.0, 0.25
    h = hilbert(StepFunction.indicator(x - r, x + r, domain="r"))
    ys = x - r - np.logspace(-3, 2, 30)
    assert np.all(-h(ys) >= r / np.abs(x - ys) / math.pi)


def test_maximal_dominates_averages():
    f = StepFunction(((-2.0, -1.0, 3.0), (0.5, 1.5, 1.0), (2.0, 5.0, 2.0)), "r")
    m = maximal(f)
    x = np.linspace(-4, 6, 101)
    x = x[~np.isin(x, f.breakpoints)]
    assert np.all(m(x) >= np.abs(f(x)) - 1e-15)
    # the average over [-3, 1] contains 0 and 0.5
    avg = (3.0 + 0.5) / 4.0
    assert np.all(m(np.array([0.0, 0.5])) >= avg - 1e-15)


@pytest.mark.parametrize("op", ["P:p=1", "P:p=3", "Q:q=2", "M", "H"])
@pytest.mark.parametrize("lam", [1 / 3, 0.5, 2.0, 5.0])
def test_dilation_commutation(op, lam):
    dom = "r" if op in ("M", "H") else "r+"
    f = StepFunction(((0.2, 0.9, 1.5), (1.3, 4.0, 0.5)), dom)
    assert check_dilation_commute(op, f, lam) <= 1e-10


def test_identity_dilation_is_exact():
    assert check_dilation_commute("M", LINE_UNIT, 1.0) == 0.0


def test_integral_not_dilation_commuting():
    with pytest.raises(UnsupportedOperator):
        check_dilation_commute("I", UNIT, 2.0)


@settings(max_examples=25, deadline=None)
@given(f=step_functions(), lam=st.floats(0.1, 10.0), op=st.sampled_from(["P:p=1", "P:p=2", "Q:q=1", "Q:q=3"]))
def test_dilation_commutation_random(f, lam, op):
    assert check_dilation_commute(op, f, lam) <= 1e-10 * (1 + max(c for _, _, c in f.pieces))


@settings(max_examples=25, deadline=None)
@given(f=step_functions("r"), lam=st.floats(0.1, 10.0), op=st.sampled_from(["M", "H"]))
def test_dilation_commutation_random_line(f, lam, op):
    assert check_dilation_commute(op, f, lam) <= 1e-9 * (1 + max(c for _, _, c in f.pieces))


@settings(max_examples=25, deadline=None)
@given(f=step_functions("r"), c=st.floats(-5.0, 5.0), op=st.sampled_from(["M", "H"]))
def test_homogeneity(f, c, op):
    x = np.linspace(-150, 150, 37) + 0.123
    base = np.abs(apply_operator(op, f)(x))
    scaled = np.abs(apply_operator(op, f.scale(c))(x))
    np.testing.assert_allclose(scaled, abs(c) * base, rtol=1e-12, atol=1e-300)


def test_homogeneity_hardy():
    f = StepFunction(((0.2, 0.9, 1.5), (1.3, 4.0, 0.5)))
    for op in ("P:p=1", "Q:q=2"):
        np.testing.assert_allclose(
            np.abs(apply_operator(op, f.scale(-3.0))(PROBES)), 3.0 * np.abs(apply_operator(op, f)(PROBES)), rtol=1e-12
        )


def test_q_p_fubini_identity():
    q, gamma = 2.0, 0.5
    f = StepFunction(((0.5, 1.0, 2.0), (2.0, 3.0, 1.0)))
    g = StepFunction(((0.2, 1.5, 1.0), (2.5, 4.0, 3.0)))
    Qf = hardy_Q(q, f)
    lhs = sum(c * quad(lambda t: float(Qf(np.array([t]))[0]) * t**gamma, a, b)[0] for a, b, c in g.pieces)

    def inner(s):
        return sum(c * quad(lambda t: t ** (gamma - 1 / q), a, min(b, s))[0] for a, b, c in g.pieces if a < s)

    rhs = sum(c * quad(lambda s: s ** (1 / q - 1) * inner(s), a, b)[0] for a, b, c in f.pieces)
    assert lhs == pytest.approx(rhs, rel=1e-9)


# ---------------------------------------------------------------- modulars of outputs


def test_hilbert_modular_matches_qags():
    Y = parse_young_spec("power:r=2")
    h = hilbert(SYM)
    w = PowerWeight(0.0, domain="r")
    ours = modular_of_output(Y, h, w, window=(-20.0, 20.0))
    ref = quad_modular(Y.Phi, h, w, -20.0, 20.0, singular=(-1.0, 1.0))
    assert ours == pytest.approx(ref, rel=1e-5)


def test_hilbert_modular_whole_line():
    # ||H chi||_2^2 = ||chi||_2^2 = 2, so the modular of t^2/2 is 1
    Y = parse_young_spec("power:r=2")
    assert modular_of_output(Y, hilbert(SYM), PowerWeight(0.0, domain="r")) == pytest.approx(1.0, rel=1e-8)


def test_hardy_modular_closed_form():
    # int (P_1 chi)^2 / 2 = 1/2 + 1/2 = 1
    Y = parse_young_spec("power:r=2")
    assert modular_of_output(Y, hardy_P(1.0, UNIT), PowerWeight(0.0)) == pytest.approx(1.0, rel=1e-10)


def test_harmonic_tail_diverges():
    with pytest.raises(DivergentIntegral) as exc:
        modular_of_output(parse_young_spec("power:r=1"), hardy_P(1.0, UNIT), PowerWeight(0.0))
    assert exc.value.region == "tail"
    with pytest.raises(NoFiniteGauge):
        gauge_of_output(parse_young_spec("power:r=1"), hardy_P(1.0, UNIT), PowerWeight(0.0))


def test_zero_output_modular():
    Y = parse_young_spec("power:r=2")
    assert modular_of_output(Y, hardy_P(1.0, StepFunction()), PowerWeight(0.0)) == 0.0
