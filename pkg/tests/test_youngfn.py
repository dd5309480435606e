import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import legendre
from orliczkit.errors import NotMonotone, NotYoung, ParseError
from orliczkit.grids import LogGrid
from orliczkit.youngfn import (
    appendix2_young,
    check_delta2,
    check_s_convex,
    chi,
    chi_integral_exact,
    complementary,
    eval_Phi,
    eval_phi_inv,
    factorial_scales,
    parse_young_spec,
)

FAMILY = [
    "power:r=1.5",
    "power:r=2",
    "power:r=3",
    "plog:r=2,a=1",
    "expm1",
    "pwl-density:(0,0);(1,1);(2,4)",
    "appendix2:gamma=1",
]
GRID = np.logspace(-3, 3, 61)


@pytest.fixture(scope="module", params=FAMILY)
def young(request):
    return parse_young_spec(request.param)


def test_power_closed_forms():
    Y = parse_young_spec("power:r=2")
    assert eval_Phi(Y, 2.0) == pytest.approx(2.0, rel=1e-15)
    assert eval_Phi(Y, 0.0) == 0.0
    assert Y.phi(3.0) == pytest.approx(3.0)
    assert eval_phi_inv(parse_young_spec("power:r=3"), 4.0) == pytest.approx(2.0, rel=1e-14)
    assert eval_phi_inv(Y, 0.0) == 0.0


def test_linear_density_is_general():
    Y = parse_young_spec("power:r=1")
    assert Y.kind == "general"
    assert eval_Phi(Y, 3.0) == pytest.approx(3.0)
    with pytest.raises(NotYoung):
        complementary(Y)
    with pytest.raises(NotYoung):
        parse_young_spec("power:r=1", kind="young")


def test_flat_density_inverse_takes_right_endpoint():
    Y = parse_young_spec("pwl-density:(0,0);(1,5);(2,5);(3,10)")
    assert eval_phi_inv(Y, 5.0) == pytest.approx(2.0)


@pytest.mark.parametrize("bad", ["power:r=-1", "foo", "plog:r=2", "power:r=", "appendix2:gamma=0"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_young_spec(bad)


def test_decreasing_density_rejected():
    with pytest.raises(NotMonotone):
        parse_young_spec("pwl-density:(0,2);(1,1)")


def test_power_conjugates():
    t = GRID
    Psi2 = parse_young_spec("power:r=2").complementary()
    np.testing.assert_allclose(Psi2.Phi(t), t**2 / 2, rtol=1e-13)
    Psi3 = parse_young_spec("power:r=3").complementary()
    np.testing.assert_allclose(Psi3.Phi(t), 2.0 / 3.0 * t**1.5, rtol=1e-13)


@pytest.mark.parametrize("spec", ["power:r=1.5", "power:r=2", "power:r=3", "plog:r=2,a=1", "expm1"])
def test_conjugate_matches_legendre_oracle(spec):
    Y = parse_young_spec(spec)
    t = np.logspace(-3, 3, 31)
    np.testing.assert_allclose(Y.complementary().Phi(t), legendre(Y.Phi, t), rtol=1e-6)


def test_double_conjugate_is_identity(young):
    back = young.complementary().complementary()
    t = GRID[GRID < 50]
    np.testing.assert_allclose(back.Phi(t), young.Phi(t), rtol=1e-9)


def test_sandwich(young):
    t = GRID
    psi = young.complementary()
    lo = (t / 2) * young.phi_inv(t / 2)
    hi = t * young.phi_inv(t)
    P = psi.Phi(t)
    assert np.all(lo <= P * (1 + 1e-12))
    assert np.all(P <= hi * (1 + 1e-12))


def test_phi_of_psi_ratio(young):
    t = GRID
    P = young.complementary().Phi(t)
    assert np.all(young.Phi(P / t) <= P * (1 + 1e-12))


def test_young_inequality_equality_case(young):
    x = np.logspace(-2, 1.2, 25)
    y = young.phi(x)
    lhs = x * y
    rhs = young.Phi(x) + young.complementary().Phi(y)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    spec=st.sampled_from(FAMILY[:5]),
    x=st.floats(1e-3, 1e2),
    y=st.floats(1e-3, 1e2),
)
def test_young_inequality(spec, x, y):
    Y = parse_young_spec(spec)
    assert x * y <= Y.Phi(x) + Y.complementary().Phi(y) + 1e-12 * (1 + x * y)


@settings(max_examples=40, deadline=None)
@given(spec=st.sampled_from(FAMILY), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_monotone_Phi_and_inverse(spec, a, b):
    Y = parse_young_spec(spec)
    t1, t2 = sorted((10.0**a, 10.0**b))
    assert Y.Phi(t1) <= Y.Phi(t2)
    assert Y.phi_inv(t1) <= Y.phi_inv(t2)


def test_delta2_examples():
    r2 = check_delta2(parse_young_spec("power:r=2"))
    assert r2.status == "holds" and r2.c_min == pytest.approx(4.0, rel=1e-12)
    r1 = check_delta2(parse_young_spec("power:r=1"))
    assert r1.status == "holds" and r1.c_min == pytest.approx(2.0, rel=1e-12)
    e = check_delta2(parse_young_spec("expm1"))
    assert e.status == "fails"
    Y = parse_young_spec("expm1")
    assert Y.Phi(2 * e.witness_t) / Y.Phi(e.witness_t) > e.threshold


def test_delta2_holds_means_bound_on_grid(young):
    grid = LogGrid(81, 1e-4, 1e4)
    rep = check_delta2(young, grid)
    if rep.status == "holds":
        t = grid.values()
        assert np.all(young.Phi(2 * t) <= rep.c_min * young.Phi(t) * (1 + 1e-12))


def test_s_convexity():
    assert check_s_convex(parse_young_spec("power:r=2"), 1.0).status == "holds"
    assert check_s_convex(parse_young_spec("power:r=0.5"), 0.5).status == "holds"
    # a^s + b^s = 1 forces a + b <= 1, so convex Phi with Phi(0) = 0 is s-convex for every s
    assert check_s_convex(parse_young_spec("power:r=3"), 0.25).status == "holds"
    # concave t^(1/2) is strictly below its chords, so it is not 1-convex
    rep = check_s_convex(parse_young_spec("power:r=0.5"), 1.0)
    assert rep.status == "fails" and rep.worst_slack < 0


def test_s_convex_equality_at_diagonal():
    rep = check_s_convex(parse_young_spec("power:r=2"), 1.0, samples=[(0.5, 2.0, 2.0)])
    assert rep.worst_slack >= 0


# ---------------------------------------------------------------- appendix2


def test_chi_values():
    assert chi(1.0) == pytest.approx(1.0)
    assert chi(24.0) == pytest.approx(0.5)
    assert chi(np.e**-1) == pytest.approx(2.0)


def test_chi_integral_exact():
    assert chi_integral_exact(24) == Fraction(55, 4)
    assert chi_integral_exact(1) == 2
    assert chi_integral_exact(24) / 24 == Fraction(55, 96)


def test_chi_integral_matches_quadrature():
    from scipy.integrate import quad

    for t in (3, 25, 121, 700):
        pts = [1.0] + [a + d for a in factorial_scales(4) for d in (0, 1)]
        num = quad(lambda s: float(chi(s)), 0, t, points=[p for p in pts if p < t], limit=400)[0]
        assert float(chi_integral_exact(t)) == pytest.approx(num, rel=1e-8)


def test_appendix2_is_chi_in_disguise():
    Y = parse_young_spec("appendix2:gamma=1")
    assert Y.phi(1.0) == pytest.approx(1.0)
    s = np.concatenate([np.logspace(-3, 6, 400), np.array(factorial_scales(8)[1:]) + 0.5])
    np.testing.assert_allclose(Y.phi_inv(1.0 / s), chi(s), rtol=1e-9)


@pytest.mark.parametrize("gamma", [0.5, 2.0, 3.0])
def test_appendix2_other_gammas_build(gamma):
    Y = appendix2_young(gamma, 14)
    s = np.logspace(-2, 5, 200)
    np.testing.assert_allclose(Y.phi_inv(s ** (-gamma)), chi(s), rtol=1e-6)


def test_appendix2_delta2_split():
    Y = parse_young_spec("appendix2:gamma=1")
    assert check_delta2(Y.complementary()).status == "holds"


def test_appendix2_kmax_limit():
    with pytest.raises(ParseError):
        appendix2_young(1.0, 15)
    assert math.isclose(factorial_scales(14)[-1], math.factorial(17))


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_appendix2_Phi_overflows_to_inf(gamma):
    Y = parse_young_spec(f"appendix2:gamma={gamma}")
    t = np.array([1.0, 100.0, 700.0, 710.0, 1e3, 1e6])
    P = Y.Phi(t)
    assert not np.isnan(P).any()
    assert np.all(P[1:] >= P[:-1]) and P[-1] == np.inf
