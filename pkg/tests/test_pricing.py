import math
from datetime import date

import pytest
from scipy.optimize import bisect

from multicurve.curve import Curve, fra_rate
from multicurve.errors import ContextError, DomainError
from multicurve.pricing import (CapFloorSpec, Methodology, MethodologyContext, annuity,
                                basis_swap_npv, basis_swap_spread, black_cap_floor, black_caplet,
                                cap_schedule, caplet_values, floating_leg_pv, fra_value,
                                make_swap, ois_par_rate, par_rate, swap_npv)
from multicurve.temporal import DayCount, add_tenor, generate_schedule, year_fraction

REF = date(2010, 3, 31)


# (F, K, T, r, sigma, omega, expected, atol); published Black-76 reference prices
BLACK_REFERENCES = [
    (620.0, 600.0, 0.5, 0.05, 0.20, 1, 44.19, 1e-2),
    (20.0, 20.0, 4.0 / 12.0, 0.09, 0.25, 1, 1.1166, 1e-4),
    (20.0, 20.0, 4.0 / 12.0, 0.09, 0.25, -1, 1.1166, 1e-4),
    (100.0, 100.0, 0.5, 0.02, 0.20, 1, 5.581106724604812, 1e-10),
]


@pytest.mark.parametrize("F,K,T,r,sigma,omega,expected,atol", BLACK_REFERENCES)
def test_black_caplet_reference_prices(F, K, T, r, sigma, omega, expected, atol):
    value = black_caplet(F, K, T, sigma, math.exp(-r * T), 1.0, omega)
    assert value == pytest.approx(expected, abs=atol)


def test_black_caplet_limits():
    assert black_caplet(0.03, 0.02, 0.0, 0.2, 0.9, 0.5) == pytest.approx(0.9 * 0.5 * 0.01)
    assert black_caplet(0.03, 0.5, 5.0, 0.05, 1.0, 0.5) < 1e-30
    with pytest.raises(DomainError):
        black_caplet(-0.01, 0.02, 1.0, 0.2, 1.0, 0.5)
    with pytest.raises(DomainError):
        black_caplet(0.01, 0.02, 1.0, 0.0, 1.0, 0.5)


def test_single_context_requires_one_curve(flat_curve):
    other = Curve.flat(REF, 0.02)
    with pytest.raises(ContextError):
        MethodologyContext(flat_curve, other, Methodology.SINGLE)
    assert MethodologyContext.single(flat_curve).method is Methodology.SINGLE


def test_fra_value_sign_and_size():
    c = Curve.flat(REF, 0.03)
    ctx = MethodologyContext.single(c)
    t1, t2 = date(2011, 3, 31), date(2011, 9, 30)
    f = fra_rate(c, t1, t2)
    assert fra_value(ctx, t1, t2, f) == pytest.approx(0.0, abs=1e-17)
    tau = year_fraction(DayCount.ACT_360, t1, t2)
    assert fra_value(ctx, t1, t2, f - 0.01) == pytest.approx(c.discount_factor(t2) * 0.01 * tau, rel=1e-12)


def test_single_curve_floating_leg_telescopes():
    c = Curve.flat(REF, 0.025, horizon_years=35)
    s = generate_schedule(date(2011, 3, 31), date(2031, 3, 31), 6)
    pv = floating_leg_pv(MethodologyContext.single(c), s)
    assert pv == pytest.approx(c.discount_factor(s.start) - c.discount_factor(s.maturity), rel=1e-12)


def test_par_rate_zeroes_npv():
    disc = Curve.flat(REF, 0.01, horizon_years=15)
    fwd = Curve.flat(REF, 0.016, horizon_years=15, role="forwarding", tenor="6M")
    ctx = MethodologyContext(disc, fwd)
    swap = make_swap(date(2012, 3, 31), date(2020, 3, 31))
    k = par_rate(ctx, swap)
    assert swap_npv(ctx, swap.with_rate(k)) == pytest.approx(0.0, abs=1e-15)
    assert swap_npv(ctx, swap.with_rate(k - 0.001)) > 0.0
    expected = 0.001 * annuity(disc, swap.fixed)
    assert swap_npv(ctx, swap.with_rate(k - 0.001)) == pytest.approx(expected, rel=1e-10)


def test_ois_par_rate_single_period():
    c = Curve.flat(REF, 0.005)
    s = generate_schedule(REF, date(2011, 3, 31), 12)
    tau = s.accruals[0]
    expected = (1.0 / c.discount_factor(s.maturity) - 1.0) / tau
    assert ois_par_rate(c, s) == pytest.approx(expected, rel=1e-13)


def test_basis_spread_zero_for_one_curve(flat_curve, ref):
    ctx = MethodologyContext.single(flat_curve)
    sx = generate_schedule(ref, add_tenor(ref, "10Y"), 3)
    sy = generate_schedule(ref, add_tenor(ref, "10Y"), 6)
    assert abs(basis_swap_spread(ctx, ctx, sx, sy)) < 1e-14


def test_basis_spread_zeroes_npv():
    disc = Curve.flat(REF, 0.01)
    c3 = Curve.flat(REF, 0.012, role="forwarding", tenor="3M")
    c6 = Curve.flat(REF, 0.014, role="forwarding", tenor="6M")
    x, y = MethodologyContext(disc, c3), MethodologyContext(disc, c6)
    sx = generate_schedule(REF, date(2015, 3, 31), 3)
    sy = generate_schedule(REF, date(2015, 3, 31), 6)
    z = basis_swap_spread(x, y, sx, sy)
    assert z > 0.0
    assert basis_swap_npv(x, y, sx, sy, z) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ContextError):
        basis_swap_spread(x, MethodologyContext(Curve.flat(REF, 0.02), c6), sx, sy)


def test_one_caplet_cap_equals_black_caplet():
    c = Curve.flat(REF, 0.03)
    ctx = MethodologyContext.single(c)
    s = cap_schedule(REF, date(2011, 3, 31))
    spec = CapFloorSpec(s, 0.03, vols=0.25)
    (start, end) = s.periods[1]
    tau = s.accruals[1]
    expiry = year_fraction(DayCount.ACT_365F, REF, start)
    expected = black_caplet(fra_rate(c, start, end), 0.03, expiry, 0.25, c.discount_factor(end), tau)
    assert black_cap_floor(ctx, spec) == pytest.approx(expected, rel=1e-15)


def test_cap_sums_caplets_and_skips_first():
    disc = Curve.flat(REF, 0.01)
    fwd = Curve.flat(REF, 0.02, role="forwarding", tenor="6M")
    ctx = MethodologyContext(disc, fwd)
    s = cap_schedule(REF, date(2015, 3, 31))
    spec = CapFloorSpec(s, 0.025, vols=[0.2 + 0.01 * k for k in range(len(s) - 1)])
    manual = 0.0
    for k, ((start, end), tau) in enumerate(zip(s.periods[1:], s.accruals[1:])):
        expiry = year_fraction(DayCount.ACT_365F, REF, start)
        manual += black_caplet(fra_rate(fwd, start, end), 0.025, expiry, 0.2 + 0.01 * k,
                               disc.discount_factor(end), tau)
    assert len(caplet_values(ctx, spec)) == len(s) - 1
    assert black_cap_floor(ctx, spec) == pytest.approx(manual, rel=1e-14)


def test_caplet_vol_inversion_by_bisection():
    # invert one Black caplet price with an independent bisection
    target = black_caplet(0.031, 0.035, 3.0, 0.27, 0.92, 0.5)
    vol = bisect(lambda v: black_caplet(0.031, 0.035, 3.0, v, 0.92, 0.5) - target, 1e-4, 2.0, xtol=1e-14)
    assert vol == pytest.approx(0.27, abs=1e-12)


@pytest.mark.parametrize("maturity", [3, 5, 10, 20, 30])
@pytest.mark.parametrize("strike", [0.01, 0.02, 0.03, 0.05, 0.08])
def test_cap_floor_parity(maturity, strike):
    disc = Curve.flat(REF, 0.012, horizon_years=35)
    fwd = Curve.flat(REF, 0.02, horizon_years=35, role="forwarding", tenor="6M")
    ctx = MethodologyContext(disc, fwd)
    s = cap_schedule(REF, add_tenor(REF, f"{maturity}Y"))
    cap = black_cap_floor(ctx, CapFloorSpec(s, strike, 1, 0.22))
    floor = black_cap_floor(ctx, CapFloorSpec(s, strike, -1, 0.22))
    tail = s.tail(1)
    swap = floating_leg_pv(ctx, tail) - strike * annuity(disc, tail)
    assert cap - floor == pytest.approx(swap, rel=1e-10, abs=1e-16)
