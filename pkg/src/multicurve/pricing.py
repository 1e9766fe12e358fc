"""Vanilla interest-rate pricers under single- and multiple-curve setups.

Every pricer takes a :class:`MethodologyContext` carrying a discounting curve
and a forwarding curve.  Forward rates are always projected off the forwarding
curve and cash flows discounted off the discounting curve; the classical
single-curve formulas fall out when both are the same curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Sequence

from .curve import Curve, fra_rate
from .errors import ContextError, DomainError, NumericalError
from .temporal import DayCount, Schedule, generate_schedule, year_fraction


class Methodology(str, Enum):
    SINGLE = "single"
    MULTI_NOCSA = "multi-nocsa"
    MULTI_CSA = "multi-csa"


@dataclass(frozen=True)
class MethodologyContext:
    discount: Curve
    forward: Curve
    method: Methodology = Methodology.MULTI_CSA

    def __post_init__(self):
        object.__setattr__(self, "method", Methodology(self.method))
        if self.method is Methodology.SINGLE and self.discount is not self.forward:
            raise ContextError("single-curve methodology needs one curve for discounting and forwarding")

    @classmethod
    def single(cls, curve: Curve) -> "MethodologyContext":
        return cls(curve, curve, Methodology.SINGLE)

    @property
    def valuation_date(self) -> date:
        return self.discount.reference_date


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


# --------------------------------------------------------------------------
# linear products
# --------------------------------------------------------------------------

def fra_value(ctx: MethodologyContext, t1: date, t2: date, strike: float,
              omega: int = 1, notional: float = 1.0,
              day_count: DayCount | str = DayCount.ACT_360) -> float:
    fwd = fra_rate(ctx.forward, t1, t2, day_count)
    tau = year_fraction(day_count, t1, t2)
    return notional * ctx.discount.discount_factor(t2) * omega * (fwd - strike) * tau


@dataclass(frozen=True)
class SwapSpec:
    """Fixed-vs-floating swap; ``omega=+1`` receives floating and pays fixed."""

    fixed: Schedule
    floating: Schedule
    fixed_rate: float = 0.0
    notional: float = 1.0
    omega: int = 1
    rate_tenor: str = "6M"

    def __post_init__(self):
        if self.omega not in (1, -1):
            raise ValueError("omega must be +1 or -1")
        if self.fixed.start != self.floating.start or self.fixed.maturity != self.floating.maturity:
            raise ValueError("fixed and floating legs must share start and maturity")

    def with_rate(self, rate: float) -> "SwapSpec":
        return SwapSpec(self.fixed, self.floating, rate, self.notional, self.omega, self.rate_tenor)


def make_swap(start: date, maturity: date, fixed_rate: float = 0.0, *,
              fixed_frequency: int = 12, float_frequency: int = 6,
              fixed_day_count: DayCount | str = DayCount.THIRTY_E_360,
              float_day_count: DayCount | str = DayCount.ACT_360,
              notional: float = 1.0, omega: int = 1, rate_tenor: str | None = None) -> SwapSpec:
    fixed = generate_schedule(start, maturity, fixed_frequency, fixed_day_count)
    floating = generate_schedule(start, maturity, float_frequency, float_day_count)
    return SwapSpec(fixed, floating, fixed_rate, notional, omega,
                    rate_tenor or f"{float_frequency}M")


def annuity(curve: Curve, schedule: Schedule) -> float:
    return sum(curve.discount_factor(end) * tau
               for (_, end), tau in zip(schedule.periods, schedule.accruals))


def floating_leg_pv(ctx: MethodologyContext, schedule: Schedule) -> float:
    """Sum of P_d(T_k) * F_x(T_{k-1}, T_k) * tau_k per unit notional."""
    pv = 0.0
    for (start, end), tau in zip(schedule.periods, schedule.accruals):
        pv += ctx.discount.discount_factor(end) * fra_rate(ctx.forward, start, end, schedule.day_count) * tau
    return pv


def swap_npv(ctx: MethodologyContext, spec: SwapSpec) -> float:
    float_pv = floating_leg_pv(ctx, spec.floating)
    fixed_pv = spec.fixed_rate * annuity(ctx.discount, spec.fixed)
    return spec.notional * spec.omega * (float_pv - fixed_pv)


def par_rate(ctx: MethodologyContext, spec: SwapSpec) -> float:
    a = annuity(ctx.discount, spec.fixed)
    if not a > 0.0:
        raise NumericalError(f"degenerate annuity {a}")
    return floating_leg_pv(ctx, spec.floating) / a


def ois_par_rate(curve: Curve, fixed: Schedule) -> float:
    """Par rate of an OIS whose compounded overnight leg telescopes per period."""
    float_pv = sum(curve.discount_factor(s) - curve.discount_factor(e) for s, e in fixed.periods)
    a = annuity(curve, fixed)
    if not a > 0.0:
        raise NumericalError(f"degenerate annuity {a}")
    return float_pv / a


def _check_basis_contexts(ctx_x: MethodologyContext, ctx_y: MethodologyContext):
    if ctx_x.discount is not ctx_y.discount:
        raise ContextError("basis swap legs must share the discounting curve")


def basis_swap_spread(ctx_x: MethodologyContext, ctx_y: MethodologyContext,
                      schedule_x: Schedule, schedule_y: Schedule) -> float:
    """Equilibrium spread paid on top of the (shorter-tenor) x leg."""
    _check_basis_contexts(ctx_x, ctx_y)
    a = annuity(ctx_x.discount, schedule_x)
    if not a > 0.0:
        raise NumericalError(f"degenerate annuity {a}")
    return (floating_leg_pv(ctx_y, schedule_y) - floating_leg_pv(ctx_x, schedule_x)) / a


def basis_swap_npv(ctx_x: MethodologyContext, ctx_y: MethodologyContext,
                   schedule_x: Schedule, schedule_y: Schedule, spread: float,
                   omega: int = 1, notional: float = 1.0) -> float:
    _check_basis_contexts(ctx_x, ctx_y)
    leg_x = floating_leg_pv(ctx_x, schedule_x) + spread * annuity(ctx_x.discount, schedule_x)
    return notional * omega * (leg_x - floating_leg_pv(ctx_y, schedule_y))


# --------------------------------------------------------------------------
# Black caps and floors
# --------------------------------------------------------------------------

def black_caplet(forward: float, strike: float, expiry: float, vol: float,
                 discount: float, accrual: float, omega: int = 1,
                 notional: float = 1.0) -> float:
    """Black caplet (``omega=+1``) or floorlet (``omega=-1``) value."""
    if expiry <= 0.0:
        return notional * discount * accrual * max(omega * (forward - strike), 0.0)
    if forward <= 0.0 or strike <= 0.0:
        raise DomainError(f"lognormal Black needs positive forward and strike (F={forward}, K={strike})")
    if not vol > 0.0:
        raise DomainError(f"Black volatility must be positive, got {vol}")
    sd = vol * math.sqrt(expiry)
    d_plus = math.log(forward / strike) / sd + 0.5 * sd
    d_minus = d_plus - sd
    value = forward * norm_cdf(omega * d_plus) - strike * norm_cdf(omega * d_minus)
    return notional * omega * discount * value * accrual


@dataclass(frozen=True)
class CapFloorSpec:
    """Cap (``omega=+1``) or floor (``omega=-1``) on a floating schedule.

    ``vols`` is a single term volatility or one volatility per priced caplet,
    i.e. ``len(schedule) - 1`` values since the first caplet is excluded.
    """

    schedule: Schedule
    strike: float
    omega: int = 1
    vols: float | Sequence[float] = 0.2
    notional: float = 1.0
    skip_first: bool = field(default=True)

    def caplet_vols(self) -> list[float]:
        n = len(self.schedule) - (1 if self.skip_first else 0)
        if isinstance(self.vols, (int, float)):
            return [float(self.vols)] * n
        vols = [float(v) for v in self.vols]
        if len(vols) != n:
            raise ValueError(f"expected {n} caplet volatilities, got {len(vols)}")
        return vols


def caplet_periods(spec: CapFloorSpec) -> list[tuple[date, date, float]]:
    periods = list(zip(spec.schedule.periods, spec.schedule.accruals))
    if spec.skip_first:
        periods = periods[1:]
    return [(s, e, tau) for (s, e), tau in periods]


def caplet_values(ctx: MethodologyContext, spec: CapFloorSpec) -> list[float]:
    ref = ctx.valuation_date
    out = []
    for (start, end, tau), vol in zip(caplet_periods(spec), spec.caplet_vols()):
        fwd = fra_rate(ctx.forward, start, end, spec.schedule.day_count)
        expiry = year_fraction(DayCount.ACT_365F, ref, start) if start > ref else 0.0
        out.append(black_caplet(fwd, spec.strike, expiry, vol, ctx.discount.discount_factor(end),
                                tau, spec.omega, spec.notional))
    return out


def black_cap_floor(ctx: MethodologyContext, spec: CapFloorSpec) -> float:
    return sum(caplet_values(ctx, spec))


def cap_schedule(spot: date, maturity: date, frequency_months: int = 6,
                 day_count: DayCount | str = DayCount.ACT_360) -> Schedule:
    return generate_schedule(spot, maturity, frequency_months, day_count)
