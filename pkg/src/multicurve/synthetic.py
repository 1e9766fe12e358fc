"""Randomised, internally consistent market snapshots.

A seeded draw fixes "true" overnight, 3M and 6M curves (the tenor curves sit
above the overnight curve by increasing basis spreads).  Bootstrap quotes are
read off those curves; the forward-start swap grid and cap/floor premia are
then generated by the engine itself under CSA discounting on the bootstrapped
curves, so that the CSA methodology reproduces the synthetic market exactly.
"""

from __future__ import annotations

import math
from datetime import date
from typing import Sequence

import numpy as np

from .bootstrap import Quote
from .curve import Curve, fra_rate
from .harness import (EONIA_OIS, EURIBOR_6M_CSA, EURIBOR_6M_STANDARD, EURIBOR_STANDARD,
                      FsirsQuote, MarketSnapshot, run_curve_build)
from .pricing import Methodology, MethodologyContext, make_swap, ois_par_rate, par_rate
from .sabr import SabrParams, sabr_vol
from .temporal import DayCount, add_months, add_tenor, year_fraction
from .volstrip import TermVolQuote, atm_rate, implied_term_vol, quote_omega, term_to_premium

HORIZON_YEARS = 61
LONG_SWAPS = tuple(range(3, 31)) + (35, 40, 50, 60)
OIS_TENORS = ("1W", "2W", "1M", "2M", "3M", "6M", "9M", "1Y", "2Y") + tuple(f"{y}Y" for y in LONG_SWAPS)
CAP_MATURITIES = (3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 20, 25, 30)
CAP_STRIKES = (0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.05, 0.06, 0.07, 0.08, 0.10)
FSIRS_YEARS = tuple(range(1, 26))


def _zero_curve(ref: date, zero, role: str, tenor: str | None, name: str) -> Curve:
    """Monthly-pillar curve from a continuously compounded zero-rate function of ACT/365F time."""
    pillars = []
    for k in range(1, HORIZON_YEARS * 12 + 1):
        d = add_months(ref, k)
        t = year_fraction(DayCount.ACT_365F, ref, d)
        pillars.append((d, math.exp(-zero(t) * t)))
    return Curve(ref, pillars, role=role, tenor=tenor, name=name)


def true_curves(ref: date, rng: np.random.Generator) -> dict[str, Curve]:
    """Overnight, 3M and 6M curves with positive, term-dependent basis spreads."""
    level = rng.uniform(0.003, 0.015)
    slope = rng.uniform(0.015, 0.03)
    scale = rng.uniform(2.0, 8.0)
    s3_short, s3_long = rng.uniform(0.002, 0.005), rng.uniform(0.0005, 0.0015)
    s6_extra = rng.uniform(0.001, 0.0025)

    def ois(t):
        return level + slope * (1.0 - math.exp(-t / scale))

    def spread3(t):
        return s3_long + (s3_short - s3_long) * math.exp(-t / 3.0)

    return {
        "ON": _zero_curve(ref, ois, "discounting", "ON", "true ON"),
        "3M": _zero_curve(ref, lambda t: ois(t) + spread3(t), "forwarding", "3M", "true 3M"),
        "6M": _zero_curve(ref, lambda t: ois(t) + spread3(t) + s6_extra, "forwarding", "6M", "true 6M"),
    }


def bootstrap_quotes(ref: date, spot: date, true: dict[str, Curve]) -> dict[str, list[Quote]]:
    """Instrument sets of the four named curves, quoted off the true curves."""
    market = MethodologyContext(true["ON"], true["6M"], Methodology.MULTI_CSA)

    def swap_rate(years: int) -> float:
        return par_rate(market, make_swap(spot, add_tenor(spot, f"{years}Y")))

    def swaps(first: int) -> list[Quote]:
        return [Quote("Swap", "0D", f"{y}Y", swap_rate(y), rate_tenor="6M",
                      fixed_frequency_months=12, float_frequency_months=6)
                for y in LONG_SWAPS if y >= first]

    def forward(curve: Curve, start: str, end: str) -> float:
        return fra_rate(curve, add_tenor(spot, start), add_tenor(spot, end))

    ois = []
    for tenor in OIS_TENORS:
        q = Quote("OIS", "0D", tenor, 0.0, rate_tenor="ON", fixed_frequency_months=12)
        rate = ois_par_rate(true["ON"], q.fixed_schedule(spot))
        ois.append(Quote("OIS", "0D", tenor, rate, rate_tenor="ON", fixed_frequency_months=12))

    standard = [Quote("Deposit", "0D", t, forward(true["3M"], "0D", t), rate_tenor="3M")
                for t in ("1W", "1M", "2M", "3M")]
    standard += [Quote("Future", f"{m}M", f"{m + 3}M", forward(true["3M"], f"{m}M", f"{m + 3}M"),
                       rate_tenor="3M") for m in range(3, 36, 3)]
    standard += swaps(4)

    six = [Quote("Deposit", "0D", "6M", forward(true["6M"], "0D", "6M"), rate_tenor="6M")]
    six += [Quote("FRA", f"{m}M", f"{m + 6}M", forward(true["6M"], f"{m}M", f"{m + 6}M"),
                  rate_tenor="6M") for m in range(1, 19)]
    six += swaps(3)
    return {EURIBOR_STANDARD: standard, EURIBOR_6M_STANDARD: list(six),
            EONIA_OIS: ois, EURIBOR_6M_CSA: list(six)}


def _term_vol_params(rng: np.random.Generator) -> dict:
    return {"short": rng.uniform(0.25, 0.40), "long": rng.uniform(0.15, 0.22),
            "decay": rng.uniform(3.0, 8.0), "rho": rng.uniform(-0.4, -0.1),
            "nu": rng.uniform(0.25, 0.5)}


def synthetic_snapshot(seed: int = 0, valuation_date: date = date(2010, 8, 31),
                       fsirs_years: Sequence[int] = FSIRS_YEARS,
                       cap_maturities: Sequence[int] = CAP_MATURITIES,
                       cap_strikes: Sequence[float] = CAP_STRIKES,
                       with_caps: bool = True) -> MarketSnapshot:
    """Self-consistent snapshot: CSA pricing on its own curves reproduces every quote."""
    rng = np.random.default_rng(seed)
    spot = valuation_date
    true = true_curves(valuation_date, rng)
    snap = MarketSnapshot(valuation_date, bootstrap_quotes(valuation_date, spot, true))
    curves = run_curve_build(snap)
    csa = curves.context(Methodology.MULTI_CSA)
    nocsa = curves.context(Methodology.MULTI_NOCSA)

    for s in fsirs_years:
        for t in fsirs_years:
            start = add_tenor(spot, f"{s}Y")
            rate = par_rate(csa, make_swap(start, add_tenor(start, f"{t}Y")))
            snap.fsirs.append(FsirsQuote(f"{s}Y", f"{t}Y", rate))

    if with_caps:
        vp = _term_vol_params(rng)
        eonia, euribor, premia = [], [], []
        for m in cap_maturities:
            label = f"{m}Y"
            probe = TermVolQuote(label, cap_strikes[0], 0.2)
            fwd = atm_rate(csa, probe.schedule(spot))
            atm = vp["long"] + (vp["short"] - vp["long"]) * math.exp(-m / vp["decay"])
            # alpha with sigma_ATM ~= alpha / F^(1 - beta) at leading order; vol of vol
            # decays like 1/sqrt(T) so the wings stay bounded at long maturities
            nu = vp["nu"] * math.sqrt(min(1.0, 3.0 / m))
            params = SabrParams(atm * math.sqrt(fwd), 0.5, vp["rho"], nu)
            for k in cap_strikes:
                vol = float(sabr_vol(params, fwd, k, float(m)))
                side = "floor" if quote_omega(csa, TermVolQuote(label, k, vol), spot) == -1 else "cap"
                q = TermVolQuote(label, k, vol, side, "vol")
                premium = term_to_premium(csa, q, spot)
                eonia.append(q)
                premia.append(q.with_value(premium, "premium"))
                euribor.append(q.with_value(implied_term_vol(nocsa, premia[-1], spot), "vol"))
        snap.cap_vols = {"euribor": euribor, "eonia": eonia}
        snap.cap_premia = premia
    return snap
