"""Cap/floor term volatilities to caplet forward volatilities.

Each strike column is stripped sequentially by maturity: the caplets added
between two consecutive quoted maturities share one forward volatility, chosen
so that the cumulative cap premium matches the quoted one.  Floor quotes are
turned into caps through cap-floor parity before differencing.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

from scipy.optimize import brentq

from .curve import fra_rate
from .errors import ArbitrageError, ConfigurationError, ScheduleError, StrippingError
from .pricing import (CapFloorSpec, Methodology, MethodologyContext, black_cap_floor,
                      black_caplet, cap_schedule)
from .temporal import DayCount, Schedule, add_tenor, parse_date, year_fraction

VOL_BRACKET = (1e-6, 5.0)
SIDES = ("auto", "cap", "floor")
QUOTE_TYPES = ("vol", "premium")


def _maturity_date(maturity: "str | date", spot: date) -> date:
    if isinstance(maturity, date):
        return maturity
    try:
        return add_tenor(spot, maturity)
    except ConfigurationError:
        return parse_date(maturity)


@dataclass(frozen=True)
class TermVolQuote:
    """A cap or floor quoted as one Black term volatility or as a premium.

    ``maturity`` is a tenor from the spot date (``"5Y"``) or an ISO date.
    ``side="auto"`` quotes a floor below the ATM rate and a cap otherwise.
    """

    maturity: "str | date"
    strike: float
    value: float
    side: str = "auto"
    quote_type: str = "vol"
    frequency_months: int = 6
    day_count: DayCount = DayCount.ACT_360

    def __post_init__(self):
        side = self.side.lower()
        quote_type = self.quote_type.lower()
        if side not in SIDES:
            raise ConfigurationError(f"quote side must be one of {SIDES}, got {self.side!r}")
        if quote_type not in QUOTE_TYPES:
            raise ConfigurationError(f"quote type must be one of {QUOTE_TYPES}, got {self.quote_type!r}")
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "quote_type", quote_type)
        object.__setattr__(self, "day_count", DayCount.parse(self.day_count))
        if quote_type == "vol" and not self.value > 0.0:
            raise ConfigurationError(f"term volatility must be positive, got {self.value}")
        if quote_type == "premium" and not self.value >= 0.0:
            raise ConfigurationError(f"premium must be non-negative, got {self.value}")

    def end_date(self, spot: date) -> date:
        return _maturity_date(self.maturity, spot)

    def schedule(self, spot: date) -> Schedule:
        return cap_schedule(spot, self.end_date(spot), self.frequency_months, self.day_count)

    def with_value(self, value: float, quote_type: str, side: str | None = None) -> "TermVolQuote":
        return TermVolQuote(self.maturity, self.strike, value, side or self.side, quote_type,
                            self.frequency_months, self.day_count)

    def to_dict(self) -> dict:
        maturity = self.maturity.isoformat() if isinstance(self.maturity, date) else self.maturity
        return {"maturity": maturity, "strike": self.strike, "side": self.side,
                "value": self.value, "quoteType": self.quote_type}


def atm_rate(ctx: MethodologyContext, schedule: Schedule) -> float:
    """Forward swap rate over the caplet periods (first period excluded)."""
    tail = schedule.tail(1) if len(schedule) > 1 else schedule
    num = den = 0.0
    for (start, end), tau in zip(tail.periods, tail.accruals):
        df = ctx.discount.discount_factor(end)
        num += df * tau * fra_rate(ctx.forward, start, end, tail.day_count)
        den += df * tau
    return num / den


def quote_omega(ctx: MethodologyContext, quote: TermVolQuote, spot: date | None = None) -> int:
    """+1 for a cap, -1 for a floor, applying the ATM side rule to ``auto`` quotes."""
    if quote.side == "cap":
        return 1
    if quote.side == "floor":
        return -1
    spot = spot or ctx.valuation_date
    return -1 if quote.strike < atm_rate(ctx, quote.schedule(spot)) else 1


def term_to_premium(ctx: MethodologyContext, quote: TermVolQuote, spot: date | None = None) -> float:
    """Premium per unit notional of the quoted cap or floor."""
    if quote.quote_type == "premium":
        return quote.value
    spot = spot or ctx.valuation_date
    spec = CapFloorSpec(quote.schedule(spot), quote.strike, quote_omega(ctx, quote, spot), quote.value)
    return black_cap_floor(ctx, spec)


def implied_term_vol(ctx: MethodologyContext, quote: TermVolQuote, spot: date | None = None,
                     omega: int | None = None) -> float:
    """Single Black volatility repricing the quote's premium under ``ctx``."""
    spot = spot or ctx.valuation_date
    premium = term_to_premium(ctx, quote, spot)
    omega = omega if omega is not None else quote_omega(ctx, quote, spot)
    schedule = quote.schedule(spot)

    def gap(vol):
        return black_cap_floor(ctx, CapFloorSpec(schedule, quote.strike, omega, vol)) - premium

    return _solve_vol(gap, quote, spot)


def _solve_vol(gap, quote: TermVolQuote, spot: date) -> float:
    lo, hi = VOL_BRACKET
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo > 0.0:
        if g_lo <= 1e-15:
            return lo
        raise ArbitrageError(
            f"premium below intrinsic value at maturity {quote.end_date(spot)}, strike {quote.strike}",
            maturity=quote.end_date(spot), strike=quote.strike)
    if g_lo == 0.0:
        return lo
    if g_hi < 0.0:
        raise StrippingError(
            f"premium above the {hi} volatility cap at maturity {quote.end_date(spot)}, "
            f"strike {quote.strike}")
    try:
        return brentq(gap, lo, hi, xtol=1e-15, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise StrippingError(f"volatility root search failed: {exc}") from exc


@dataclass(frozen=True)
class CapletVol:
    fixing_date: date
    payment_date: date
    strike: float
    vol: float

    def to_dict(self) -> dict:
        return {"fixingDate": self.fixing_date.isoformat(), "strike": self.strike, "vol": self.vol}


def context_tag(ctx: MethodologyContext) -> str:
    """Curve-pair label: CSA discounting gives an Eonia-consistent surface."""
    return "eonia" if ctx.method is Methodology.MULTI_CSA else "euribor"


@dataclass(frozen=True)
class ForwardVolSurface:
    """Caplet volatilities keyed by (fixing date, strike)."""

    context: str
    caplets: tuple[CapletVol, ...]

    def __post_init__(self):
        for c in self.caplets:
            if not c.vol > 0.0:
                raise StrippingError(f"non-positive caplet vol at {c.fixing_date}, strike {c.strike}")

    @property
    def strikes(self) -> list[float]:
        return sorted({c.strike for c in self.caplets})

    @property
    def fixing_dates(self) -> list[date]:
        return sorted({c.fixing_date for c in self.caplets})

    def vol(self, fixing_date: date, strike: float) -> float:
        for c in self.caplets:
            if c.fixing_date == fixing_date and c.strike == strike:
                return c.vol
        raise KeyError((fixing_date, strike))

    def column(self, strike: float) -> list[CapletVol]:
        return sorted((c for c in self.caplets if c.strike == strike), key=lambda c: c.fixing_date)

    def cap_vols(self, schedule: Schedule, strike: float) -> list[float]:
        lookup = {c.fixing_date: c.vol for c in self.column(strike)}
        try:
            return [lookup[start] for start, _ in schedule.periods[1:]]
        except KeyError as exc:
            raise ConfigurationError(f"surface has no caplet fixing on {exc.args[0]} at strike {strike}") from exc

    def to_dict(self) -> dict:
        rows = sorted(self.caplets, key=lambda c: (c.strike, c.fixing_date))
        return {"context": self.context, "grid": [c.to_dict() for c in rows]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "ForwardVolSurface":
        caplets = tuple(CapletVol(parse_date(g["fixingDate"]), parse_date(g.get("paymentDate", g["fixingDate"])),
                                  float(g["strike"]), float(g["vol"])) for g in data["grid"])
        return cls(data["context"], caplets)


def _cap_premium(ctx: MethodologyContext, quote: TermVolQuote, schedule: Schedule,
                 omega: int, premium: float) -> float:
    """Quoted premium expressed as a cap, via Cap - Floor = payer swap on caplets 2..m."""
    if omega == 1:
        return premium
    swap = 0.0
    for (start, end), tau in zip(schedule.periods[1:], schedule.accruals[1:]):
        fwd = fra_rate(ctx.forward, start, end, schedule.day_count)
        swap += ctx.discount.discount_factor(end) * tau * (fwd - quote.strike)
    return premium + swap


def _strip_column(ctx: MethodologyContext, quotes: Sequence[TermVolQuote], spot: date,
                  omegas: Sequence[int] | None = None) -> list[CapletVol]:
    strike = quotes[0].strike
    ordered = sorted(range(len(quotes)), key=lambda i: quotes[i].end_date(spot))
    ref = ctx.valuation_date
    out: list[CapletVol] = []
    prev_dates: tuple[date, ...] | None = None
    prev_cap = 0.0
    for i in ordered:
        q = quotes[i]
        schedule = q.schedule(spot)
        if prev_dates is not None:
            if schedule.dates[:len(prev_dates)] != prev_dates or len(schedule.dates) == len(prev_dates):
                raise ScheduleError(f"cap schedules not nested at maturity {schedule.maturity}, strike {strike}")
        first = 1 if prev_dates is None else len(prev_dates) - 1
        omega = omegas[i] if omegas is not None else quote_omega(ctx, q, spot)
        cap = _cap_premium(ctx, q, schedule, omega, term_to_premium(ctx, q, spot))
        increment = cap - prev_cap
        if increment < 0.0:
            raise ArbitrageError(
                f"negative forward premium {increment:.3e} at maturity {schedule.maturity}, strike {strike}",
                maturity=schedule.maturity, strike=strike)
        legs = []
        for (start, end), tau in zip(schedule.periods[first:], schedule.accruals[first:]):
            fwd = fra_rate(ctx.forward, start, end, schedule.day_count)
            expiry = year_fraction(DayCount.ACT_365F, ref, start) if start > ref else 0.0
            legs.append((start, end, fwd, expiry, ctx.discount.discount_factor(end), tau))

        def gap(vol):
            return sum(black_caplet(f, strike, t, vol, d, tau) for _, _, f, t, d, tau in legs) - increment

        vol = _solve_vol(gap, q, spot)
        out.extend(CapletVol(start, end, strike, vol) for start, end, *_ in legs)
        prev_dates, prev_cap = schedule.dates, cap
    return out


def _columns(quotes: Iterable[TermVolQuote]) -> dict[float, list[int]]:
    cols: dict[float, list[int]] = {}
    for i, q in enumerate(quotes):
        cols.setdefault(q.strike, []).append(i)
    return dict(sorted(cols.items()))


def strip_forward_vols(ctx: MethodologyContext, quotes: Sequence[TermVolQuote],
                       spot: date | None = None, context: str | None = None,
                       omegas: Sequence[int] | None = None) -> ForwardVolSurface:
    """Piecewise-constant caplet vols reproducing every quoted premium under ``ctx``.

    ``omegas`` pins the cap/floor side of each quote; by default ``auto``
    quotes are resolved against the ATM rate under ``ctx``.
    """
    spot = spot or ctx.valuation_date
    quotes = list(quotes)
    if not quotes:
        raise ConfigurationError("no cap/floor quotes to strip")
    caplets: list[CapletVol] = []
    for _, idx in _columns(quotes).items():
        col_omegas = [omegas[i] for i in idx] if omegas is not None else None
        caplets.extend(_strip_column(ctx, [quotes[i] for i in idx], spot, col_omegas))
    return ForwardVolSurface(context or context_tag(ctx), tuple(caplets))


def reprice(ctx: MethodologyContext, surface: ForwardVolSurface, quote: TermVolQuote,
            spot: date | None = None, omega: int | None = None) -> float:
    """Premium of the quoted instrument priced caplet by caplet off ``surface``."""
    spot = spot or ctx.valuation_date
    schedule = quote.schedule(spot)
    omega = omega if omega is not None else quote_omega(ctx, quote, spot)
    vols = surface.cap_vols(schedule, quote.strike)
    return black_cap_floor(ctx, CapFloorSpec(schedule, quote.strike, omega, vols))


def reimply_surface(premia: Sequence[TermVolQuote], ctx_a: MethodologyContext,
                    ctx_b: MethodologyContext, spot: date | None = None
                    ) -> tuple[ForwardVolSurface, ForwardVolSurface]:
    """Strip the same premia under two curve pairs.

    Vol quotes are first converted to premia under ``ctx_a``; the cap/floor side
    of each instrument is fixed under ``ctx_a`` and kept for ``ctx_b``.
    """
    spot = spot or ctx_a.valuation_date
    omegas = [quote_omega(ctx_a, q, spot) for q in premia]
    as_premia = [q.with_value(term_to_premium(ctx_a, q, spot), "premium") for q in premia]
    surface_a = strip_forward_vols(ctx_a, as_premia, spot, omegas=omegas)
    surface_b = strip_forward_vols(ctx_b, as_premia, spot, omegas=omegas)
    return surface_a, surface_b


def load_term_quotes(path) -> list[TermVolQuote]:
    """Read a CSV with columns maturity, strike, side, value, quoteType."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return [TermVolQuote(r["maturity"], float(r["strike"]), float(r["value"]),
                             r.get("side") or "auto", r.get("quoteType") or "vol") for r in rows]
    except KeyError as exc:
        raise ConfigurationError(f"cap/floor quote file missing column {exc.args[0]}") from exc
