"""Sequential pillar-by-pillar curve bootstrapping.

Each quote contributes one pillar at its final payment date.  The pillar
discount factor is found by bracketed root search so that the quote reprices
exactly on the curve built so far.  Three flavours share the machinery:

* :func:`bootstrap_single` -- one curve both discounts and forwards.
* :func:`bootstrap_forwarding` -- a tenor-specific forwarding curve, with cash
  flows discounted on an exogenous curve.
* :func:`bootstrap_ois` -- an overnight discounting curve from OIS quotes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Iterable, Sequence

from scipy.optimize import brentq

from .curve import Curve, fra_rate
from .errors import BootstrapError, CoverageError, SpecError
from .pricing import (Methodology, MethodologyContext, SwapSpec, basis_swap_spread,
                      ois_par_rate, par_rate)
from .temporal import DayCount, Schedule, add_tenor, generate_schedule, tenor_months

KINDS = ("Deposit", "FRA", "Swap", "OIS", "BasisSwap")
_KIND_ALIASES = {"future": "FRA", "futures": "FRA", "fra": "FRA", "deposit": "Deposit",
                 "swap": "Swap", "ois": "OIS", "basisswap": "BasisSwap", "basis": "BasisSwap"}

DF_TOLERANCE = 1e-14
LOWER_DF = 1e-8


@dataclass(frozen=True)
class Quote:
    """One market quote used as a bootstrap pillar.

    ``tenor_start``/``tenor_end`` are offsets from the spot date.  For swaps and
    OIS ``day_count`` is the floating accrual convention and ``fixed_day_count``
    the fixed-leg one.  For a basis swap ``float_frequency_months`` belongs to the
    leg projected off the curve being built and ``fixed_frequency_months`` to the
    other (shorter-tenor) leg, which receives the quoted spread.
    """

    kind: str
    tenor_start: str
    tenor_end: str
    quote: float
    rate_tenor: str | None = None
    day_count: DayCount = DayCount.ACT_360
    fixed_frequency_months: int | None = None
    float_frequency_months: int | None = None
    fixed_day_count: DayCount | None = None

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower().replace(" ", ""), None)
        if kind is None:
            raise SpecError(f"unknown quote kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "day_count", DayCount.parse(self.day_count))
        if self.fixed_day_count is not None:
            object.__setattr__(self, "fixed_day_count", DayCount.parse(self.fixed_day_count))
        if not self.quote > -1.0:
            raise SpecError(f"quoted rate {self.quote} must exceed -1")

    def dates(self, spot: date) -> tuple[date, date]:
        start, end = add_tenor(spot, self.tenor_start), add_tenor(spot, self.tenor_end)
        if not end > start:
            raise SpecError(f"quote {self.label} matures on or before its start")
        return start, end

    @property
    def label(self) -> str:
        return f"{self.kind} {self.tenor_start}x{self.tenor_end}"

    @property
    def fixed_frequency(self) -> int:
        return self.fixed_frequency_months or 12

    @property
    def float_frequency(self) -> int:
        if self.float_frequency_months:
            return self.float_frequency_months
        if self.rate_tenor and self.rate_tenor != "ON":
            return tenor_months(self.rate_tenor)
        return 6

    def fixed_schedule(self, spot: date) -> Schedule:
        start, end = self.dates(spot)
        if self.kind == "OIS":
            # OIS shorter than one fixed period pay a single coupon
            freq = self.fixed_frequency
            months = (end.year - start.year) * 12 + end.month - start.month
            if months < freq or add_tenor(start, f"{months}M") != end:
                return Schedule((start, end), months or 1, self.fixed_day_count or DayCount.ACT_360)
            return generate_schedule(start, end, freq, self.fixed_day_count or DayCount.ACT_360)
        return generate_schedule(start, end, self.fixed_frequency,
                                 self.fixed_day_count or DayCount.THIRTY_E_360)

    def float_schedule(self, spot: date) -> Schedule:
        start, end = self.dates(spot)
        return generate_schedule(start, end, self.float_frequency, self.day_count)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "tenorStart": self.tenor_start, "tenorEnd": self.tenor_end,
               "rateTenor": self.rate_tenor, "quote": self.quote, "dayCount": self.day_count.value,
               "fixedFrequencyMonths": self.fixed_frequency_months,
               "floatFrequencyMonths": self.float_frequency_months}
        if self.fixed_day_count is not None:
            out["fixedDayCount"] = self.fixed_day_count.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Quote":
        try:
            return cls(
                kind=data["kind"],
                tenor_start=data.get("tenorStart", "0D"),
                tenor_end=data["tenorEnd"],
                quote=float(data["quote"]),
                rate_tenor=data.get("rateTenor"),
                day_count=data.get("dayCount") or DayCount.ACT_360,
                fixed_frequency_months=data.get("fixedFrequencyMonths"),
                float_frequency_months=data.get("floatFrequencyMonths"),
                fixed_day_count=data.get("fixedDayCount"),
            )
        except KeyError as exc:
            raise SpecError(f"quote is missing field {exc}") from exc


@dataclass(frozen=True)
class BootstrapSpec:
    reference_date: date
    quotes: tuple[Quote, ...]
    role: str = "discounting"
    tenor: str | None = None
    discount_curve: Curve | None = None
    basis_curve: Curve | None = None
    spot: date | None = None
    tolerance: float = DF_TOLERANCE
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "quotes", tuple(self.quotes))
        if not self.quotes:
            raise SpecError("bootstrap needs at least one quote")

    @property
    def spot_date(self) -> date:
        return self.spot or self.reference_date


def sort_quotes(quotes: Iterable[Quote], spot: date) -> list[Quote]:
    return sorted(quotes, key=lambda q: q.dates(spot)[1])


@dataclass
class PillarDiagnostic:
    quote: Quote
    pillar: date
    discount_factor: float
    model_rate: float
    error: float
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {"instrument": self.quote.label, "pillar": self.pillar.isoformat(),
                "df": self.discount_factor, "quote": self.quote.quote,
                "model": self.model_rate, "error": self.error}


@dataclass
class BootstrapResult:
    curve: Curve
    diagnostics: list[PillarDiagnostic] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max((abs(d.error) for d in self.diagnostics), default=0.0)


def quote_pricer(quote: Quote, mode: str, spec: BootstrapSpec) -> Callable[[Curve], float]:
    """Function mapping the curve under construction to the rate implied for ``quote``.

    ``mode`` is ``"single"``, ``"forwarding"`` or ``"ois"``; schedules are built
    once so the closure is cheap enough for the root-search inner loop.
    """
    spot = spec.spot_date
    start, end = quote.dates(spot)
    dc = quote.day_count
    if quote.kind in ("Deposit", "FRA"):
        return lambda curve: fra_rate(curve, start, end, dc)
    if quote.kind == "OIS":
        if mode != "ois":
            raise SpecError("OIS quotes only bootstrap an overnight discounting curve")
        fixed = quote.fixed_schedule(spot)
        return lambda curve: ois_par_rate(curve, fixed)
    if mode == "ois":
        raise SpecError(f"{quote.kind} quote not allowed in an OIS bootstrap")
    if quote.kind == "Swap":
        swap = SwapSpec(quote.fixed_schedule(spot), quote.float_schedule(spot),
                        rate_tenor=quote.rate_tenor or f"{quote.float_frequency}M")
        if mode == "single":
            return lambda curve: par_rate(MethodologyContext.single(curve), swap)
        disc = spec.discount_curve
        return lambda curve: par_rate(MethodologyContext(disc, curve, Methodology.MULTI_CSA), swap)
    if mode != "forwarding" or spec.basis_curve is None:
        raise SpecError("basis swap quotes need a forwarding bootstrap with a basis curve")
    other = MethodologyContext(spec.discount_curve, spec.basis_curve, Methodology.MULTI_CSA)
    other_schedule = generate_schedule(start, end, quote.fixed_frequency, dc)
    own_schedule = quote.float_schedule(spot)
    disc = spec.discount_curve
    return lambda curve: basis_swap_spread(
        other, MethodologyContext(disc, curve, Methodology.MULTI_CSA), other_schedule, own_schedule)


def _check_order(quotes: Sequence[Quote], spot: date):
    ends = [q.dates(spot)[1] for q in quotes]
    for q, a, b in zip(quotes[1:], ends, ends[1:]):
        if not b > a:
            raise SpecError(f"quotes not strictly increasing in maturity at {q.label} ({b})")


def _solve_pillar(f, prev_df: float, tol: float, pillar: date, label: str) -> float:
    lo, hi = LOWER_DF, 2.0 * prev_df
    f_lo = f(lo)
    f_hi = f(hi)
    # widen the upper end when a long instrument needs a factor above 2x the previous
    for _ in range(8):
        if f_lo * f_hi <= 0.0:
            break
        hi *= 2.0
        f_hi = f(hi)
    else:
        raise BootstrapError(f"no sign change bracketing pillar {pillar} for {label}", pillar=pillar)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    try:
        return brentq(f, lo, hi, xtol=tol, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise BootstrapError(f"root search failed at pillar {pillar} for {label}: {exc}",
                             pillar=pillar) from exc


def _bootstrap(spec: BootstrapSpec, mode: str, role: str) -> BootstrapResult:
    spot = spec.spot_date
    quotes = list(spec.quotes)
    _check_order(quotes, spot)
    if quotes[0].dates(spot)[1] <= spec.reference_date:
        raise SpecError("first quote must mature after the reference date")
    if spot < spec.reference_date:
        raise SpecError("spot date precedes the reference date")

    curve = Curve(spec.reference_date, [], role=role, tenor=spec.tenor, name=spec.name)
    diagnostics = []
    for q in quotes:
        pillar = q.dates(spot)[1]
        prev_df = curve._dfs[-1]
        price = quote_pricer(q, mode, spec)
        calls = 0

        def residual(x, q=q, pillar=pillar, base=curve, price=price):
            nonlocal calls
            calls += 1
            return price(base._extended(pillar, x)) - q.quote

        df = _solve_pillar(residual, prev_df, spec.tolerance, pillar, q.label)
        curve = curve._extended(pillar, df)
        rate = price(curve)
        diagnostics.append(PillarDiagnostic(q, pillar, df, rate, rate - q.quote, calls))
    # rebuild through the validating constructor
    curve = Curve(spec.reference_date, curve.pillars, role=role, tenor=spec.tenor, name=spec.name)
    return BootstrapResult(curve, diagnostics)


def bootstrap_single(spec: BootstrapSpec) -> Curve:
    return bootstrap_single_result(spec).curve


def bootstrap_single_result(spec: BootstrapSpec) -> BootstrapResult:
    if spec.discount_curve is not None:
        raise SpecError("single-curve bootstrap takes no exogenous discounting curve")
    tenors = {q.rate_tenor for q in spec.quotes if q.kind in ("FRA", "Swap") and q.rate_tenor}
    if len(tenors) > 1:
        warnings.warn(f"single-curve quote list mixes underlying tenors {sorted(tenors)}",
                      stacklevel=3)
    return _bootstrap(spec, "single", spec.role)


def bootstrap_forwarding(spec: BootstrapSpec) -> Curve:
    return bootstrap_forwarding_result(spec).curve


def bootstrap_forwarding_result(spec: BootstrapSpec) -> BootstrapResult:
    if spec.discount_curve is None:
        raise SpecError("forwarding bootstrap needs an exogenous discounting curve")
    spot = spec.spot_date
    last = max(q.dates(spot)[1] for q in spec.quotes)
    if not spec.discount_curve.covers(last):
        raise CoverageError(f"discounting curve ends {spec.discount_curve.last_date}, "
                            f"before the last quote maturity {last}")
    if spec.discount_curve.reference_date != spec.reference_date:
        raise SpecError("discounting and forwarding curves must share the reference date")
    if spec.basis_curve is not None and not spec.basis_curve.covers(last):
        raise CoverageError("basis curve does not cover the quote maturities")
    tenors = {q.rate_tenor for q in spec.quotes if q.rate_tenor}
    if spec.tenor is not None:
        tenors.add(spec.tenor)
    if len(tenors) > 1:
        raise SpecError(f"forwarding curve quotes must share one underlying tenor, got {sorted(tenors)}")
    return _bootstrap(spec, "forwarding", "forwarding")


def bootstrap_ois(spec: BootstrapSpec) -> Curve:
    return bootstrap_ois_result(spec).curve


def bootstrap_ois_result(spec: BootstrapSpec) -> BootstrapResult:
    if spec.discount_curve is not None:
        raise SpecError("OIS bootstrap takes no exogenous discounting curve")
    for q in spec.quotes:
        if q.kind not in ("OIS", "Deposit"):
            raise SpecError(f"OIS curve accepts OIS (and overnight deposit) quotes, got {q.kind}")
    return _bootstrap(spec, "ois", "discounting")


def reprice(curve: Curve, spec: BootstrapSpec, mode: str) -> list[float]:
    """Model-minus-quote rate errors of every spec quote on a finished curve."""
    return [quote_pricer(q, mode, spec)(curve) - q.quote for q in spec.quotes]


def load_quotes(data: Sequence[dict]) -> list[Quote]:
    return [Quote.from_dict(d) for d in data]
