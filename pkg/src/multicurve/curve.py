"""Discount-factor term structures.

A :class:`Curve` stores discount factors at pillar dates and interpolates
linearly in log discount factor against calendar days, which gives
piecewise-constant instantaneous forwards between pillars.  Queries beyond the
last pillar raise instead of extrapolating.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from datetime import date
from typing import Iterable, Sequence

from .errors import ConfigurationError, DomainError, ExtrapolationError, OrderingError
from .temporal import DayCount, add_months, parse_date, year_fraction

ROLES = ("discounting", "forwarding")
TENORS = ("ON", "1M", "3M", "6M", "12M")
INTERPOLATIONS = ("log-linear",)


class Curve:
    """Immutable discount curve P(t, T) anchored at ``reference_date``.

    ``pillars`` holds ``(date, discount_factor)`` pairs; the reference date is
    inserted with factor 1 when absent.
    """

    __slots__ = ("reference_date", "role", "tenor", "interpolation", "name",
                 "_dates", "_days", "_dfs", "_logs")

    def __init__(
        self,
        reference_date: date,
        pillars: Iterable[tuple[date, float]],
        role: str = "discounting",
        tenor: str | None = None,
        interpolation: str = "log-linear",
        name: str = "",
    ):
        if role not in ROLES:
            raise ConfigurationError(f"curve role must be one of {ROLES}, got {role!r}")
        if tenor is not None and tenor not in TENORS:
            raise ConfigurationError(f"curve tenor must be one of {TENORS}, got {tenor!r}")
        if interpolation not in INTERPOLATIONS:
            raise ConfigurationError(f"unsupported interpolation {interpolation!r}")
        pts = [(parse_date(d), float(df)) for d, df in pillars]
        if pts and pts[0][0] == reference_date:
            if pts[0][1] != 1.0:
                raise ConfigurationError("discount factor at the reference date must be 1")
            pts = pts[1:]
        pts.insert(0, (reference_date, 1.0))
        for (d0, _), (d1, df1) in zip(pts, pts[1:]):
            if not d1 > d0:
                raise OrderingError(f"pillar dates not strictly increasing at {d1}")
            if not (df1 > 0.0 and math.isfinite(df1)):
                raise ConfigurationError(f"non-positive discount factor {df1} at {d1}")
        self.reference_date = reference_date
        self.role = role
        self.tenor = tenor
        self.interpolation = interpolation
        self.name = name
        self._dates = tuple(d for d, _ in pts)
        self._days = tuple(d.toordinal() for d in self._dates)
        self._dfs = tuple(df for _, df in pts)
        self._logs = tuple(math.log(df) for df in self._dfs)

    def _extended(self, d: date, df: float) -> "Curve":
        # unchecked append used by the bootstrap inner loop
        new = object.__new__(Curve)
        for attr in ("reference_date", "role", "tenor", "interpolation", "name"):
            setattr(new, attr, getattr(self, attr))
        new._dates = self._dates + (d,)
        new._days = self._days + (d.toordinal(),)
        new._dfs = self._dfs + (df,)
        new._logs = self._logs + (math.log(df),)
        return new

    @classmethod
    def flat(
        cls,
        reference_date: date,
        rate: float,
        horizon_years: int = 60,
        step_months: int = 12,
        **kwargs,
    ) -> "Curve":
        """Curve with a flat continuously-compounded ACT/365F zero rate."""
        pillars = []
        for k in range(1, horizon_years * 12 // step_months + 1):
            d = add_months(reference_date, k * step_months)
            t = year_fraction(DayCount.ACT_365F, reference_date, d)
            pillars.append((d, math.exp(-rate * t)))
        return cls(reference_date, pillars, **kwargs)

    @property
    def pillars(self) -> list[tuple[date, float]]:
        return list(zip(self._dates, self._dfs))

    @property
    def pillar_dates(self) -> tuple[date, ...]:
        return self._dates

    @property
    def last_date(self) -> date:
        return self._dates[-1]

    def covers(self, d: date) -> bool:
        return self.reference_date <= d <= self._dates[-1]

    def discount_factor(self, d: date) -> float:
        n = d.toordinal()
        days = self._days
        if n < days[0]:
            raise DomainError(f"{d} precedes curve reference date {self.reference_date}")
        if n > days[-1]:
            raise ExtrapolationError(f"{d} beyond last pillar {self._dates[-1]} of curve {self.name!r}")
        i = bisect_right(days, n) - 1
        if days[i] == n:
            return self._dfs[i]
        w = (n - days[i]) / (days[i + 1] - days[i])
        return math.exp(self._logs[i] + w * (self._logs[i + 1] - self._logs[i]))

    def zero_rate(self, d: date) -> float:
        """Continuously compounded ACT/365F zero rate to ``d``."""
        if d <= self.reference_date:
            raise DomainError("zero rate undefined at or before the reference date")
        t = year_fraction(DayCount.ACT_365F, self.reference_date, d)
        return -math.log(self.discount_factor(d)) / t

    def to_dict(self) -> dict:
        return {
            "referenceDate": self.reference_date.isoformat(),
            "role": self.role,
            "tenor": self.tenor,
            "interpolation": self.interpolation,
            "pillars": [{"date": d.isoformat(), "df": df} for d, df in self.pillars],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict, name: str = "") -> "Curve":
        ref = parse_date(data["referenceDate"])
        pillars = [(parse_date(p["date"]), p["df"]) for p in data["pillars"]]
        return cls(ref, pillars, role=data.get("role", "discounting"), tenor=data.get("tenor"),
                   interpolation=data.get("interpolation", "log-linear"), name=name)

    def __repr__(self) -> str:
        return (f"Curve(name={self.name!r}, role={self.role!r}, tenor={self.tenor!r}, "
                f"ref={self.reference_date}, pillars={len(self._dates)})")


def simple_forward_rate(curve: Curve, t1: date, t2: date,
                        convention: DayCount | str = DayCount.ACT_360) -> float:
    """Simply-compounded forward (1/tau) * (P(t1)/P(t2) - 1)."""
    if not t1 < t2:
        raise OrderingError(f"forward period start {t1} not before end {t2}")
    tau = year_fraction(convention, t1, t2)
    return (curve.discount_factor(t1) / curve.discount_factor(t2) - 1.0) / tau


def fra_rate(forwarding_curve: Curve, t1: date, t2: date,
             convention: DayCount | str = DayCount.ACT_360) -> float:
    """FRA rate projected off a forwarding curve.

    Same arithmetic as :func:`simple_forward_rate`; a single-curve setup passes
    its one curve here and gets identical numbers.
    """
    return simple_forward_rate(forwarding_curve, t1, t2, convention)


def discount_factors(curve: Curve, dates: Sequence[date]) -> list[float]:
    return [curve.discount_factor(d) for d in dates]
