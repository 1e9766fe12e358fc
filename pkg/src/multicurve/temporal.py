"""Calendar-free date arithmetic, day counts and schedule generation.

Dates are plain :class:`datetime.date` objects; ``date.toordinal()`` is the
serial day number used wherever an integer day count is needed.  No holiday
calendar or business-day adjustment is applied anywhere.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass
from functools import cached_property
from datetime import date, timedelta
from enum import Enum

from .errors import ConfigurationError, OrderingError, ScheduleError


class DayCount(str, Enum):
    ACT_360 = "ACT/360"
    ACT_365F = "ACT/365F"
    THIRTY_E_360 = "30E/360"

    @classmethod
    def parse(cls, value: "DayCount | str") -> "DayCount":
        if isinstance(value, DayCount):
            return value
        key = value.strip().upper().replace("FIXED", "F")
        aliases = {"ACT/365": "ACT/365F", "30/360E": "30E/360", "EUROBOND": "30E/360"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ConfigurationError(f"unknown day count convention {value!r}")


def parse_date(value: "date | str") -> date:
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise ConfigurationError(f"invalid ISO date {value!r}") from exc


def year_fraction(convention: DayCount | str, start: date, end: date) -> float:
    """Accrual fraction between two dates under ``convention``."""
    convention = DayCount.parse(convention)
    if end < start:
        raise OrderingError(f"end {end} precedes start {start}")
    if convention is DayCount.ACT_360:
        return (end - start).days / 360.0
    if convention is DayCount.ACT_365F:
        return (end - start).days / 365.0
    d1 = min(start.day, 30)
    d2 = min(end.day, 30)
    days = 360 * (end.year - start.year) + 30 * (end.month - start.month) + (d2 - d1)
    return days / 360.0


def add_months(d: date, months: int) -> date:
    """Shift by whole months, clamping the day to the end of the target month."""
    total = d.year * 12 + (d.month - 1) + months
    year, month = divmod(total, 12)
    month += 1
    day = min(d.day, calendar.monthrange(year, month)[1])
    return date(year, month, day)


_TENOR = re.compile(r"^\s*(\d+)\s*([DWMY])\s*$", re.IGNORECASE)


def tenor_months(tenor: str) -> int:
    """Length of a month/year tenor string in months (``"6M"`` -> 6, ``"2Y"`` -> 24)."""
    m = _TENOR.match(tenor)
    if not m or m.group(2).upper() not in "MY":
        raise ConfigurationError(f"{tenor!r} is not a month or year tenor")
    n = int(m.group(1))
    return n * 12 if m.group(2).upper() == "Y" else n


def add_tenor(d: date, tenor: str) -> date:
    """Shift ``d`` by a tenor string such as ``"0D"``, ``"1W"``, ``"6M"`` or ``"10Y"``."""
    if tenor.strip().upper() in ("ON", "O/N"):
        return d + timedelta(days=1)
    m = _TENOR.match(tenor)
    if not m:
        raise ConfigurationError(f"invalid tenor {tenor!r}")
    n, unit = int(m.group(1)), m.group(2).upper()
    if unit == "D":
        return d + timedelta(days=n)
    if unit == "W":
        return d + timedelta(weeks=n)
    if unit == "M":
        return add_months(d, n)
    return add_months(d, 12 * n)


def _months_between(start: date, end: date) -> int:
    return (end.year - start.year) * 12 + (end.month - start.month)


@dataclass(frozen=True)
class Schedule:
    """Accrual periods of one leg; ``dates[0]`` is the start, ``dates[1:]`` pay dates."""

    dates: tuple[date, ...]
    frequency_months: int
    day_count: DayCount

    def __post_init__(self):
        object.__setattr__(self, "day_count", DayCount.parse(self.day_count))
        if len(self.dates) < 2:
            raise ScheduleError("a schedule needs at least one period")
        for a, b in zip(self.dates, self.dates[1:]):
            if not b > a:
                raise ScheduleError(f"schedule dates not strictly increasing at {b}")

    @property
    def start(self) -> date:
        return self.dates[0]

    @property
    def maturity(self) -> date:
        return self.dates[-1]

    @property
    def payment_dates(self) -> tuple[date, ...]:
        return self.dates[1:]

    @cached_property
    def periods(self) -> list[tuple[date, date]]:
        return list(zip(self.dates[:-1], self.dates[1:]))

    @cached_property
    def accruals(self) -> list[float]:
        return [year_fraction(self.day_count, a, b) for a, b in self.periods]

    def __len__(self) -> int:
        return len(self.dates) - 1

    def tail(self, skip: int) -> "Schedule":
        """Schedule without its first ``skip`` periods."""
        return Schedule(self.dates[skip:], self.frequency_months, self.day_count)


def generate_schedule(
    start: date,
    maturity: date,
    frequency_months: int,
    convention: DayCount | str = DayCount.ACT_360,
) -> Schedule:
    """Backward-generated schedule from ``maturity`` whose first period starts at ``start``.

    The tenor must be a whole number of periods; a stub is never produced.
    """
    convention = DayCount.parse(convention)
    if frequency_months <= 0:
        raise ScheduleError("frequency must be a positive number of months")
    if not maturity > start:
        raise ScheduleError(f"maturity {maturity} not after start {start}")
    months = _months_between(start, maturity)
    whole = months > 0 and (
        add_months(maturity, -months) == start or add_months(start, months) == maturity
    )
    if not whole or months % frequency_months:
        raise ScheduleError(
            f"[{start}, {maturity}] is not an integral number of {frequency_months}M periods"
        )
    n = months // frequency_months
    dates = [add_months(maturity, -k * frequency_months) for k in range(n - 1, 0, -1)]
    return Schedule((start, *dates, maturity), frequency_months, convention)
