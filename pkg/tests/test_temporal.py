from datetime import date

import pytest

from multicurve.errors import ConfigurationError, OrderingError, ScheduleError
from multicurve.temporal import (DayCount, add_months, add_tenor, generate_schedule,
                                 tenor_months, year_fraction)


@pytest.mark.parametrize("conv,start,end,expected", [
    ("ACT/360", date(2010, 1, 1), date(2010, 7, 1), 181 / 360),
    ("ACT/365F", date(2010, 1, 1), date(2011, 1, 1), 1.0),
    ("ACT/365F", date(2012, 1, 1), date(2013, 1, 1), 366 / 365),
    # 30E/360 clamps both day-31s to 30: 360*0 + 30*6 + (30 - 30)
    ("30E/360", date(2010, 1, 31), date(2010, 7, 31), 0.5),
    # Feb 28 is not moved under 30E/360: (28 - 30) days short of two months
    ("30E/360", date(2010, 12, 31), date(2011, 2, 28), 58 / 360),
    ("30E/360", date(2010, 3, 15), date(2015, 3, 15), 5.0),
])
def test_year_fraction_hand_values(conv, start, end, expected):
    assert year_fraction(conv, start, end) == pytest.approx(expected, abs=1e-15)


def test_year_fraction_rejects_reversed_dates():
    with pytest.raises(OrderingError):
        year_fraction(DayCount.ACT_360, date(2010, 2, 1), date(2010, 1, 1))


def test_zero_length_period():
    d = date(2010, 5, 5)
    for conv in DayCount:
        assert year_fraction(conv, d, d) == 0.0


@pytest.mark.parametrize("d,n,expected", [
    (date(2010, 1, 31), 1, date(2010, 2, 28)),
    (date(2012, 1, 31), 1, date(2012, 2, 29)),
    (date(2010, 8, 31), 6, date(2011, 2, 28)),
    (date(2010, 8, 31), -6, date(2010, 2, 28)),
    (date(2010, 3, 15), 120, date(2020, 3, 15)),
])
def test_add_months_clamps_to_month_end(d, n, expected):
    assert add_months(d, n) == expected


def test_tenors():
    d = date(2010, 3, 31)
    assert add_tenor(d, "0D") == d
    assert add_tenor(d, "1W") == date(2010, 4, 7)
    assert add_tenor(d, "ON") == date(2010, 4, 1)
    assert add_tenor(d, "18M") == date(2011, 9, 30)
    assert tenor_months("2Y") == 24
    with pytest.raises(ConfigurationError):
        tenor_months("1W")
    with pytest.raises(ConfigurationError):
        add_tenor(d, "3Q")


def test_day_count_aliases():
    assert DayCount.parse("act/365") is DayCount.ACT_365F
    assert DayCount.parse("30/360E") is DayCount.THIRTY_E_360
    with pytest.raises(ConfigurationError):
        DayCount.parse("ACT/ACT")


def test_25y_semiannual_schedule_has_50_periods():
    start = date(2010, 3, 31)
    s = generate_schedule(start, date(2035, 3, 31), 6, DayCount.ACT_360)
    assert len(s) == 50
    assert s.start == start and s.maturity == date(2035, 3, 31)
    assert all(b > a for a, b in s.periods)
    assert s.payment_dates[0] == date(2010, 9, 30)


def test_schedule_accruals_sum_for_30e360():
    s = generate_schedule(date(2010, 3, 31), date(2020, 3, 31), 12, DayCount.THIRTY_E_360)
    assert sum(s.accruals) == pytest.approx(10.0, abs=1e-14)


def test_schedule_rejects_stub():
    with pytest.raises(ScheduleError):
        generate_schedule(date(2010, 1, 15), date(2011, 4, 15), 12)
    with pytest.raises(ScheduleError):
        generate_schedule(date(2010, 1, 15), date(2010, 1, 15), 6)


def test_schedule_tail_drops_leading_periods():
    s = generate_schedule(date(2010, 1, 15), date(2013, 1, 15), 6)
    t = s.tail(1)
    assert len(t) == len(s) - 1
    assert t.periods == s.periods[1:]
