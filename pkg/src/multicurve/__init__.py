"""Multiple-curve interest-rate analytics: curves, vanilla pricing, caplet stripping and SABR."""

from .bootstrap import (BootstrapSpec, Quote, bootstrap_forwarding, bootstrap_ois,
                        bootstrap_single)
from .curve import Curve, fra_rate, simple_forward_rate
from .errors import (ArbitrageError, BootstrapError, CalibrationError, ConfigurationError,
                     MulticurveError, NumericalError)
from .pricing import (CapFloorSpec, Methodology, MethodologyContext, SwapSpec, annuity,
                      basis_swap_spread, black_cap_floor, black_caplet, floating_leg_pv,
                      make_swap, par_rate, swap_npv)
from .sabr import SabrParams, SmileSection, black_vega, calibrate_section, calibrate_surface, sabr_vol
from .temporal import DayCount, Schedule, generate_schedule, year_fraction
from .volstrip import (ForwardVolSurface, TermVolQuote, reimply_surface, strip_forward_vols,
                       term_to_premium)

__all__ = [
    "ArbitrageError", "BootstrapError", "BootstrapSpec", "CalibrationError", "CapFloorSpec",
    "ConfigurationError", "Curve", "DayCount", "ForwardVolSurface", "Methodology",
    "MethodologyContext", "MulticurveError", "NumericalError", "Quote", "SabrParams", "Schedule",
    "SmileSection", "SwapSpec", "TermVolQuote", "annuity", "basis_swap_spread", "black_cap_floor",
    "black_caplet", "black_vega", "bootstrap_forwarding", "bootstrap_ois", "bootstrap_single",
    "calibrate_section", "calibrate_surface", "floating_leg_pv", "fra_rate", "generate_schedule",
    "make_swap", "par_rate", "reimply_surface", "sabr_vol", "simple_forward_rate",
    "strip_forward_vols", "swap_npv", "term_to_premium", "year_fraction",
]
