"""Exception hierarchy.

Configuration problems (bad inputs, missing data, inconsistent wiring) derive
from ``ConfigurationError``; failures of the numerics themselves (root finding,
calibration, arbitrage in quotes) derive from ``NumericalError``.  The CLI maps
the two families to exit codes 2 and 3.
"""


class MulticurveError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(MulticurveError, ValueError):
    pass


class NumericalError(MulticurveError, ArithmeticError):
    pass


class OrderingError(ConfigurationError):
    pass


class ScheduleError(ConfigurationError):
    pass


class DomainError(ConfigurationError):
    """Argument outside the mathematical domain of a formula."""


class SpecError(ConfigurationError):
    """Malformed bootstrap specification or quote list."""


class CoverageError(ConfigurationError):
    """A curve does not span the dates an instrument needs."""


class ExtrapolationError(CoverageError, DomainError):
    pass


class ContextError(ConfigurationError):
    pass


class BootstrapError(NumericalError):
    def __init__(self, message, pillar=None):
        super().__init__(message)
        self.pillar = pillar


class CalibrationError(NumericalError):
    def __init__(self, message, best=None, objective=None):
        super().__init__(message)
        self.best = best
        self.objective = objective


class ArbitrageError(NumericalError):
    def __init__(self, message, maturity=None, strike=None):
        super().__init__(message)
        self.maturity = maturity
        self.strike = strike


class StrippingError(NumericalError):
    pass
