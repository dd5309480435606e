"""Exception types shared across the toolkit."""


class OrliczError(Exception):
    """Base class for toolkit errors."""


class ParseError(OrliczError):
    pass


class NotMonotone(OrliczError):
    pass


class NotYoung(OrliczError):
    pass


class Unbounded(OrliczError):
    pass


class DivergentIntegral(OrliczError):
    """An integral is infinite.  ``region`` names where ("tail", "zero", "breakpoint")."""

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class DivergentAlpha(DivergentIntegral):
    pass


class DivergentBeta(DivergentIntegral):
    pass


class NoFiniteGauge(OrliczError):
    pass


class UnsupportedOperator(OrliczError):
    pass


class RegimeUnsupported(OrliczError):
    pass


class IncompatibleForms(OrliczError):
    pass


class RangeError(OrliczError):
    pass


class ConfigError(OrliczError):
    pass
