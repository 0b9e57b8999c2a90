__all__ = (
    "ConfigError",
    "HeraldError",
    "NormalizationError",
    "NumericalError",
    "PreconditionError",
    "TruncationError",
    "UnresolvablePeakError",
    "ZeroProbabilityOutcomeError",
)


class HeraldError(Exception):
    pass


class ConfigError(HeraldError, ValueError):
    pass


class PreconditionError(HeraldError, ValueError):
    pass


class NumericalError(HeraldError, ArithmeticError):
    pass


class TruncationError(NumericalError):
    pass


class NormalizationError(NumericalError):
    pass


class ZeroProbabilityOutcomeError(NumericalError):
    pass


class UnresolvablePeakError(NumericalError):
    pass
