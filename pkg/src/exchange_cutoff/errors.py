"""Exception hierarchy shared across the package."""


class ExchangeCutoffError(Exception):
    """Base class for all package errors."""


class InvalidParameter(ExchangeCutoffError, ValueError):
    pass


class AsymmetricLaw(ExchangeCutoffError, ValueError):
    pass


class DegenerateLaw(ExchangeCutoffError, ValueError):
    pass


class IndexOutOfRange(ExchangeCutoffError, IndexError):
    pass


class DimensionMismatch(ExchangeCutoffError, ValueError):
    pass


class UnsupportedSize(ExchangeCutoffError, ValueError):
    pass


class ThresholdBelowFloor(ExchangeCutoffError, ValueError):
    """Threshold is below the pile discard floor, so discarded mass could qualify."""


class CapExceeded(ExchangeCutoffError, MemoryError):
    """Pile storage would grow past the configured hard cap."""


class BudgetExceeded(ExchangeCutoffError):
    """Requested simulation work exceeds the configured event budget."""


class ConfigError(ExchangeCutoffError, ValueError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
