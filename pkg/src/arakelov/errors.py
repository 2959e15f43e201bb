"""Exception types shared across the package."""


class ArakelovError(ValueError):
    """Base class; carries an optional field path for CLI reporting."""

    def __init__(self, message="", field=None):
        super().__init__(message)
        self.field = field

    def __str__(self):
        msg = super().__str__()
        if self.field:
            return f"{msg} (at {self.field})"
        return msg


class ZeroInput(ArakelovError):
    pass


class ZeroVector(ArakelovError):
    pass


class RankDeficient(ArakelovError):
    pass


class DimensionMismatch(ArakelovError):
    pass


class Unsupported(ArakelovError):
    pass


class CapExceeded(ArakelovError):
    pass


class EmptySpace(ArakelovError):
    pass


class NotBig(ArakelovError):
    pass


class UnboundedBelow(ArakelovError):
    pass


class NonIntegral(ArakelovError):
    pass


class NonPositiveDegree(ArakelovError):
    pass


class ScheduleEmpty(ArakelovError):
    pass


class ModeMismatch(ArakelovError):
    pass


class SchemaError(ArakelovError):
    pass
