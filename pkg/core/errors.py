class QuartixError(Exception):
    """Base class for every error raised by the quartix engines."""


class FieldError(QuartixError):
    pass


class FieldMismatchError(FieldError):
    pass


class FieldDivisionByZero(FieldError, ZeroDivisionError):
    pass


class PolynomialError(QuartixError):
    pass


class ParseError(QuartixError):
    """Raised by the expression parser; carries the offending position."""

    def __init__(self, message: str, position: int = -1):
        self.position = position
        if position >= 0:
            message = f"{message} (at position {position})"
        super().__init__(message)


class CovariantError(QuartixError):
    pass


class InvariantError(QuartixError):
    pass


class CalibrationError(InvariantError):
    pass


class FrameError(QuartixError):
    pass


class SingularCurveError(QuartixError):
    pass


class NotOnCurveError(QuartixError):
    pass


class StrataError(QuartixError):
    pass
