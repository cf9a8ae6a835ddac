"""Exception types raised across the package."""


class ErgoptError(Exception):
    """Base class for all errors raised by ergopt."""


# symbolic systems
class NonPrimitive(ErgoptError):
    pass


class StrandedSymbol(ErgoptError):
    pass


class RangeTooSmall(ErgoptError):
    pass


class NotAdmissible(ErgoptError):
    pass


class NoCycle(ErgoptError):
    pass


# max-plus
class PositiveCycle(ErgoptError):
    pass


# potentials
class MissingCylinderValue(ErgoptError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("no potential value for k-word(s): " + ", ".join(self.missing))


class RangeMismatch(ErgoptError):
    pass


class WordTooShort(ErgoptError):
    pass


class NormalizationFailure(ErgoptError):
    pass


# barriers
class DiagonalNotNegative(ErgoptError):
    pass


# pressure
class NoConvergence(ErgoptError):
    pass


class InsufficientPoints(ErgoptError):
    pass


class PrecisionTooLow(ErgoptError):
    pass


class EmptyTermList(ErgoptError):
    pass


# oracle
class TooLarge(ErgoptError):
    pass


# input files
class ParseError(ErgoptError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(ErgoptError):
    def __init__(self, message, missing=()):
        self.missing = list(missing)
        super().__init__(message)
