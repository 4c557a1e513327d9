"""Exception hierarchy shared by every module of the package."""


class BryantFluxError(Exception):
    """Base class for all errors raised by bryantflux."""


# series
class WeightMismatch(BryantFluxError, TypeError):
    pass


class DivisionByZeroFunction(BryantFluxError, ZeroDivisionError):
    pass


class ZeroFunction(BryantFluxError, ValueError):
    pass


class ConstantFunction(BryantFluxError, ValueError):
    pass


# cmc
class ConstantGaussMap(BryantFluxError, ValueError):
    pass


class MultivaluedEntry(BryantFluxError, ValueError):
    """A requested entry carries a non-integer power of z."""


class MissingSecondaryGaussMap(BryantFluxError, ValueError):
    pass


# ends
class UnknownEnd(BryantFluxError, KeyError):
    pass


class DegenerateNormalization(BryantFluxError, ValueError):
    pass


class UnsupportedMultiplicity(BryantFluxError, ValueError):
    pass


class NotTypeII(BryantFluxError, ValueError):
    pass


class InconsistentEndData(BryantFluxError, ValueError):
    pass


# flux
class UndeclaredPole(BryantFluxError, ValueError):
    def __init__(self, points):
        self.points = list(points)
        super().__init__(f"connection form has poles outside the declared ends: {self.points}")


class RadiusTooLarge(BryantFluxError, ValueError):
    pass


# surface
class PathHitsSingularity(BryantFluxError, ValueError):
    pass


class ExcessiveDrift(BryantFluxError, ArithmeticError):
    pass


class NotPositiveDefinite(BryantFluxError, ValueError):
    pass


class IoFailure(BryantFluxError, OSError):
    pass


# spec files
class ParseError(BryantFluxError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class UnknownParameter(ParseError):
    pass


class IrregularEnd(BryantFluxError, ValueError):
    pass
