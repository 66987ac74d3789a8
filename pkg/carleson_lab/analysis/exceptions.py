"""Measure, quadrature and criterion exceptions"""


class BaseCarlesonException(Exception):
    DEFAULT_MESSAGE: str

    def __init__(self, message=None, *args):
        super().__init__(*args)
        self.message = message or self.DEFAULT_MESSAGE

    def __str__(self):
        return str(self.message)


class InvalidMeasure(BaseCarlesonException):
    DEFAULT_MESSAGE = "Measure description violates its invariants"


class UnsupportedMeasure(BaseCarlesonException):
    """The requested operation has no exact or quadrature path for one of the measure's components"""
    DEFAULT_MESSAGE = "Operation is not supported for this kind of measure"


class ZeroMassNearOrigin(BaseCarlesonException):
    DEFAULT_MESSAGE = "Radial measure has no mass near the origin: doubling ratio is undefined"


class QuadratureFailure(BaseCarlesonException):
    DEFAULT_MESSAGE = "Adaptive quadrature did not converge to the requested tolerance"


class EmptyFamily(BaseCarlesonException):
    DEFAULT_MESSAGE = "Square family is empty"


class NotDoubling(BaseCarlesonException):
    DEFAULT_MESSAGE = "Radial measure does not satisfy the doubling condition on the probe range"


class EmptyWindow(BaseCarlesonException):
    DEFAULT_MESSAGE = "Index window contains no usable terms"


class InvalidTiling(BaseCarlesonException):
    DEFAULT_MESSAGE = "Tile set cannot be built from the given sequence and extent"


class CarlesonViolation(BaseCarlesonException):
    """
    The measure is not dominated on the tile family's squares. The offending square is kept on the exception
        so callers can report it.
    """
    DEFAULT_MESSAGE = "Measure exceeds the comparison measure on a Carleson square"

    def __init__(self, message=None, *args, witness=None, ratio=None):
        super().__init__(message, *args)
        self.witness = witness
        self.ratio = ratio


class DivergentWeight(BaseCarlesonException):
    DEFAULT_MESSAGE = "Weight integral diverges at the probe point"


class DivergentNorm(BaseCarlesonException):
    DEFAULT_MESSAGE = "Norm integral diverges"


class GridTooCoarse(BaseCarlesonException):
    DEFAULT_MESSAGE = "Sample grid does not resolve the function (spectral tail or edge value too large)"


class NotSectorial(BaseCarlesonException):
    DEFAULT_MESSAGE = "Measure is not supported in the required sector"


class NotInStrip(BaseCarlesonException):
    DEFAULT_MESSAGE = "Measure is not supported in the strip"


class BalayageNotApplicable(BaseCarlesonException):
    """Outside p' < q the sweep of the measure may be infinite, so the balayage condition is not used"""
    DEFAULT_MESSAGE = "Balayage condition only applies when p' < q"


class ExponentWindow(BaseCarlesonException):
    DEFAULT_MESSAGE = "Exponents are outside the range covered by this criterion"


class InverseDoublingFails(BaseCarlesonException):
    DEFAULT_MESSAGE = "Radial measure does not satisfy the inverse doubling condition"


class EigenvalueInRightHalfPlane(BaseCarlesonException):
    DEFAULT_MESSAGE = "Every eigenvalue must lie in the open left half plane"


class SchemaError(BaseCarlesonException):
    """
    A spec file does not match the documented schema. Diagnostics are (line, field, message) triples; line is None
        when the problem concerns the file as a whole.
    """
    DEFAULT_MESSAGE = "Spec file does not match the schema"

    def __init__(self, message=None, *args, diagnostics=None):
        super().__init__(message, *args)
        self.diagnostics = list(diagnostics or [])

    def __str__(self):
        if not self.diagnostics:
            return str(self.message)
        lines = [str(self.message)]
        for line, field, msg in self.diagnostics:
            where = f'line {line}' if line is not None else 'file'
            lines.append(f'  {where}, {field}: {msg}')
        return '\n'.join(lines)


class StorageAccessException(BaseCarlesonException):
    DEFAULT_MESSAGE = "Specified file or folder does not exist"
