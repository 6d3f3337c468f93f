"""Exception types raised across the package."""


class ToruslabError(Exception):
    """Base class for all package errors."""


class ValidationError(ToruslabError, ValueError):
    """An input violates a documented precondition."""


class CapExceeded(ToruslabError):
    """A configured enumeration or size cap would be exceeded."""


class DepthCapExceeded(CapExceeded):
    """The generic maximal evaluator cannot handle this depth or spacing."""


class BoundaryPoint(ValidationError):
    """A point lies on a cell boundary under strict open-cell semantics."""


class NotDyadic(ValidationError):
    """A cube expected to be dyadic has a non-grid translation."""


class IrrationalPower(ToruslabError, ArithmeticError):
    """A rational raised to a rational exponent is not rational."""


class NonPositive(ValidationError):
    """A weight factor has a value that is not strictly positive."""


class NonDyadicBreakpoints(ValidationError):
    """A simple function has breakpoints whose denominators are not powers of two."""


class ZeroFunction(ValidationError):
    """A quotient was requested for the zero function."""


class TooManyCubes(ValidationError):
    """More shifted cubes were requested than the cube has nonfree coordinates."""


class EpsilonOutOfRange(ValidationError):
    """The overlap parameter is outside (0, 1/2]."""


class WeightDepthMismatch(ValidationError):
    """A weight depends on coordinates the configuration does not constrain."""


class InfeasibleAnchor(CapExceeded):
    """No anchor cube fits the disjoint layout below the sizelevel cap."""


class ParamOrder(ValidationError):
    """Two parameters are given in the wrong order."""


class PreconditionViolated(ValidationError):
    """A numeric precondition of an inequality check fails."""


class NonIntegrableDual(ValidationError):
    """The dual weight power is not integrable on some cube."""


class InvalidN(ValidationError):
    """Some N_j is below the minimal admissible N."""


class NotIntegrable(ValidationError):
    """A real-line weight is not locally integrable."""


class TailDiverges(ValidationError):
    """The periodization coefficients are not summable against the weight."""


class RangeEmpty(ValidationError):
    """No requested exponent lies in the admissible reverse Hoelder range."""
