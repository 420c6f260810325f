"""Exception hierarchy.

Each exception carries the CLI exit code used when it escapes a subcommand.
"""


class PencilError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class NotRegular(PencilError):
    """No candidate point certifies ``sE - A`` as invertible."""

    exit_code = 5


class SpectrumHit(PencilError):
    """``sE - A`` is numerically singular at the requested point."""

    exit_code = 6


class PoleAtMu(PencilError, ZeroDivisionError):
    exit_code = 6


class ContourTouchesSpectrum(PencilError):
    exit_code = 6


class MuInsideContour(PencilError):
    exit_code = 6


class ToleranceAmbiguous(PencilError):
    """A rank decision had no clear singular-value gap at the threshold."""

    exit_code = 3


class NotFiniteIndex(PencilError):
    exit_code = 7


class IllConditionedSplit(PencilError):
    exit_code = 7


class Infeasible(PencilError):
    """The initial value is not consistent.

    Attributes
    ----------
    violation : float
        The norm ``||E P0 x0||`` that exceeded the feasibility tolerance.
    """

    exit_code = 4

    def __init__(self, violation, message=None):
        self.violation = float(violation)
        super().__init__(message or f"inconsistent initial value, ||E P0 x0|| = {violation:.3e}")


class NotSquareSummable(PencilError):
    exit_code = 8


class NotInRange(PencilError):
    """A vector is not (numerically) in the range of the operator.

    Attributes
    ----------
    step : int or None
        Recursion step at which the solve failed, if applicable.
    """

    exit_code = 8

    def __init__(self, message, step=None, residual=None):
        self.step = step
        self.residual = residual
        super().__init__(message)


class CoefficientOverflow(PencilError):
    exit_code = 8
