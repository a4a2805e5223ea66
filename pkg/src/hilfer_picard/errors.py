"""Exception types shared across the package."""

from __future__ import annotations


class HilferError(Exception):
    """Base class for package-specific errors."""


class MeshMismatchError(HilferError, ValueError):
    """Two grid functions do not share a mesh (or weight exponent)."""


class OutOfDomainError(HilferError, ValueError):
    """Evaluation point outside the function's interval."""


class SingularEndpointError(HilferError, ValueError):
    """Pointwise value requested at the singular left endpoint."""


class CoverageError(HilferError, ValueError):
    """A solved prefix does not cover the requested interval."""


class SeriesConvergenceError(HilferError, RuntimeError):
    """A series evaluation exceeded its term budget without converging."""


class PicardConvergenceError(HilferError, RuntimeError):
    """Successive approximations did not reach the stopping tolerance.

    Carries the last measured increment, the theoretical contraction
    factor of the failing subinterval, and the partial report for
    diagnosis.
    """

    def __init__(self, message, last_increment, contraction_factor, report=None):
        super().__init__(message)
        self.last_increment = last_increment
        self.contraction_factor = contraction_factor
        self.report = report


class RhsSyntaxError(HilferError, ValueError):
    """Expression text failed to parse.

    ``offset`` is the byte offset of the failure, ``expected`` a short
    description of what the parser was looking for.
    """

    def __init__(self, message, offset, expected=None):
        super().__init__(message)
        self.offset = offset
        self.expected = expected


class RhsNameError(HilferError, ValueError):
    """Unknown identifier in an expression."""

    def __init__(self, message, name, offset=None):
        super().__init__(message)
        self.name = name
        self.offset = offset


class EvalDomainError(HilferError, ValueError):
    """An expression node was evaluated outside its mathematical domain."""

    def __init__(self, message, node=None, x=None, y=None):
        super().__init__(message)
        self.node = node
        self.x = x
        self.y = y


class ValidationError(HilferError, ValueError):
    """A problem file or parameter set violates the documented schema.

    ``field`` names the offending entry.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
