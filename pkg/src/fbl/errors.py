"""Exception types shared across the package."""


class FBLError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(FBLError):
    """Coordinate array length does not match the declared space."""


class SpaceMismatch(FBLError):
    """Two objects that must share a space do not."""


class CapExceeded(FBLError):
    """A tuple is longer than the exact-enumeration cap.

    Sign-pattern enumeration costs 2^(m-1); beyond the cap the exact value
    is refused rather than silently approximated.
    """


class RewriteBudgetExceeded(FBLError):
    """Difference-of-joins rewriting blew past the join-width budget."""

    def __init__(self, message, width):
        super().__init__(message)
        self.width = width


class ParseError(FBLError):
    """Syntax error in the term grammar, with source position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InadmissibleTuple(FBLError):
    """A certificate tuple has admissibility above 1; refused, never scaled."""


class InvariantViolation(FBLError):
    """A postcondition that theory guarantees failed; signals a bug."""


class MajorantInfeasible(FBLError):
    """The majorant LP stayed infeasible after atom enrichment.

    Carries the functional witnessing the violation; typically means the
    supplied norm proxy underestimates the true norm.
    """

    def __init__(self, message, functional=None, violation=None):
        super().__init__(message)
        self.functional = functional
        self.violation = violation
