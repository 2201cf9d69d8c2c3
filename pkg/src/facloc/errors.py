"""Exception hierarchy shared by every module of the package."""


class FaclocError(Exception):
    """Base class for all package errors."""


class ParseError(FaclocError):
    pass


class MetricViolation(FaclocError):
    """Distance matrix breaks symmetry or the triangle inequality.

    ``triple`` holds the worst offending node triple (a, b, c) when known.
    """

    def __init__(self, message, triple=None, excess=0.0):
        super().__init__(message)
        self.triple = triple
        self.excess = excess


class DimensionMismatch(FaclocError):
    pass


class InvalidConfig(FaclocError):
    pass


class UnknownId(FaclocError):
    pass


class MissingPenalty(FaclocError):
    pass


class MissingCapacity(FaclocError):
    pass


class UnknownFacility(FaclocError):
    pass


class Infeasible(FaclocError):
    pass


class Unbounded(FaclocError):
    pass


class IterationLimit(FaclocError):
    pass


class NotFeasibleFractional(FaclocError):
    pass


class ScalePreconditionViolated(FaclocError):
    pass


class InvalidSolution(FaclocError):
    pass


class Overlap(FaclocError):
    pass


class InfeasibleInput(FaclocError):
    pass


class CardinalityExceeded(FaclocError):
    pass


class TooLarge(FaclocError):
    pass
