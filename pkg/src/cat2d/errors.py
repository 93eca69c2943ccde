"""Exception hierarchy shared by all modules."""


class Cat2dError(Exception):
    """Base class; ``exit_code`` is what the CLI returns when it escapes."""

    exit_code = 1


class InputError(Cat2dError):
    exit_code = 64


class PreconditionError(Cat2dError):
    exit_code = 65


class InvalidModelPoint(InputError):
    pass


class NotATriangle(PreconditionError):
    pass


class PerimeterTooLarge(PreconditionError):
    pass


class NonUniqueGeodesic(PreconditionError):
    pass


class InvalidComplex(InputError):
    pass


class InvalidPolygon(InputError):
    pass


class OutOfDomain(PreconditionError):
    pass


class Unreachable(Cat2dError):
    pass


class NotNullHomologous(Cat2dError):
    pass


class AmbiguousSupport(Cat2dError):
    pass


class CutConstructionFailed(Cat2dError):
    pass


class ResolutionExceeded(Cat2dError):
    """Search exhausted its sampling budget; ``report`` holds the densest parameters."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report or {}


class BudgetExceeded(Cat2dError):
    exit_code = 3

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class FanObstructed(Cat2dError):
    pass


class GlueMismatch(Cat2dError):
    pass


class ContainmentViolated(Cat2dError):
    def __init__(self, msg, worst=None):
        super().__init__(msg)
        self.worst = worst


class NeedsGeodesics(Cat2dError):
    pass


class NoDeath(Cat2dError):
    pass


class InvariantViolated(Cat2dError):
    """A checked invariant of a construction failed (never expected)."""


class Unsupported(Cat2dError):
    exit_code = 65
