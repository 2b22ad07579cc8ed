"""Exception hierarchy shared by every catk module."""

from __future__ import annotations


class CatkError(Exception):
    """Base class for all toolkit errors."""


class CurvatureMismatchError(CatkError):
    pass


class DegenerateTriangleError(CatkError):
    pass


class InvalidSidesError(CatkError):
    pass


class InvalidGluingError(CatkError):
    pass


class InvalidFaceError(CatkError):
    pass


class InvalidComplexError(CatkError):
    pass


class InvalidSeamError(CatkError):
    pass


class LocationError(CatkError):
    pass


class EmptyRegionError(CatkError):
    pass


class NoPathError(CatkError):
    pass


class OutsideRegionError(CatkError):
    pass


class NotRectifiablyConnectedError(CatkError):
    pass


class ConvergenceError(CatkError):
    """Raised when an iterative geodesic computation runs out of budget.

    The best path found so far is kept on ``best`` so callers can still use it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InvalidSeedError(CatkError):
    pass


class InvalidCurveError(CatkError):
    pass


class InvalidTriangleError(CatkError):
    pass


class InvalidScenarioError(CatkError):
    pass


class ScenarioSchemaError(InvalidScenarioError):
    """Scenario document failed schema validation; ``field`` names the offender."""

    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line
