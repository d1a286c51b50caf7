"""Exception hierarchy shared by all grassflow modules."""


class GrassflowError(Exception):
    """Base class for every error raised by grassflow."""


class DegreeMismatchError(GrassflowError):
    pass


class SpaceMismatchError(GrassflowError):
    pass


class MissingDataError(GrassflowError):
    """A closed-form object lacks data an operation needs (inverse, tangent, potential)."""


class MissingPotentialError(MissingDataError):
    pass


class NonFiniteError(GrassflowError):
    pass


class InvalidLoopError(GrassflowError):
    pass


class DegenerateVertexError(InvalidLoopError):
    pass


class CuspError(GrassflowError):
    """Consecutive edges are (numerically) antiparallel."""


class StepFailure(GrassflowError):
    pass


class ResolutionError(GrassflowError):
    pass


class ScenarioError(GrassflowError):
    """Scenario document does not match the schema or references unknown names."""
