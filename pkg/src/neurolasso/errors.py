"""Exception hierarchy shared by every module."""


class NeuroLassoError(Exception):
    """Base class for all errors raised by the package."""


class NonFinite(NeuroLassoError, ValueError):
    pass


class ConstantColumn(NeuroLassoError, ValueError):
    def __init__(self, column):
        super().__init__(f"column {column} has zero variance")
        self.column = column


class BadK(NeuroLassoError, ValueError):
    pass


class DegenerateSplit(NeuroLassoError, ValueError):
    pass


class DimensionMismatch(NeuroLassoError, ValueError):
    pass


class SingleClass(NeuroLassoError, ValueError):
    pass


class FoldTooSmall(NeuroLassoError, ValueError):
    pass


class SingularDesign(NeuroLassoError, ValueError):
    pass


class BadRho(NeuroLassoError, ValueError):
    pass


class BadConfig(NeuroLassoError, ValueError):
    pass


class ZeroVariance(NeuroLassoError, ValueError):
    pass


class LengthMismatch(NeuroLassoError, ValueError):
    pass


class Undefined(NeuroLassoError, ValueError):
    """A metric is not defined for the given ground truth."""


class ParseError(NeuroLassoError, ValueError):
    def __init__(self, line, column, message="unparseable cell"):
        super().__init__(f"line {line}, column {column!r}: {message}")
        self.line = line
        self.column = column


class MissingTarget(NeuroLassoError, ValueError):
    pass


class NonBinaryTarget(NeuroLassoError, ValueError):
    pass


class NoConvergence(NeuroLassoError, RuntimeError):
    """Iteration budget exhausted; ``model`` holds the last iterate."""

    def __init__(self, iterations, model=None):
        super().__init__(f"no convergence after {iterations} iterations")
        self.iterations = iterations
        self.model = model
