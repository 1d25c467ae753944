"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation problems exit with 1,
solver trouble with 2 and a violated guaranteed inequality with 3.
"""


class GraphError(ValueError):
    """Invalid input: malformed graph, measure, function or metric."""


class GraphFormatError(GraphError):
    """A text file could not be parsed."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class DisconnectedGraphError(GraphError):
    """Metric operations require a connected graph."""


class NotIntrinsicError(GraphError):
    """The pseudo metric violates the intrinsic condition for the measure."""


class SolverError(RuntimeError):
    """Linear solve did not converge, or the result is out of tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class GuaranteeViolation(RuntimeError):
    """An inequality that the theory guarantees came out false (a bug signal)."""
