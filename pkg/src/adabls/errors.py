"""Exception types raised across the package."""


class NonDescentDirection(ValueError):
    """The search direction does not decrease the objective to first order."""


class InvalidViolation(ValueError):
    """A violation value outside the domain of an adaptive factor."""


class CapExceeded(RuntimeError):
    """Backtracking hit ``max_adjustments`` without finding a feasible step.

    ``result`` holds the last :class:`~adabls.linesearch.LineSearchResult`;
    when raised out of :func:`adabls.optimizers.run`, ``trace`` holds the
    partial run trace.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
        self.trace = None


class InvalidStrongConvexity(ValueError):
    pass


class NoProxAvailable(TypeError):
    pass


class DimensionMismatch(ValueError):
    pass


class RankOutOfRange(ValueError):
    pass


class ConvergenceFailure(RuntimeError):
    pass


class ParseError(ValueError):
    """Malformed input; ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ConfigError(ValueError):
    pass
