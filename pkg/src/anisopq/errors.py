"""Exception hierarchy shared by all solver stages."""


class AnisoPQError(Exception):
    """Base class for every error raised by the package."""


class InvalidMesh(AnisoPQError):
    pass


class InvalidField(AnisoPQError):
    pass


class NumericFailure(AnisoPQError):
    pass


class ZeroWeight(AnisoPQError):
    pass


class InvalidWeight(AnisoPQError):
    pass


class InvalidEigenvalue(AnisoPQError):
    pass


class NoConvergence(AnisoPQError):
    """An iteration hit its budget. ``history`` holds whatever was recorded."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class LineSearchFailure(AnisoPQError):
    pass


class TrivialSolution(AnisoPQError):
    pass


class OrderingViolation(AnisoPQError):
    pass


class HypothesisError(AnisoPQError):
    """Raised by pipeline stages that refuse to run on data failing H0/H1."""

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = list(failed)


class ParseError(AnisoPQError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(AnisoPQError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
