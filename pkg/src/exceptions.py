"""
Error hierarchy for the planning pipeline.

Every error raised on purpose by a service derives from StlIncError so the CLI
and the HTTP routes can map user-facing failures to exit codes / status codes
without catching unrelated exceptions.
"""

from typing import Optional, Sequence


class StlIncError(ValueError):
    """Base class for all pipeline errors"""


class SpecSyntaxError(StlIncError):
    """Specification text does not match the grammar"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")


class InvalidIntervalError(StlIncError):
    """Temporal interval with lo > hi or a negative bound"""


class FragmentViolationError(StlIncError):
    """Formula lies outside the supported fragment"""

    def __init__(self, message: str, paths: Sequence[str] = ()):
        self.paths = list(paths)
        super().__init__(message)


class SignalTooShortError(StlIncError):
    """Trajectory does not cover the evaluation window"""


class EnumerationCapError(StlIncError):
    """Assignment space larger than the configured cap"""

    def __init__(self, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"assignment space of size {size} exceeds cap {cap}")


class UnrollCapError(StlIncError):
    """Always-unrolling would produce more constraints than allowed"""


class UnboundVariableError(StlIncError):
    """Instantiation is missing a value for a time variable"""


class UnknownVariableError(StlIncError):
    """Time variable is not housed by any interval record"""


class MalformedBoundError(StlIncError):
    """Constraint bound does not have the shape a rewrite rule expects"""


class UnknownRegionError(StlIncError):
    """Proposition names a region that the environment does not define"""


class UnknownChannelError(StlIncError):
    """Linear predicate reads a signal channel the trajectory does not carry"""


class InconsistentWindowsError(StlIncError):
    """Bindings leave a satisfaction window empty"""


class ScheduleOrderError(StlIncError):
    """Precedence relation contains a cycle"""


class PlannerContractError(StlIncError):
    """Planner returned a segment that does not satisfy its atomic task"""


class EnvironmentFileError(StlIncError):
    """Environment document is malformed"""
