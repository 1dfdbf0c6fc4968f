"""Exceptions raised by the model, the NFA checks and the explorer."""
from typing import Any, Optional


class HmcstError(RuntimeError):
    """Base class of every error raised by `hmcst_model`."""

    def __init__(self, message: str, **payload: Any):
        super().__init__(message)
        self.payload = payload


class IllegalStep(HmcstError):
    """A thread frame admits no transition for the requested choice.

    Always signals a bug in the protocol encoding (or a seeded mutation).
    """


class UnknownThread(HmcstError):
    pass


class MalformedTrace(HmcstError):
    pass


class MalformedNfa(HmcstError):
    pass


class NoOwnerStates(HmcstError):
    """Raised when an ownership property is asked of the next-field NFA."""


class DigestMismatch(HmcstError):
    pass


class ResourceBudgetExceeded(HmcstError):
    """The explorer hit its state cap. Never a silent truncation."""

    def __init__(self, message: str, states_visited: int = 0, **payload: Any):
        super().__init__(message, states_visited=states_visited, **payload)
        self.states_visited = states_visited


class ConformanceViolation(HmcstError):
    """A shared-field mutation that matches no NFA edge.

    `kind` is one of "NoSuchEdge", "WrongActor" or "WrongKind".
    """
    NO_SUCH_EDGE = "NoSuchEdge"
    WRONG_ACTOR = "WrongActor"
    WRONG_KIND = "WrongKind"

    def __init__(self, message: str, kind: str, label: Any = None, trace: Optional[Any] = None):
        super().__init__(message, kind=kind, label=label)
        self.kind = kind
        self.label = label
        self.trace = trace


class AssertionViolated(HmcstError):
    """A run assertion (mutual exclusion, deadlock, quiescence, ...) failed."""

    def __init__(self, message: str, assertion: str, trace: Optional[Any] = None, **payload: Any):
        super().__init__(message, assertion=assertion, **payload)
        self.assertion = assertion
        self.trace = trace
