"""Domain errors.

Every error raised on purpose by the services derives from ``PostselectError``;
the command line maps it to exit status 1. Findings produced by validation
(well-formedness, canonical form) are returned as data instead.
"""

from typing import List, Optional


class PostselectError(Exception):
    """Base class for domain failures."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class MachineFileError(PostselectError):
    """Machine description text could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(f"{location}{message}")


class HeadBoundError(PostselectError):
    """A head left the region the machine model guarantees."""

    def __init__(self, message: str, path: Optional[List[str]] = None):
        self.path = list(path or [])
        if self.path:
            message = f"{message} (path prefix: {' -> '.join(self.path)})"
        super().__init__(message)


class SpaceBoundError(PostselectError):
    """The work tape grew beyond the configured cap."""


class UndefinedTransitionError(PostselectError):
    """A reached (state, input symbol, work symbol) triple has no rules."""


class PostselectionError(PostselectError):
    """The post-selection event has probability 0."""


class CanonicalizationError(PostselectError):
    """A machine cannot be brought into canonical form for the given clock."""


class ConfigurationCapError(PostselectError):
    """The configuration set is larger than the configured cap."""


class NoSuccessorError(PostselectError):
    """Successors were requested for a halting configuration."""


class SuccessorOutOfBoundsError(PostselectError):
    """A reachable configuration steps outside the configuration bounds."""


class NotCanonicalError(PostselectError):
    """Probability mass remains outside C_a and C_r at the clock."""


class EncodingError(PostselectError):
    """A configuration field does not fit its layout."""


class GateEmbeddingError(PostselectError):
    """A gate cannot be dilated into a post-selected unitary."""


class PostselectionUnderflowError(PostselectError):
    """The state retained after a post-selection is numerically zero."""


class SeparabilityError(PostselectError):
    """Wires expected in |0> still carry amplitude."""


class UndefinedDecisionError(PostselectError):
    """The acceptance probability is exactly 1/2."""


class PromiseViolationError(PostselectError):
    """An input violates the promise a construction relies on."""


class AmplificationBoundError(PostselectError):
    """The amplified decision missed its proven error bound."""
