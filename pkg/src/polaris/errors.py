"""Exception types shared across the toolkit."""


class PolarisError(Exception):
    """Base class for all toolkit errors."""


class AlphabetConflict(PolarisError):
    """A shared event id carries conflicting controllability flags."""


class AlphabetMismatch(PolarisError):
    """Two automata that must share an alphabet do not."""


class BoundTooLarge(PolarisError):
    """A bounded language enumeration exceeded its node budget."""


class CoverageError(PolarisError):
    """The two local event sets do not cover the automaton alphabet."""


class NondeterministicInput(PolarisError):
    """An operation that requires a deterministic automaton got an NFA."""


class NotControllable(PolarisError):
    """The specification disables an uncontrollable plant event."""


class NotDecomposable(PolarisError):
    """A supervisor expected to decompose into local parts does not."""


class IndexOutOfRange(PolarisError):
    """A region index lies outside the partition grid."""


class OutOfHorizon(PolarisError):
    """A point lies outside the control-horizon disk."""


class OutsideRegion(PolarisError):
    """A point lies outside the region a controller was designed for."""


class Infeasible(PolarisError):
    """Controller sign constraints conflict with the velocity bound."""


class HorizonViolation(PolarisError):
    """A follower left its control-horizon disk during simulation."""


class SupervisorBlocked(PolarisError):
    """No controllable event is enabled and none is pending."""


class InvalidToken(PolarisError):
    """A token in the automaton exchange format is malformed."""


class ParseError(PolarisError):
    """A config or automaton file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class ValidationError(PolarisError):
    """A parsed config violates an invariant."""
