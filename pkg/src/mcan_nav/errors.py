"""Exception hierarchy shared by every subsystem."""


class McanError(Exception):
    """Base class for all package errors."""


class ConfigurationError(McanError, ValueError):
    """Invalid network geometry, parameters or run configuration."""


class UndecodableError(McanError):
    """Activity carries no position information (all zero)."""


class NetworkCollapse(McanError):
    """Attractor activity vanished during an update."""


class OutOfRangeError(McanError, ValueError):
    """A motion command exceeds what the network can represent in one step."""


class InputError(McanError, ValueError):
    """Malformed caller input (mismatched lengths, unordered timestamps...)."""


class DataFormatError(McanError, ValueError):
    """A file does not follow its documented schema."""


class PlanningError(McanError):
    """No route can be produced between the requested cells."""


class TraversalTimeout(McanError):
    """The vehicle did not reach the goal within its step budget.

    The samples recorded before giving up are kept on ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
