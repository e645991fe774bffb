"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """An argument is outside its documented domain."""


class NoParticipantsError(RuntimeError):
    """An auction was run with no admissible bids."""


class ProtocolOrderError(RuntimeError):
    """A club-protocol step was invoked out of phase order."""


class ScenarioUnavailableError(RuntimeError):
    """A deviation scenario is disabled by the environment configuration."""


class PreconditionViolationError(ValueError):
    """A verification routine was handed inputs that fail its precondition."""


class ConfigError(ValueError):
    """A run configuration failed to parse or validate.

    ``line`` is the 1-based line number when the failure is tied to a
    specific line of the config file, else None.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
