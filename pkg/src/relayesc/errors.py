"""Exception types shared across the package."""


class RelayEscError(Exception):
    """Base class for all relayesc errors."""


class InvalidParameterError(RelayEscError, ValueError):
    """A single argument violates its precondition."""


class InvalidConfigError(RelayEscError, ValueError):
    """Controller or scenario configuration violates one or more invariants.

    Collects every violation so a bad config reports all problems at once.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InsufficientSamplesError(RelayEscError, ValueError):
    """Batch estimation was asked to solve with fewer rows than unknowns."""


class ConfigFileError(RelayEscError, ValueError):
    """A scenario configuration file is missing, malformed, or has unknown keys."""
