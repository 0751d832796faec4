"""Exception hierarchy shared by all modules."""


class RosterLearnError(Exception):
    pass


class SchemaError(RosterLearnError, ValueError):
    """Unknown dimension or label, or two schemas that do not line up."""


class ArityError(RosterLearnError, ValueError):
    pass


class UsageError(RosterLearnError, ValueError):
    """Bad dimension subsets passed to an aggregator or learner."""


class RankError(UsageError):
    pass


class OrderingError(UsageError):
    pass


class ParseError(RosterLearnError, ValueError):
    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class GenerationError(RosterLearnError, RuntimeError):
    """Raised when the repair budget runs out before ``requested`` samples exist.

    ``samples`` holds the schedules that were produced before giving up.
    """

    def __init__(self, samples, requested):
        self.samples = samples
        self.requested = requested
        super().__init__(
            f"generated {len(samples)} of {requested} schedules within the repair budget"
        )
