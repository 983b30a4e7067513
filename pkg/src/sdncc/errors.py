"""Exception hierarchy shared by all sdncc modules."""


class SdnccError(Exception):
    """Base class for every error raised by this package."""


class InvalidSpec(SdnccError, ValueError):
    """A generator or catalog specification is malformed."""


class DisconnectedGraph(SdnccError):
    """Some user cannot be reached from a server or from the origin."""


class NoUsers(SdnccError, ValueError):
    pass


class InconsistentDecision(SdnccError, ValueError):
    """Traffic is routed to a server that does not host the service."""


class InvalidN(SdnccError, ValueError):
    pass


class InsufficientSamples(SdnccError, ValueError):
    pass


class DegenerateFit(SdnccError, ValueError):
    """The log-space fit produced a non-positive or non-finite exponent."""


class Infeasible(SdnccError):
    """Link capacities cannot carry the demand for the given placement."""


class BudgetExceeded(SdnccError):
    def __init__(self, q: int, budget: int):
        super().__init__(f"search space has Q={q} candidates, budget is {budget}")
        self.q = q
        self.budget = budget


class AllInfeasible(SdnccError):
    pass


class ConfigError(SdnccError):
    """Scenario file problem; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class DegenerateParamsWarning(UserWarning):
    """Zero storage/VM power makes every extra copy free."""
