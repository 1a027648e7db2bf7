"""Exception hierarchy shared by every qoesim module."""


class QoeSimError(Exception):
    """Base class for simulator errors."""


class DomainError(QoeSimError, ValueError):
    """An argument lies outside the domain of a formula."""


class ConfigError(QoeSimError, ValueError):
    """A configuration value is malformed or out of range."""


class InfeasibleSlaError(QoeSimError):
    """No profile satisfies a client's minimum MoS."""


class UnservableUeError(QoeSimError):
    """A UE's channel delivers zero bits per PRB."""


class InfeasibleError(QoeSimError):
    """A resource budget cannot cover the mandatory minimum allocations.

    ``shortfall`` is the amount (PRBs or Mbps) by which the budget falls short.
    """

    def __init__(self, message, shortfall=0.0):
        super().__init__(message)
        self.shortfall = shortfall


class InstanceTooLargeError(QoeSimError):
    """Exhaustive enumeration would exceed the configured guard."""
