"""Exception hierarchy shared by the simulators, theory and CLI."""


class NetKineticsError(Exception):
    """Base class for all package errors."""


class DomainError(NetKineticsError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(NetKineticsError, ValueError):
    """An operation was called with an inconsistent combination of arguments."""


class ConfigError(NetKineticsError, ValueError):
    """Model parameters violate the model's admissible ranges."""


class RegimeError(NetKineticsError):
    """The requested quantity does not exist in this kernel/parameter regime."""


class StateError(NetKineticsError, RuntimeError):
    """The data structure is not in a state that allows the operation."""


class ConsistencyError(NetKineticsError, RuntimeError):
    """Internal bookkeeping was found corrupted. The run must be aborted."""
