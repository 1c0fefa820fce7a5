"""Exception hierarchy shared by every module."""


class JamSchedError(Exception):
    """Base class for all errors raised by jamsched."""


class InvalidLengths(JamSchedError):
    pass


class InvalidSelector(JamSchedError):
    pass


class InvalidScenario(JamSchedError):
    pass


class PolicyViolation(JamSchedError):
    pass


class UnsupportedLengthSystem(JamSchedError):
    pass


class AdversaryViolation(JamSchedError):
    pass


class InstanceTooLarge(JamSchedError):
    """The exact oracle refused an instance above its configured caps."""


class BudgetExceeded(JamSchedError):
    """Worst-case search hit its node limit."""


class AuditMismatch(JamSchedError):
    """An audit was applied to a trace it does not cover."""
