"""Exception hierarchy shared by all modules."""


class RfiError(Exception):
    """Base class for every error raised by this package."""


class InvalidOperatorError(RfiError, ValueError):
    pass


class DomainError(RfiError, ValueError):
    pass


class DegenerateSourceError(RfiError):
    pass


class InvalidChannelError(RfiError, ValueError):
    pass


class InconsistentModelError(RfiError):
    pass


class SingularPreparationError(RfiError):
    """The sixteen-equation system cannot be inverted reliably."""

    def __init__(self, message, condition):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class NoSignalError(RfiError):
    pass


class MalformedProgramError(RfiError, ValueError):
    pass


class NumericalFailureError(RfiError):
    pass


class DataInconsistencyError(RfiError):
    pass
