"""Exception hierarchy shared by all jjswitch modules."""


class JJSwitchError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(JJSwitchError, ValueError):
    """A constructor or operation received an invalid parameter."""


class DomainError(JJSwitchError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateBarrierError(DomainError):
    """The washboard barrier has degenerated to an inflection (bias = 1)."""


class ConfigError(JJSwitchError):
    """A run configuration file or override is invalid."""


class NumericalError(JJSwitchError):
    """A numerical procedure failed (non-finite values, breakdown, ...)."""


class ConvergenceError(NumericalError):
    """An iterative solver did not converge to the requested accuracy."""


class NonRenormalizableError(NumericalError):
    """Post-measurement state has (numerically) no surviving norm."""


class InsufficientDecayError(NumericalError):
    """A decay trace has no usable exponential tail to fit."""


class ProtocolError(NumericalError):
    """A measurement protocol run aborted; carries the partial record."""

    def __init__(self, message, partial_record=None):
        super().__init__(message)
        self.partial_record = partial_record
