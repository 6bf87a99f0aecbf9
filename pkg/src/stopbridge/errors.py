"""Exception hierarchy shared by all stopbridge modules."""


class StopbridgeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(StopbridgeError):
    """Array shapes are inconsistent with the declared state space or horizon."""


class RowSumViolation(StopbridgeError):
    """A transition row (or a probability vector) does not sum to one."""


class NegativeEntry(StopbridgeError):
    """A probability or mass entry is negative."""


class InitialMassOnAbsorbing(StopbridgeError):
    """An initial distribution puts mass on an absorbing state."""


class MassExceedsOne(StopbridgeError):
    """Total target first-arrival mass exceeds one."""


class DivisionBlowup(StopbridgeError):
    """A positive target requires dividing by zero: the problem is infeasible."""


class NotConverged(StopbridgeError):
    """Iteration hit its budget before meeting the tolerance.

    Carries the last iterate (``scalings`` or ``law``) and ``diagnostics``
    when those exist, so callers can inspect how far the run got.
    """

    def __init__(self, message, scalings=None, diagnostics=None, law=None):
        super().__init__(message)
        self.scalings = scalings
        self.diagnostics = diagnostics
        self.law = law


class ScalingMismatch(StopbridgeError):
    """Scaling vectors do not match the prior's dimensions."""


class NonStochasticOutput(StopbridgeError):
    """A synthesized reachable row deviates from sum one beyond tolerance."""


class Overflow(StopbridgeError):
    """beta * max|U| exceeds the exp() range guard."""


class StateSpaceTooLarge(StopbridgeError):
    """Path enumeration would exceed the configured cap."""
