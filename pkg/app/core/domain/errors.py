"""Exception hierarchy shared by every layer of the analysis pipeline."""
from typing import Optional


class WanderError(Exception):
    """Base class for all errors raised by the oscillation toolkit."""


class ExpressionSyntaxError(WanderError):
    """Malformed coefficient expression; `offset` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(WanderError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier '{name}' at offset {offset}")
        self.name = name
        self.offset = offset


class ExpressionDomainError(WanderError):
    """Evaluation left the real domain (log of non-positive, division by zero, overflow...)."""

    def __init__(self, message: str, t: Optional[float] = None):
        suffix = f" at t={t!r}" if t is not None else ""
        super().__init__(f"{message}{suffix}")
        self.t = t


class IntegrationError(WanderError):
    pass


class StepSizeUnderflowError(IntegrationError):
    def __init__(self, message: str, t: float):
        super().__init__(f"step size underflow at t={t!r}: {message}")
        self.t = t


class OutOfHorizonError(WanderError):
    def __init__(self, t: float, t_min: float, t_max: float):
        super().__init__(f"t={t!r} outside integrated horizon [{t_min!r}, {t_max!r}]")
        self.t = t


class PoleError(WanderError):
    """The phase point projects onto a pole of the spherical system, where phi is undefined."""

    def __init__(self, message: str = "state projects onto a pole", t: Optional[float] = None):
        suffix = f" at t={t!r}" if t is not None else ""
        super().__init__(f"{message}{suffix}")
        self.t = t


class PreconditionError(WanderError, ValueError):
    pass


class ConstructionFailedError(WanderError):
    pass


class IntegrandSignError(WanderError):
    def __init__(self, phi: float, value: float):
        super().__init__(f"time reparameterization integrand not negative at phi={phi!r} (value {value!r})")
        self.phi = phi
        self.value = value


class TrackMismatchError(WanderError):
    def __init__(self, max_deviation: float, t: float):
        super().__init__(f"track deviates from prescribed curve by {max_deviation!r} at t={t!r}")
        self.max_deviation = max_deviation
        self.t = t


class DegenerateZeroError(WanderError):
    def __init__(self, t: float):
        super().__init__(f"second derivative vanishes at degenerate zero t={t!r}; solution would be identically zero")
        self.t = t
