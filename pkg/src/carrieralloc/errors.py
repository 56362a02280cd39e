"""Exception hierarchy shared by the allocation modules."""


class AllocationError(Exception):
    """Base class for every error raised by carrieralloc."""


class InvalidParameterError(AllocationError, ValueError):
    pass


class DomainError(AllocationError, ValueError):
    """A function was evaluated outside its domain (e.g. log-utility at r <= 0)."""


class DuplicateIdError(AllocationError, ValueError):
    pass


class InfeasibleReservationsError(AllocationError, ValueError):
    pass


class NoConvergenceError(AllocationError, RuntimeError):
    """Dual bisection ran out of iterations.

    ``bracket`` holds the last (low, high) price interval and ``residual`` the
    budget mismatch at its midpoint.
    """

    def __init__(self, message, bracket=None, residual=None):
        super().__init__(message)
        self.bracket = bracket
        self.residual = residual


class StageError(AllocationError):
    """Wraps a solver failure with the carrier stage it happened in."""

    def __init__(self, stage_index, carrier_id, cause):
        super().__init__(f"stage {stage_index} (carrier {carrier_id}): {cause}")
        self.stage_index = stage_index
        self.carrier_id = carrier_id
        self.cause = cause


class TooManyParticipantsError(AllocationError, ValueError):
    pass


class NonFiniteGradientError(AllocationError, FloatingPointError):
    pass


class ScenarioError(AllocationError, ValueError):
    """Scenario file could not be parsed or failed validation."""
