"""Exception types shared across the package."""


class DomainError(ValueError):
    """An economic primitive was evaluated outside its admissible domain."""


class InfeasibleTransitionError(DomainError):
    """The implicit capital transition has no root on the search bracket.

    Carries the residuals at both bracket endpoints so the caller can see
    which way the transition fails.
    """

    def __init__(self, message, residual_lo, residual_hi):
        super().__init__(message)
        self.residual_lo = residual_lo
        self.residual_hi = residual_hi


class SimulationError(DomainError):
    """Forward simulation violated a model relation at a specific period."""

    def __init__(self, period, relation, message):
        super().__init__(f"period {period}: {relation}: {message}")
        self.period = period
        self.relation = relation


class ConfigError(ValueError):
    """A scenario/config document is malformed (unknown or missing keys)."""
