"""Exception hierarchy shared by the solver modules."""


class StagfvError(Exception):
    """Base class for all solver errors."""


class ConfigurationError(StagfvError):
    """Invalid run configuration or invalid constructor arguments."""


class DomainError(StagfvError):
    """Physically inadmissible values (non-positive density, energy, ...)."""


class NumericalError(StagfvError):
    """A linear or nonlinear solve failed in a way that should not happen."""


class CflViolation(StagfvError):
    """An explicit step was asked to run past its stability limit."""

    def __init__(self, dt: float, dt_required: float):
        self.dt = dt
        self.dt_required = dt_required
        super().__init__(
            f"time step {dt:.6e} exceeds the advective limit {dt_required:.6e}"
        )


class StepFailure(StagfvError):
    """A time step could not be completed; carries solver diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
