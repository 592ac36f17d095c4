"""Exception hierarchy shared by the solvers and the CLI."""


class FbvpError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FbvpError, ValueError):
    """Parameters outside the region where a formula or problem is defined."""


class IntegrationError(FbvpError):
    """A right-hand side evaluation produced a non-finite value."""

    def __init__(self, message, x=None, step_index=None):
        super().__init__(message)
        self.x = x
        self.step_index = step_index


class NoCrossingError(FbvpError):
    """The event locator never saw the target value within the step budget."""


class DegenerateInterpolationError(FbvpError):
    pass


class InvalidLambdaError(FbvpError):
    pass


class ToleranceNotMetError(FbvpError):
    def __init__(self, message, terminal_slope):
        super().__init__(message)
        self.terminal_slope = terminal_slope


class NotInClassError(FbvpError):
    """The governing equation is not invariant under the requested group."""


class OrderSaturationError(FbvpError):
    """Errors on the step ladder hit round-off; use coarser steps."""
