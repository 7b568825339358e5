"""Custom exceptions for the services layer."""


class LabError(Exception):
    """Base exception class for the laboratory."""
    def __init__(self, message="An unexpected error occurred."):
        self.message = message
        super().__init__(self.message)


class ConfigurationError(LabError):
    """Raised when a run configuration cannot be read or validated."""
    def __init__(self, message="The run configuration is invalid.", errors=None):
        self.errors = errors or []
        super().__init__(message)


class ParameterError(LabError):
    """Raised when model parameters violate an operation's precondition."""
    def __init__(self, message="The model parameters do not satisfy this operation's precondition."):
        super().__init__(message)


class ConstructionError(ParameterError):
    """Raised when a Lyapunov function or its constants cannot be built."""
    def __init__(self, message="The requested construction is undefined for these parameters."):
        super().__init__(message)


class FieldDomainError(LabError):
    """Raised when a scalar field is not C² at the evaluation point (non-finite jet)."""
    def __init__(self, message="Field not C² here: jet evaluation produced non-finite values."):
        super().__init__(message)


class NoStationaryEstimateError(LabError):
    """Raised when the long stationary run escapes the numeric range."""
    def __init__(self, message="Trajectory escaped numeric range; no stationary estimate."):
        super().__init__(message)


class TrajectoryEscapedError(LabError):
    """Raised when a single Euler–Maruyama step leaves the numeric range."""
    def __init__(self, message="Trajectory escaped numeric range."):
        super().__init__(message)
