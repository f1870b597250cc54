"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A configuration field, preset name or identifier is outside its domain."""


class InfeasibleOperatorError(ValueError):
    """The population is too small for the distinct indices a mutation needs."""


class DegenerateCovarianceError(ArithmeticError):
    """Raised when no usable eigenbasis can be computed for a covariance matrix."""


class LogParseError(ValueError):
    """A run log or configuration file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
