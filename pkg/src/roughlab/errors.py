"""Exception hierarchy shared by the library and the CLI."""


class RoughLabError(Exception):
    pass


class GridError(RoughLabError, ValueError):
    pass


class ShapeError(RoughLabError, ValueError):
    pass


class ConfigError(RoughLabError, ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class NumericalError(RoughLabError, ArithmeticError):
    """A computation failed; ``module`` names where (e.g. ``solver``)."""

    def __init__(self, message, module):
        self.module = module
        super().__init__(message)


class WindowTooLarge(NumericalError):
    """Picard iteration did not contract on the requested window."""

    def __init__(self, message, record=None):
        self.record = record
        super().__init__(message, "solver")


class DriverTooRough(NumericalError):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message, "solver")


class DerivativeCheckError(RoughLabError, ValueError):
    pass
