"""Exception hierarchy shared by every module of the package."""


class LoheError(Exception):
    """Base class for all errors raised by :mod:`lohe`."""


class DimensionError(LoheError, ValueError):
    """Operands have incompatible shapes."""


class ValidationError(LoheError, ValueError):
    """An input violates a structural precondition (hermiticity, unit norm, ...)."""


class ConvergenceError(LoheError, ArithmeticError):
    """An iterative routine did not converge within its iteration cap."""


class DivergenceError(LoheError, ArithmeticError):
    """Time integration produced non-finite values."""

    def __init__(self, message, *, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class ConfigError(LoheError, ValueError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message, *, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line
