"""Error hierarchy shared by every app; each class knows its CLI exit code."""


class SimulationError(Exception):
    exit_code = 2

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context


class ConfigError(SimulationError):
    """Unparseable or invalid run configuration."""
    exit_code = 1

    def __init__(self, message, key=None, line=None):
        super().__init__(message, key=key, line=line)
        self.key = key
        self.line = line

    def __str__(self):
        text = f"{self.key}: {self.message}" if self.key else self.message
        if self.line is not None:
            return f"line {self.line}: {text}"
        return text


class DomainError(SimulationError, ValueError):
    """Argument outside the domain of a thermodynamic or grid function."""


class VacuumError(DomainError):
    """Specific volume reached the vacuum floor (p' singular)."""


class InstabilityError(SimulationError, ArithmeticError):
    """A field or Riccati value became non-finite."""


class MissingHistoryError(SimulationError):
    """Characteristic tracing requested without retained solver levels."""


class DivergenceError(SimulationError, ArithmeticError):
    """An integral of the damping coefficient failed to converge."""


class PoleError(SimulationError, ZeroDivisionError):
    """Closed-form Riccati solution evaluated at its pole."""


class FitFailure(SimulationError):
    """Blow-up extrapolation or scaling fit rejected."""
    exit_code = 3


class InsufficientDataError(FitFailure):
    """Too few gradient-stopped rows to fit a scaling law."""
