class NeckError(Exception):
    """Base class for every error raised by the neck package."""


# Special functions
class PoleError(NeckError, ValueError):
    pass


class SeriesConvergenceError(NeckError, ArithmeticError):
    pass


class DomainError(NeckError, ValueError):
    pass


class DegenerateParametersError(NeckError, ValueError):
    pass


class BranchCutError(DomainError):
    pass


# Mode solver
class SigmaDegeneracyError(NeckError, ValueError):
    pass


class ModeOverflowError(NeckError, OverflowError):
    pass


class ExtrapolationError(NeckError, ArithmeticError):
    pass


class FitDegeneracyError(NeckError, ValueError):
    pass


# Assembly and models
class NeckParameterError(NeckError, ValueError):
    pass


class ZoneOverlapError(NeckError, ValueError):
    pass


class SingularityError(NeckError, ValueError):
    pass


class QuadratureError(NeckError, ArithmeticError):
    pass


class StepSizeError(NeckError, ValueError):
    pass


# Validation
class RegimeViolationError(NeckError, ValueError):
    pass


class WeightWindowError(NeckError, ValueError):
    pass


class CorrectorDivergenceError(NeckError, ArithmeticError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ContractionThresholdError(NeckError, ArithmeticError):
    pass


# Command line
class ConfigError(NeckError, ValueError):
    def __init__(self, message, path=None, line=None, key=None):
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        if key is not None:
            location += f"{key}: "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line
        self.key = key


class UsageError(NeckError, ValueError):
    pass
