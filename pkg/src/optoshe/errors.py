"""Exception hierarchy. CLI exit codes are attached to the classes."""


class OptoSHEError(Exception):
    exit_code = 1


class ConfigError(OptoSHEError, ValueError):
    """Invalid parameter value or config key; ``field`` names the culprit."""

    exit_code = 2

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or field)


class NonConvergence(OptoSHEError, RuntimeError):
    exit_code = 3

    def __init__(self, message, last=None, residual=None, iterations=None):
        super().__init__(message)
        self.last = last
        self.residual = residual
        self.iterations = iterations


class DegenerateDenominator(OptoSHEError, ArithmeticError):
    exit_code = 3


class DegenerateLayer(OptoSHEError, ArithmeticError):
    exit_code = 3


class DegenerateInput(OptoSHEError, ValueError):
    exit_code = 3


class StepCollision(OptoSHEError, ValueError):
    exit_code = 3


class QuadratureNonConvergence(OptoSHEError, RuntimeError):
    exit_code = 4

    def __init__(self, message, coarse=None, fine=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class NoUnimodalMinimum(OptoSHEError, RuntimeError):
    exit_code = 3


class FlatCurve(OptoSHEError, ValueError):
    exit_code = 3


class SweepFailure(OptoSHEError, RuntimeError):
    """Too many grid points failed; ``failures`` holds ``(i, j, message)``."""

    exit_code = 3

    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = failures
