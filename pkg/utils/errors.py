"""
Error types shared by every module.

NumericError subclasses map to CLI exit code 3, ConfigError to exit code 2.
"""


class HardyPLaplaceError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1


class NumericError(HardyPLaplaceError):
    exit_code = 3


class ConfigError(HardyPLaplaceError):
    exit_code = 2


class InvalidBracket(NumericError):
    pass


class StepUnderflow(NumericError):
    pass


class MaxRefinementExceeded(NumericError):
    pass


class DomainError(NumericError):
    pass


class BuildError(NumericError):
    pass


class NoRealRoots(NumericError):
    pass


class EpsOutOfRange(NumericError):
    pass


class HomogeneousCase(NumericError):
    pass


class NotInExistenceRegion(NumericError):
    pass


class NonpositivePotential(NumericError):
    pass


class WindowTooShort(NumericError):
    pass


class NotConverged(NumericError):
    pass


class DeltaOutOfRange(NumericError):
    pass


class ConvergenceFailure(NumericError):
    pass
