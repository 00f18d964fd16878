"""
Exception hierarchy for weakflow.

Every error carries the process exit code the CLI returns for it.
"""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4
EXIT_NUMERICAL_FLOOR = 5
EXIT_INTERRUPTED = 130


class WeakFlowError(Exception):
    """Base class for all weakflow errors."""

    exit_code = EXIT_FAILURE


class ConfigurationError(WeakFlowError):
    """A RunConfig field (or CLI flag) is invalid."""

    exit_code = EXIT_CONFIG

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DataError(WeakFlowError):
    """Input data cannot be loaded, split or standardized."""

    exit_code = EXIT_CONFIG


class DimensionError(WeakFlowError, ValueError):
    """Parameter vector and model dimensions disagree."""

    exit_code = EXIT_CONFIG


class RankDeficientError(WeakFlowError):
    exit_code = EXIT_NUMERICAL


class NumericalDivergenceError(WeakFlowError):
    """A flow produced a non-finite state or an increasing loss."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message, step=None, time=None):
        self.step = step
        self.time = time
        where = ""
        if step is not None:
            where = f" (step {step}, t={time:.6g})"
        super().__init__(f"{message}{where}")


class AcceptanceError(WeakFlowError):
    """A measured quantity fell outside its acceptance envelope."""

    exit_code = EXIT_ACCEPTANCE
