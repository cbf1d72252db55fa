"""
Exception types raised by the flowsieve services.

Each error carries the process exit code the CLI reports for it.
"""
from flowsieve.config import EXIT_CONFIG_ERROR, EXIT_DATA_ERROR, EXIT_TRAINING_ERROR, EXIT_UNEXPECTED


class FlowSieveError(Exception):
    """Base class for all expected flowsieve failures."""

    exit_code = EXIT_UNEXPECTED


class ConfigError(FlowSieveError):
    """Invalid configuration, arguments or generator settings."""

    exit_code = EXIT_CONFIG_ERROR


class UnsupportedModelError(ConfigError):
    """The requested operation is not defined for this model kind."""


class DataError(FlowSieveError, ValueError):
    """Input data is unreadable or violates a precondition."""

    exit_code = EXIT_DATA_ERROR


class TrainingError(FlowSieveError):
    """A classifier could not be trained or applied."""

    exit_code = EXIT_TRAINING_ERROR


class StageError(FlowSieveError):
    """
    A pipeline stage failed.

    Attributes:
        stage (str): Name of the failing stage
        cause (FlowSieveError): The underlying error
    """

    def __init__(self, stage: str, cause: FlowSieveError):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
