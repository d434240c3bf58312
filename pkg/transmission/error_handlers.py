"""
Custom error handlers for the management commands.
"""
from django.core.management.base import CommandError

from .exceptions import ConfigError, TransmissionError, UsageError

# exit status for configuration and input problems
SCHEMA_RETURNCODE = 2
# exit status for failures inside the numerics
NUMERICAL_RETURNCODE = 3


def handle_config_error(exc):
    """Schema violation, reported with its dotted field path."""
    return CommandError(f"invalid config: {exc}", returncode=SCHEMA_RETURNCODE)


def handle_usage_error(exc):
    """Bad input that passed the schema (waveform file, channel parameter)."""
    return CommandError(f"invalid input: {exc}", returncode=SCHEMA_RETURNCODE)


def handle_numerical_error(exc):
    """Runtime failure, reported with the failing sample index when known."""
    index = getattr(exc, "sample_index", None)
    where = "" if index is None else f" at sample {index}"
    return CommandError(
        f"{type(exc).__name__}{where}: {exc}",
        returncode=NUMERICAL_RETURNCODE,
    )


def to_command_error(exc):
    if isinstance(exc, ConfigError):
        return handle_config_error(exc)
    if isinstance(exc, UsageError):
        return handle_usage_error(exc)
    if isinstance(exc, TransmissionError):
        return handle_numerical_error(exc)
    raise TypeError(f"no handler for {type(exc).__name__}")
