"""
Decorators for management command handlers.
"""
from functools import wraps

from .error_handlers import to_command_error
from .exceptions import TransmissionError


def translates_errors(handle):
    """
    Turn domain errors raised by a command's handle() into CommandError.

    Usage:
        class Command(BaseCommand):
            @translates_errors
            def handle(self, *args, **options):
                ...
    """
    @wraps(handle)
    def wrapped_handle(self, *args, **options):
        try:
            return handle(self, *args, **options)
        except TransmissionError as exc:
            raise to_command_error(exc) from exc
    return wrapped_handle
