"""
Exceptions raised by the transmission app.
"""


class TransmissionError(Exception):
    """Base class for every error raised by the simulator."""


class UsageError(TransmissionError, ValueError):
    """Caller passed arguments outside an operation's contract."""


class NumericalIntegrityError(TransmissionError):
    """A computed quantity left the range the physics allows."""


class InvalidChannelError(TransmissionError):
    """Kraus set violates the completeness condition."""


class DegenerateChannelError(TransmissionError):
    """The channel wipes out the coherence, so chi is undefined."""


class OutOfRegimeError(UsageError):
    """Signal too large for small-angle decoding."""


class UndecodableSampleError(TransmissionError):
    """The decoding contrast vanished for this sample."""


class IllConditionedEstimationError(TransmissionError):
    """Extended-basis estimation would divide by a near-zero population contrast."""


class UnsupportedEnsembleError(TransmissionError):
    """Operation needs a single pure ensemble component."""


class NoDataError(TransmissionError):
    """No decodable records to average over."""


class ConfigError(TransmissionError):
    """Run configuration failed schema validation."""

    def __init__(self, field_path, message):
        self.field_path = field_path
        self.message = message
        super().__init__(f"{field_path}: {message}" if field_path else message)
