"""Exception hierarchy. Each class maps to one CLI exit code."""


class ConSeqOptError(Exception):
    exit_code = 1


class ConfigurationError(ConSeqOptError, ValueError):
    """Invalid configuration or a missing evaluation vector."""

    exit_code = 2


class SchemaError(ConSeqOptError, ValueError):
    """Shapes, lengths or ids disagree between artifacts."""

    exit_code = 3


class DataError(ConSeqOptError, ValueError):
    """Non-finite or otherwise unusable numeric data."""

    exit_code = 4


class NormalizerViolation(DataError):
    """A cost exceeds the objective normalizer, so f would leave [0, 1]."""


class InstanceTooLarge(ConSeqOptError):
    """Brute-force enumeration guard tripped."""

    exit_code = 5
