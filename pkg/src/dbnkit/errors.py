"""Exception types raised by the toolkit.

Each public operation documents which of these it can raise; everything
derives from :class:`DbnError` so callers can catch the whole family.
"""


class DbnError(Exception):
    """Base class for all toolkit errors."""


# --- IDX parsing -----------------------------------------------------------


class IdxError(DbnError, ValueError):
    """Malformed IDX container."""


class WrongMagic(IdxError):
    """Magic number does not match the expected IDX type."""


class Truncated(IdxError):
    """File ends before the header-promised payload."""


class TrailingBytes(IdxError):
    """File holds more bytes than the header promises."""


class LabelOutOfRange(IdxError):
    """A label byte is outside 0..9."""


class CountMismatch(DbnError, ValueError):
    """Image and label files disagree on the sample count."""


class ValidationTooLarge(DbnError, ValueError):
    """Requested validation split exceeds the dataset size."""


# --- linear algebra / RNG --------------------------------------------------


class ShapeMismatch(DbnError, ValueError):
    """Operand shapes do not conform."""


class BadRange(DbnError, ValueError):
    """Interval lower bound exceeds the upper bound."""


class NegativeStddev(DbnError, ValueError):
    """Standard deviation must be non-negative."""


# --- networks and training -------------------------------------------------


class StaleTrace(DbnError, ValueError):
    """Forward trace is inconsistent with the network it is applied to."""


class EpochOutOfRange(DbnError, ValueError):
    """Epoch index outside the configured schedule."""


class EmptyData(DbnError, ValueError):
    """Operation requires a non-empty dataset."""


class BadSizes(DbnError, ValueError):
    """Layer size list is too short or malformed."""


class EmptyStack(DbnError, ValueError):
    """At least one pretrained machine is required."""


# --- experiment harness ----------------------------------------------------


class EmptyArch(DbnError, ValueError):
    """Architecture string contains no layer sizes."""


class BadToken(DbnError, ValueError):
    """Architecture string token is not a positive integer or repetition."""


class ZeroSize(DbnError, ValueError):
    """Layer sizes must be >= 1."""


class ConfigInvalid(DbnError, ValueError):
    """Experiment configuration failed validation."""


class MissingDataFile(DbnError, FileNotFoundError):
    """A required dataset file is absent; the offending path is the message."""


class IoError(DbnError, OSError):
    """Reading or writing an artifact file failed."""


# --- checkpoint format -----------------------------------------------------


class BadMagic(DbnError, ValueError):
    """Checkpoint file does not start with the expected magic bytes."""


class UnsupportedVersion(DbnError, ValueError):
    """Checkpoint format version is not supported by this build."""


class CorruptLength(DbnError, ValueError):
    """Checkpoint payload is shorter or longer than its header implies."""
