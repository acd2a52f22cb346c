"""Exception types raised across the decoding engine."""


class EegDecodeError(Exception):
    """Base class for all errors raised by this package."""


# --- signal conditioning ---

class InvalidBand(EegDecodeError):
    """Band edges violate 0 < low < high < fs/2 or the order constraint."""


class UnstableDesign(EegDecodeError):
    """A designed filter has a pole on or outside the unit circle."""


class TooShort(EegDecodeError):
    """Signal too short for zero-phase (forward-backward) filtering."""


class IrrationalRatio(EegDecodeError):
    """Resampling ratio is not a small-integer rational (denominator > 1000)."""


class MissingChannel(EegDecodeError):
    """A requested channel name is not present in the recording."""

    def __init__(self, name):
        super().__init__(f"channel not in recording: {name!r}")
        self.name = name


# --- ICA cleaning ---

class RankDeficient(EegDecodeError):
    """Sample covariance is (numerically) rank deficient; cannot whiten."""


class BadIndex(EegDecodeError):
    """Component index outside the fitted component range."""


# --- model / training ---

class NonFinite(EegDecodeError):
    """An activation or gradient overflowed to NaN/Inf."""


class Degenerate(EegDecodeError):
    """A training set or split contains only one class."""


class Singular(EegDecodeError):
    """Covariance not invertible with zero shrinkage."""


class CalibrationTooSmall(EegDecodeError):
    """Not enough calibration windows for INT8 activation ranges."""


# --- evaluation ---

class EmptyInput(EegDecodeError):
    """No predictions/labels to evaluate."""


class SingleSubject(EegDecodeError):
    """Leave-one-subject-out needs at least two subjects."""


# --- persistence ---

class BadMagic(EegDecodeError):
    """File does not start with the expected magic bytes."""


class TruncatedPayload(EegDecodeError):
    """File ends before the declared payload/record is complete."""


class BadEventRow(EegDecodeError):
    """An event CSV row failed validation."""

    def __init__(self, line_no, reason):
        super().__init__(f"bad event row at line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


# --- real-time session ---

class AngleOutOfRange(EegDecodeError):
    """A SET command angle is outside the 0..120 degree joint range."""


class MalformedAck(EegDecodeError):
    """Actuator reply line does not parse as ACK/ERR."""


class EmptyTrace(EegDecodeError):
    """No decisions recorded; latency stats undefined."""


class Aborted(EegDecodeError):
    """Operator stopped a trial protocol; carries the partial ledger."""

    def __init__(self, ledger):
        super().__init__(f"protocol aborted after {len(ledger)} trials")
        self.ledger = ledger
