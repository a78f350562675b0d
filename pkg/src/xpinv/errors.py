"""Exception and warning types shared across the package."""


class XpinvError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(XpinvError):
    pass


class RankDeficientError(XpinvError):
    """Normal-equation matrix is numerically singular (condition number above cap)."""


class StepSizeInvalidError(XpinvError):
    pass


class UnstableError(XpinvError):
    """Integration state diverged (non-finite or beyond the blow-up bound)."""


class ConvergenceFailureError(XpinvError):
    """Eigenvalue iteration failed to converge."""


class NegativeConductanceError(XpinvError):
    pass


class UnknownSigmaModeError(XpinvError):
    pass


class ConductanceOutOfRangeError(XpinvError):
    """A scaled matrix entry cannot be programmed on the device.

    Carries the (row, col) of the offending entry when known.
    """

    def __init__(self, msg, row=None, col=None):
        super().__init__(msg)
        self.row = row
        self.col = col


class EmptyDatasetError(XpinvError):
    pass


class InconsistentDimensionsError(XpinvError):
    pass


class NonBinaryLabelError(XpinvError):
    pass


class SchemaMismatchError(XpinvError):
    pass


class ParseError(XpinvError):
    """CSV parse failure; carries 1-based row and column of the bad field."""

    def __init__(self, msg, row=None, col=None):
        super().__init__(msg)
        self.row = row
        self.col = col


class BadMagicError(XpinvError):
    pass


class TruncatedFileError(XpinvError):
    pass


class LabelOutOfRangeError(XpinvError):
    pass


class InsufficientSamplesError(XpinvError):
    pass


class ConfigInvalidError(XpinvError):
    """Bad experiment config; carries the dotted path of the offending field."""

    def __init__(self, msg, field=None):
        super().__init__(msg if field is None else f"{field}: {msg}")
        self.field = field


class UnknownParameterError(XpinvError):
    pass


class ClampViolationWarning(UserWarning):
    """An amplifier output in the ideal solution exceeds the diode clamp."""


class MismatchWarning(UserWarning):
    """Program/verify retry cap exhausted before reaching the pairing tolerance."""


class NotSettledWarning(UserWarning):
    """Transient did not settle within the simulated window."""
