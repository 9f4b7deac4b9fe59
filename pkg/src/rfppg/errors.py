"""Exception hierarchy shared across the rfppg pipeline."""


class RfppgError(Exception):
    """Base class for all pipeline errors."""


class EmptyInput(RfppgError):
    """Operation received an empty or too-short series."""


class DegenerateVariance(RfppgError):
    """Zero-variance input where a spread is required (z-score, PCA)."""


class SegmentTooLong(RfppgError):
    """Requested segment length exceeds the series length."""


class LengthMismatch(RfppgError):
    """Two sequences that must agree in length do not."""


class ShapeMismatch(RfppgError):
    """Matrix shape violates an operation precondition."""


class RateMismatch(RfppgError):
    """Sample rates that must agree do not."""


class InvalidRange(RfppgError):
    """Scalar parameter outside its allowed range."""


class InputTooShort(RfppgError):
    """Series too short for the requested wavelet depth."""


class NyquistViolation(RfppgError):
    """Filter cutoff at or above the Nyquist frequency."""


class SingularSystem(RfppgError):
    """Normal equations are rank-deficient and unregularized."""


class EmptyDataset(RfppgError):
    """Training or splitting requested on too few pairs."""


class DivergedLoss(RfppgError):
    """Training loss became NaN or Inf."""


class EmptyResult(RfppgError):
    """Pipeline produced no output (e.g. every window flagged)."""


class FormatError(RfppgError):
    """A file does not conform to its declared format."""


class ModelMismatch(RfppgError):
    """Model dimensions are incompatible with the data."""


class ConfigError(RfppgError):
    """Run configuration contains unknown keys or invalid values."""
