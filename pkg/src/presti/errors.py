"""Exception types raised across the toolkit."""


class PrestiError(Exception):
    """Base class for all toolkit errors."""


class NotARepository(PrestiError):
    """Path is not a readable git repository (or has no commits)."""


class CorruptObject(PrestiError):
    """A git object could not be read; the affected commit is skipped."""


class DegenerateCorpus(PrestiError):
    """Classifier training corpus contains a single class."""


class EmptyCorpus(PrestiError):
    """An operation that needs at least one document got none."""


class NegativeTarget(PrestiError):
    """Effort targets must be non-negative."""


class DimensionMismatch(PrestiError):
    """Feature matrix and target vector shapes disagree."""


class SingularSystem(PrestiError):
    """Normal equations are singular; only possible at lambda=0."""


class SequenceTooShort(PrestiError):
    """An encoded sequence is shorter than the largest convolution window."""


class NonFiniteLoss(PrestiError):
    """Training loss became NaN or infinite."""


class InsufficientData(PrestiError):
    """Too few samples for the requested fit."""


class LengthMismatch(PrestiError):
    """Paired vectors have different lengths."""


class EmptyInput(PrestiError):
    """An operation that needs at least one value got none."""


class TooFewRecords(PrestiError):
    """Dataset too small to split."""


class UntrainedModel(PrestiError):
    """Operation requires a trained model."""


class EmptyDataset(PrestiError):
    """Dataset file contains no records."""


class EmptyGroup(PrestiError):
    """A statistical group has no values."""
