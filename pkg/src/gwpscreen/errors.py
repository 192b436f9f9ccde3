"""Exception types shared across the pipeline."""

from __future__ import annotations


class GwpScreenError(Exception):
    """Base class for all domain errors raised by gwpscreen."""


class DegenerateMatrix(GwpScreenError, ValueError):
    """Input has too few rows or no variance to fit a transform."""


class ShapeMismatch(GwpScreenError, ValueError):
    pass


class LengthMismatch(GwpScreenError, ValueError):
    pass


class IndexOutOfRange(GwpScreenError, IndexError):
    pass


class DegenerateDelta(GwpScreenError, ValueError):
    """A negative Kier-Hall valence delta, i.e. an atom type the indices do not model."""


class InvalidHyperparameters(GwpScreenError, ValueError):
    pass


class NonFiniteLoss(GwpScreenError, ArithmeticError):
    """Training diverged; ``epoch`` holds the zero-based epoch index."""

    def __init__(self, epoch: int, loss: float) -> None:
        super().__init__(f"non-finite training loss {loss!r} at epoch {epoch}")
        self.epoch = epoch
        self.loss = loss


class DatasetTooSmall(GwpScreenError, ValueError):
    pass


class NotEnoughTrials(GwpScreenError, RuntimeError):
    pass


class ArtifactVersionError(GwpScreenError, ValueError):
    """Serialized artifact is from an unknown schema version or is malformed."""
